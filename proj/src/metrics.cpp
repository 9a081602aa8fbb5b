#include "patentpipe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include "patentpipe/core.hpp"

namespace patentpipe::metrics {

namespace {

bool word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

// English stopwords (lowercase, apostrophe-free forms).
constexpr std::string_view kEnglishStopwords[] = {
    "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any", "are", "aren",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can",
    "couldn", "d", "did", "didn", "do", "does", "doesn", "doing", "don", "down", "during", "each", "few", "for",
    "from", "further", "had", "hadn", "has", "hasn", "have", "haven", "having", "he", "her", "here", "hers",
    "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
    "just", "ll", "m", "ma", "me", "mightn", "more", "most", "mustn", "my", "myself", "needn", "no", "nor",
    "not", "now", "o", "of", "off", "on", "once", "only", "or", "other", "our", "ours", "ourselves", "out",
    "over", "own", "re", "s", "same", "shan", "she", "should", "shouldn", "so", "some", "such", "t", "than",
    "that", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this", "those",
    "through", "to", "too", "under", "until", "up", "ve", "very", "was", "wasn", "we", "were", "weren", "what",
    "when", "where", "which", "while", "who", "whom", "why", "will", "with", "won", "wouldn", "y", "you",
    "your", "yours", "yourself", "yourselves", "also", "may", "wherein", "whereby", "thereof", "therein",
    "thereby", "herein", "could", "would", "might", "must", "shall", "one", "via", "upon", "within",
};

}  // namespace

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (word_char(c)) {
            cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

const StopwordList& StopwordList::builtin() {
    static const StopwordList list = [] {
        StopwordList l;
        l.id_ = "en-v1";
        for (auto w : kEnglishStopwords) l.words_.emplace(w);
        return l;
    }();
    return list;
}

StopwordList StopwordList::load(const std::filesystem::path& path, std::string id) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword list " + path.string());
    StopwordList l;
    l.id_ = std::move(id);
    for (std::string line; std::getline(in, line);) {
        auto w = trim(line);
        if (w.empty() || w[0] == '#') continue;
        l.words_.insert(w);
    }
    return l;
}

std::vector<std::string> StopwordList::sorted_words() const {
    std::vector<std::string> out(words_.begin(), words_.end());
    std::sort(out.begin(), out.end());
    return out;
}

TokenSet content_tokens(std::string_view sentence, const StopwordList& stopwords) {
    TokenSet out;
    for (auto& tok : word_tokens(sentence))
        if (!stopwords.contains(tok)) out.push_back(std::move(tok));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Sentences
// ---------------------------------------------------------------------------

namespace {

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}'; }

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool ends_with_abbreviation(std::string_view seg) {
    // seg excludes the '.' being examined.
    std::size_t b = seg.size();
    while (b > 0 && (std::isalpha(static_cast<unsigned char>(seg[b - 1])) || seg[b - 1] == '.')) --b;
    std::string word(seg.substr(b));
    for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    static const std::string_view abbrevs[] = {"fig", "figs", "e.g", "i.e", "no", "nos"};
    return std::find(std::begin(abbrevs), std::end(abbrevs), word) != std::end(abbrevs);
}

void split_paragraph(std::string_view para, std::vector<std::string>& out) {
    std::size_t seg_start = 0;
    auto emit = [&](std::size_t end) {
        auto s = trim(para.substr(seg_start, end - seg_start));
        if (std::any_of(s.begin(), s.end(), [](char c) { return word_char(static_cast<unsigned char>(c)); }))
            out.push_back(std::move(s));
        seg_start = end;
    };
    for (std::size_t i = 0; i < para.size(); ++i) {
        const char c = para[i];
        if (c != '.' && c != '!' && c != '?') continue;
        std::size_t j = i + 1;
        while (j < para.size() && (para[j] == '.' || para[j] == '!' || para[j] == '?')) ++j;
        while (j < para.size() && is_closer(para[j])) ++j;
        if (j < para.size() && !std::isspace(static_cast<unsigned char>(para[j]))) continue;
        if (c == '.' && j == i + 1) {
            const auto so_far = trim(para.substr(seg_start, i - seg_start));
            if (all_digits(so_far) || ends_with_abbreviation(para.substr(seg_start, i - seg_start))) continue;
        }
        emit(j);
        i = j - 1;
    }
    emit(para.size());
}

}  // namespace

SentenceSet split_sentences(std::string_view text, const StopwordList& stopwords) {
    SentenceSet ss;
    // Paragraphs: separated by lines that hold only whitespace.
    std::size_t para_start = 0, line_start = 0;
    std::vector<std::string> sentences;
    auto flush = [&](std::size_t end) {
        if (end > para_start) split_paragraph(text.substr(para_start, end - para_start), sentences);
    };
    while (line_start <= text.size()) {
        auto nl = text.find('\n', line_start);
        const std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
        if (is_blank(text.substr(line_start, line_end - line_start))) {
            flush(line_start);
            para_start = line_end;
        }
        if (nl == std::string_view::npos) break;
        line_start = nl + 1;
    }
    flush(text.size());
    for (auto& s : sentences) {
        auto toks = content_tokens(s, stopwords);
        ss.short_flags.push_back(toks.size() < 3);
        ss.token_sets.push_back(std::move(toks));
        ss.sentences.push_back(std::move(s));
    }
    return ss;
}

// ---------------------------------------------------------------------------
// Jaccard / IRR
// ---------------------------------------------------------------------------

double jaccard(const TokenSet& a, const TokenSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0, i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { ++inter; ++i; ++j; }
    }
    const std::size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

int rep_indicator(const TokenSet& a, const TokenSet& b, double t) { return jaccard(a, b) >= t ? 1 : 0; }

void IrrConfig::validate() const {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("IRR threshold t must be in [0, 1]");
    if (!(epsilon > 0.0)) throw ConfigError("IRR epsilon must be positive");
    if (cap && !(*cap > 0.0)) throw ConfigError("IRR cap must be positive");
}

namespace {

using IdSet = std::vector<std::uint32_t>;

std::uint64_t count_pairs(const std::vector<IdSet>& sets, double t, std::size_t row_begin, std::size_t row_end) {
    std::uint64_t sum = 0;
    for (std::size_t i = row_begin; i < row_end; ++i) {
        const auto& a = sets[i];
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            const auto& b = sets[j];
            if (a.empty() && b.empty()) {
                sum += 1.0 >= t ? 1 : 0;
                continue;
            }
            const std::size_t lo = std::min(a.size(), b.size()), hi = std::max(a.size(), b.size());
            // jaccard <= lo/hi, and rounding preserves the order.
            if (static_cast<double>(lo) / static_cast<double>(hi) < t) continue;
            std::size_t inter = 0, p = 0, q = 0;
            while (p < a.size() && q < b.size()) {
                if (a[p] < b[q]) ++p;
                else if (b[q] < a[p]) ++q;
                else { ++inter; ++p; ++q; }
            }
            const double jac = static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
            sum += jac >= t ? 1 : 0;
        }
    }
    return sum;
}

}  // namespace

IrrResult irr(const SentenceSet& ss, const IrrConfig& cfg, unsigned threads) {
    cfg.validate();
    const std::size_t n = ss.n();
    if (n < 2) throw IrrUndefined(n);

    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<IdSet> sets;
    sets.reserve(n);
    for (const auto& toks : ss.token_sets) {
        IdSet s;
        s.reserve(toks.size());
        for (const auto& w : toks) s.push_back(ids.try_emplace(w, static_cast<std::uint32_t>(ids.size())).first->second);
        std::sort(s.begin(), s.end());
        sets.push_back(std::move(s));
    }

    std::uint64_t pair_sum = 0;
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads == 1) {
        pair_sum = count_pairs(sets, cfg.t, 0, n);
    } else {
        // Interleaved rows balance the triangular workload.
        std::vector<std::uint64_t> partial(threads, 0);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < n; i += threads) partial[w] += count_pairs(sets, cfg.t, i, i + 1);
            });
        }
        for (auto& th : pool) th.join();
        for (auto p : partial) pair_sum += p;
    }

    IrrResult r;
    r.n = n;
    r.total_pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    r.pair_sum = pair_sum;
    r.raw_value = static_cast<double>(r.total_pairs) / (static_cast<double>(pair_sum) + cfg.epsilon);
    r.value = r.raw_value;
    if (cfg.cap && r.raw_value > *cfg.cap) {
        r.value = *cfg.cap;
        r.capped = true;
    }
    return r;
}

// ---------------------------------------------------------------------------
// ROUGE
// ---------------------------------------------------------------------------

namespace {

std::map<std::string, std::uint64_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<std::string, std::uint64_t> out;
    if (toks.size() < n) return out;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        std::string key = toks[i];
        for (std::size_t k = 1; k < n; ++k) key.append("\x1f").append(toks[i + k]);
        ++out[key];
    }
    return out;
}

std::uint64_t clipped_overlap(const std::map<std::string, std::uint64_t>& cand,
                              const std::map<std::string, std::uint64_t>& ref) {
    std::uint64_t overlap = 0;
    for (const auto& [g, c] : cand) {
        auto it = ref.find(g);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    return overlap;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) return 0;
    // Intern to ints so the inner loop compares integers.
    std::unordered_map<std::string, std::uint32_t> ids;
    auto intern = [&](const std::vector<std::string>& v) {
        std::vector<std::uint32_t> out;
        out.reserve(v.size());
        for (const auto& w : v) out.push_back(ids.try_emplace(w, static_cast<std::uint32_t>(ids.size())).first->second);
        return out;
    };
    const auto x = intern(a), y = intern(b);
    std::vector<std::uint32_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
    for (std::size_t i = 1; i <= x.size(); ++i) {
        for (std::size_t j = 1; j <= y.size(); ++j)
            cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

// 2PR/(P+R) written as 2*overlap/(c+r), which is exact for simple ratios.
double f1(std::uint64_t overlap, std::uint64_t cand_total, std::uint64_t ref_total) {
    if (overlap == 0 || cand_total + ref_total == 0) return 0.0;
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(cand_total + ref_total);
}

}  // namespace

double rouge_f1(std::string_view candidate, std::string_view reference, RougeVariant variant) {
    const auto c = word_tokens(candidate);
    const auto r = word_tokens(reference);
    if (c.empty() || r.empty()) return (c.empty() && r.empty()) ? 1.0 : 0.0;
    if (variant == RougeVariant::rl) return f1(lcs_length(c, r), c.size(), r.size());
    const std::size_t n = variant == RougeVariant::r1 ? 1 : 2;
    const auto cg = ngram_counts(c, n), rg = ngram_counts(r, n);
    std::uint64_t ct = 0, rt = 0;
    for (const auto& [g, k] : cg) ct += k;
    for (const auto& [g, k] : rg) rt += k;
    if (ct == 0 && rt == 0) return c == r ? 1.0 : 0.0;
    return f1(clipped_overlap(cg, rg), ct, rt);
}

// ---------------------------------------------------------------------------
// BLEU
// ---------------------------------------------------------------------------

std::string_view bleu_settings() {
    return "corpus BLEU-4, uniform weights, add-one smoothing on zero-match orders 2-4, brevity penalty, 0-100";
}

BleuDetail bleu_detail(std::span<const std::string> candidates, std::span<const std::string> references) {
    if (candidates.size() != references.size() || candidates.empty())
        throw LengthMismatch(candidates.size(), references.size());
    BleuDetail d;
    d.matches.assign(kBleuOrder, 0);
    d.totals.assign(kBleuOrder, 0);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        const auto c = word_tokens(candidates[k]);
        const auto r = word_tokens(references[k]);
        d.candidate_length += c.size();
        d.reference_length += r.size();
        for (int n = 1; n <= kBleuOrder; ++n) {
            const auto cg = ngram_counts(c, static_cast<std::size_t>(n));
            const auto rg = ngram_counts(r, static_cast<std::size_t>(n));
            d.matches[n - 1] += clipped_overlap(cg, rg);
            for (const auto& [g, cnt] : cg) d.totals[n - 1] += cnt;
        }
    }
    if (d.candidate_length == 0 || d.matches[0] == 0) {
        d.precisions.assign(kBleuOrder, 0.0);
        d.brevity_penalty = d.candidate_length == 0 ? 0.0 : 1.0;
        d.score = 0.0;
        return d;
    }
    double log_sum = 0.0;
    for (int n = 0; n < kBleuOrder; ++n) {
        double p;
        if (n == 0 || d.matches[n] > 0)
            p = static_cast<double>(d.matches[n]) / static_cast<double>(d.totals[n]);
        else
            p = 1.0 / static_cast<double>(d.totals[n] + 1);
        d.precisions.push_back(p);
        log_sum += std::log(p);
    }
    const double c = static_cast<double>(d.candidate_length), r = static_cast<double>(d.reference_length);
    d.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);
    d.score = 100.0 * d.brevity_penalty * std::exp(log_sum / kBleuOrder);
    return d;
}

double bleu(std::span<const std::string> candidates, std::span<const std::string> references) {
    return bleu_detail(candidates, references).score;
}

// ---------------------------------------------------------------------------
// Length statistics
// ---------------------------------------------------------------------------

std::size_t WhitespaceCounter::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

BpeCounter::BpeCounter(std::vector<std::string> vocab, std::string id) : id_(std::move(id)) {
    if (vocab.empty()) throw ConfigError("BPE vocabulary is empty");
    for (std::size_t i = 0; i < vocab.size(); ++i) ranks_.try_emplace(std::move(vocab[i]), i);
}

std::unique_ptr<BpeCounter> BpeCounter::load(const std::filesystem::path& vocab_file) {
    std::ifstream in(vocab_file, std::ios::binary);
    if (!in) throw ConfigError("cannot open BPE vocabulary " + vocab_file.string());
    std::vector<std::string> vocab;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) vocab.push_back(std::move(line));
    }
    return std::make_unique<BpeCounter>(std::move(vocab), "bpe:" + vocab_file.filename().string());
}

namespace {

enum class CharClass { space, letter, digit, other };

CharClass classify(unsigned char c) {
    if (std::isspace(c)) return CharClass::space;
    if (std::isalpha(c) || c >= 0x80) return CharClass::letter;
    if (std::isdigit(c)) return CharClass::digit;
    return CharClass::other;
}

std::vector<std::string_view> pre_split(std::string_view text) {
    std::vector<std::string_view> chunks;
    std::size_t i = 0;
    while (i < text.size()) {
        std::size_t start = i;
        auto cls = classify(static_cast<unsigned char>(text[i]));
        if (cls == CharClass::space) {
            // A single space directly before a word belongs to that word.
            std::size_t j = i;
            while (j < text.size() && classify(static_cast<unsigned char>(text[j])) == CharClass::space) ++j;
            if (j < text.size() && j - i >= 1 && text[j - 1] == ' ') {
                if (j - 1 > i) chunks.push_back(text.substr(i, j - 1 - i));
                start = j - 1;
                i = j;
                cls = classify(static_cast<unsigned char>(text[i]));
            } else {
                chunks.push_back(text.substr(i, j - i));
                i = j;
                continue;
            }
        }
        while (i < text.size() && classify(static_cast<unsigned char>(text[i])) == cls) ++i;
        chunks.push_back(text.substr(start, i - start));
    }
    return chunks;
}

}  // namespace

std::vector<std::string> BpeCounter::encode(std::string_view text) const {
    std::vector<std::string> out;
    for (auto chunk : pre_split(text)) {
        if (auto it = ranks_.find(std::string(chunk)); it != ranks_.end()) {
            out.emplace_back(chunk);
            continue;
        }
        std::vector<std::string> parts;
        for (char c : chunk) parts.emplace_back(1, c);
        while (parts.size() > 1) {
            std::size_t best = std::numeric_limits<std::size_t>::max(), at = 0;
            for (std::size_t k = 0; k + 1 < parts.size(); ++k) {
                auto it = ranks_.find(parts[k] + parts[k + 1]);
                if (it != ranks_.end() && it->second < best) {
                    best = it->second;
                    at = k;
                }
            }
            if (best == std::numeric_limits<std::size_t>::max()) break;
            parts[at] += parts[at + 1];
            parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(at) + 1);
        }
        for (auto& p : parts) out.push_back(std::move(p));
    }
    return out;
}

std::size_t BpeCounter::count(std::string_view text) const { return encode(text).size(); }

std::unique_ptr<TokenCounter> make_token_counter(std::string_view spec) {
    if (spec.empty() || spec == "whitespace") return std::make_unique<WhitespaceCounter>();
    if (spec.substr(0, 4) == "bpe:") return BpeCounter::load(std::string(spec.substr(4)));
    throw ConfigError("unknown token counter: " + std::string(spec));
}

LengthStats length_stats(std::string_view text, const TokenCounter& counter) {
    LengthStats s;
    s.words = WhitespaceCounter{}.count(text);
    s.tokens = counter.count(text);
    s.sentences = split_sentences(text).n();
    for (char c : text)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++s.chars;
    return s;
}

}  // namespace patentpipe::metrics

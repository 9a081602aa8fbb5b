#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "patentpipe/metrics.hpp"

using namespace patentpipe;
using namespace patentpipe::metrics;

namespace {

// Straight-line oracles. They share no code with the production paths.

std::vector<std::string> oracle_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c) || c >= 0x80) {
            cur += static_cast<char>(std::tolower(c));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double oracle_jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& w : sa) inter += sb.count(w);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

struct OracleIrr {
    std::uint64_t pair_sum = 0;
    std::uint64_t total = 0;
    double value = 0;
};

OracleIrr oracle_irr(const SentenceSet& ss, double t, double eps) {
    OracleIrr o;
    const std::size_t n = ss.token_sets.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++o.total;
            if (oracle_jaccard(ss.token_sets[i], ss.token_sets[j]) >= t) ++o.pair_sum;
        }
    }
    o.value = static_cast<double>(o.total) / (static_cast<double>(o.pair_sum) + eps);
    return o;
}

std::map<std::vector<std::string>, int> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<std::vector<std::string>, int> m;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++m[{toks.begin() + i, toks.begin() + i + n}];
    return m;
}

std::size_t clipped_overlap(const std::vector<std::string>& c, const std::vector<std::string>& r, std::size_t n) {
    auto cc = ngram_counts(c, n), rc = ngram_counts(r, n);
    std::size_t o = 0;
    for (const auto& [g, k] : cc) {
        auto it = rc.find(g);
        if (it != rc.end()) o += static_cast<std::size_t>(std::min(k, it->second));
    }
    return o;
}

// LCS by plain recursion with memo, independent of the production DP.
std::size_t lcs_len(const std::vector<std::string>& a, const std::vector<std::string>& b, std::size_t i, std::size_t j,
                    std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::size_t v = a[i] == b[j] ? 1 + lcs_len(a, b, i + 1, j + 1, memo)
                                 : std::max(lcs_len(a, b, i + 1, j, memo), lcs_len(a, b, i, j + 1, memo));
    memo[key] = v;
    return v;
}

double oracle_rouge(const std::string& cand, const std::string& ref, RougeVariant v) {
    const auto c = oracle_tokens(cand), r = oracle_tokens(ref);
    if (c.empty() || r.empty()) return c.empty() && r.empty() ? 1.0 : 0.0;
    double overlap, cn, rn;
    if (v == RougeVariant::rl) {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
        overlap = static_cast<double>(lcs_len(c, r, 0, 0, memo));
        cn = static_cast<double>(c.size());
        rn = static_cast<double>(r.size());
    } else {
        const std::size_t n = v == RougeVariant::r1 ? 1 : 2;
        overlap = static_cast<double>(clipped_overlap(c, r, n));
        cn = c.size() >= n ? static_cast<double>(c.size() - n + 1) : 0.0;
        rn = r.size() >= n ? static_cast<double>(r.size() - n + 1) : 0.0;
        if (cn == 0 && rn == 0) return c == r ? 1.0 : 0.0;
    }
    if (overlap == 0) return 0.0;
    return 2.0 * overlap / (cn + rn);
}

double oracle_bleu(const std::vector<std::string>& cands, const std::vector<std::string>& refs) {
    double match[4] = {0, 0, 0, 0}, total[4] = {0, 0, 0, 0};
    double clen = 0, rlen = 0;
    for (std::size_t k = 0; k < cands.size(); ++k) {
        const auto c = oracle_tokens(cands[k]), r = oracle_tokens(refs[k]);
        clen += static_cast<double>(c.size());
        rlen += static_cast<double>(r.size());
        for (std::size_t n = 1; n <= 4; ++n) {
            match[n - 1] += static_cast<double>(clipped_overlap(c, r, n));
            if (c.size() >= n) total[n - 1] += static_cast<double>(c.size() - n + 1);
        }
    }
    if (clen == 0 || match[0] == 0) return 0.0;
    double log_sum = std::log(match[0] / total[0]);
    for (int n = 1; n < 4; ++n) {
        const double p = match[n] > 0 ? match[n] / total[n] : 1.0 / (total[n] + 1.0);
        log_sum += std::log(p);
    }
    const double bp = clen > rlen ? 1.0 : std::exp(1.0 - rlen / clen);
    return 100.0 * bp * std::exp(log_sum / 4.0);
}

const std::vector<std::string> kVocab = {
    "valve", "seat",  "poppet", "spring", "guide", "helical", "solenoid", "pulse", "sediment", "edge",
    "wipe",  "body",  "conical", "rotate", "stroke", "controller", "water", "flow", "outlet", "inlet",
    "the",   "a",     "of",      "and",    "is",     "which",      "42",    "claim", "figure", "tab"};

std::string random_document(std::mt19937_64& rng, std::size_t max_sentences) {
    std::uniform_int_distribution<std::size_t> n_sent(0, max_sentences);
    std::uniform_int_distribution<std::size_t> n_words(1, 8);
    std::uniform_int_distribution<std::size_t> word(0, kVocab.size() - 1);
    std::uniform_int_distribution<int> coin(0, 3);
    std::vector<std::string> sentences;
    const std::size_t n = n_sent(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (!sentences.empty() && coin(rng) == 0) {
            sentences.push_back(sentences[std::uniform_int_distribution<std::size_t>(0, sentences.size() - 1)(rng)]);
            continue;
        }
        std::string s;
        const std::size_t w = n_words(rng);
        for (std::size_t k = 0; k < w; ++k) s += (k ? " " : "") + kVocab[word(rng)];
        sentences.push_back(s);
    }
    std::string text;
    for (const auto& s : sentences) text += s + ". ";
    return text;
}

}  // namespace

TEST_CASE("word tokens are lowercase alphanumeric runs") {
    CHECK(word_tokens("The Valve-Seat, 42x!") == std::vector<std::string>{"the", "valve", "seat", "42x"});
    CHECK(word_tokens("").empty());
    CHECK(word_tokens("caf\xc3\xa9 bar") == std::vector<std::string>{"caf\xc3\xa9", "bar"});
}

TEST_CASE("builtin stopword list") {
    const auto& sw = StopwordList::builtin();
    CHECK(sw.id() == "en-v1");
    CHECK(sw.size() >= 160);
    CHECK(sw.size() <= 180);
    CHECK(sw.contains("the"));
    CHECK(sw.contains("wherein"));
    CHECK_FALSE(sw.contains("valve"));
    CHECK(content_tokens("The valve and the seat wherein 42") == TokenSet{"42", "seat", "valve"});
}

TEST_CASE("sentence splitting") {
    CHECK(split_sentences("A method. A system.").n() == 2);
    CHECK(split_sentences("").n() == 0);
    CHECK(split_sentences("1. A widget.\n2. The widget of claim 1.").n() == 2);
    CHECK(split_sentences("Is it open? Yes! Closed.").n() == 3);
    CHECK(split_sentences("First paragraph without stop\n\nSecond paragraph").n() == 2);
    CHECK(split_sentences("As shown in FIG. 2 the seat is conical. Done here now.").n() == 2);
    CHECK(split_sentences("Version 3.5 of the valve opens quickly.").n() == 1);

    const auto ss = split_sentences("Valve. The conical seat wipes sediment away.");
    REQUIRE(ss.n() == 2);
    CHECK(ss.short_flags[0]);
    CHECK_FALSE(ss.short_flags[1]);
    CHECK(ss.token_sets[1] == TokenSet{"away", "conical", "seat", "sediment", "wipes"});
}

TEST_CASE("jaccard") {
    const TokenSet a{"method", "novel", "system"}, b{"device", "method", "system"};
    CHECK(jaccard(a, b) == 0.5);
    CHECK(jaccard(a, a) == 1.0);
    CHECK(jaccard(TokenSet{"x"}, TokenSet{"y"}) == 0.0);
    CHECK(jaccard({}, {}) == 1.0);
    CHECK(jaccard(a, b) == jaccard(b, a));
}

TEST_CASE("rep indicator boundary is inclusive") {
    // J = 2/5 = 0.4
    const TokenSet a{"a1", "a2", "c1", "c2"}, b{"b1", "c1", "c2"};
    CHECK(jaccard(a, b) == 0.4);
    CHECK(rep_indicator(a, b, 0.4) == 1);
    CHECK(rep_indicator(a, b, 0.41) == 0);
    CHECK(rep_indicator(a, a, 0.0) == 1);

    // Constructed pairs whose Jaccard equals k/u exactly.
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t u = 1 + rng() % 30;
        const std::size_t k = rng() % (u + 1);
        const std::size_t only_a = (u - k) / 2;
        TokenSet x, y;
        for (std::size_t i = 0; i < k; ++i) x.push_back("c" + std::to_string(i));
        y = x;
        for (std::size_t i = 0; i < only_a; ++i) x.push_back("x" + std::to_string(i));
        for (std::size_t i = 0; i < u - k - only_a; ++i) y.push_back("y" + std::to_string(i));
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        if (x.empty() && y.empty()) continue;
        const double t = static_cast<double>(k) / static_cast<double>(u);
        CHECK(rep_indicator(x, y, t) == 1);
    }
}

TEST_CASE("irr constructed examples") {
    IrrConfig cfg;
    auto two = irr(split_sentences("The valve seat is conical. The valve seat is conical."), cfg);
    CHECK(two.pair_sum == 1);
    CHECK(two.value == doctest::Approx(1.0 / (1.0 + 1e-6)).epsilon(1e-12));

    auto three = irr(split_sentences("Valve seat conical. Poppet spring guide. Solenoid pulse controller."), cfg);
    CHECK(three.pair_sum == 0);
    CHECK(three.total_pairs == 3);
    CHECK(std::abs(three.value - 3.0 / 1e-6) < 1e-9 * 3e6);

    auto four = irr(split_sentences("Valve seat conical. Valve seat conical. Poppet spring guide. Poppet spring guide."),
                    cfg);
    CHECK(four.pair_sum == 2);
    CHECK(four.value == doctest::Approx(6.0 / (2.0 + 1e-6)).epsilon(1e-12));

    CHECK_THROWS_AS(irr(split_sentences("Only one sentence here."), cfg), IrrUndefined);
    CHECK_THROWS_AS(irr(split_sentences(""), cfg), IrrUndefined);
}

TEST_CASE("irr cap and config validation") {
    IrrConfig cfg;
    cfg.cap = 1000.0;
    auto r = irr(split_sentences("Valve seat conical. Poppet spring guide."), cfg);
    CHECK(r.capped);
    CHECK(r.value == 1000.0);
    CHECK(r.raw_value == doctest::Approx(1e6));

    IrrConfig bad;
    bad.t = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.t = 0.2;
    bad.epsilon = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("irr equals the naive oracle, any thread count") {
    std::mt19937_64 rng(2024);
    for (int doc = 0; doc < 100; ++doc) {
        const auto ss = split_sentences(random_document(rng, 50));
        if (ss.n() < 2) continue;
        for (double t : {0.0, 0.2, 0.4, 0.5, 1.0}) {
            IrrConfig cfg;
            cfg.t = t;
            const auto o = oracle_irr(ss, t, cfg.epsilon);
            for (unsigned threads : {1u, 3u}) {
                const auto r = irr(ss, cfg, threads);
                REQUIRE(r.pair_sum == o.pair_sum);
                REQUIRE(r.total_pairs == o.total);
                REQUIRE(r.raw_value == o.value);
            }
        }
    }
}

TEST_CASE("irr is non-decreasing in t") {
    std::mt19937_64 rng(99);
    for (int doc = 0; doc < 50; ++doc) {
        const auto ss = split_sentences(random_document(rng, 40));
        if (ss.n() < 2) continue;
        double prev = -1;
        for (int k = 1; k <= 9; ++k) {
            IrrConfig cfg;
            cfg.t = k / 10.0;
            const double v = irr(ss, cfg).value;
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("rouge examples") {
    CHECK(rouge_f1("the cat sat", "the cat", RougeVariant::r1) == 0.8);
    for (auto v : {RougeVariant::r1, RougeVariant::r2, RougeVariant::rl}) {
        CHECK(rouge_f1("a conical valve seat", "a conical valve seat", v) == 1.0);
        CHECK(rouge_f1("alpha beta", "gamma delta", v) == 0.0);
        CHECK(rouge_f1("", "gamma delta", v) == 0.0);
    }
    CHECK(rouge_f1("the cat sat on the mat", "the mat the cat", RougeVariant::rl) ==
          doctest::Approx(2.0 * 2 / 10).epsilon(1e-12));
}

TEST_CASE("rouge matches the brute-force oracle") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        const auto c = random_document(rng, 4), r = random_document(rng, 4);
        for (auto v : {RougeVariant::r1, RougeVariant::r2, RougeVariant::rl}) {
            const double got = rouge_f1(c, r, v);
            CHECK(got >= 0.0);
            CHECK(got <= 1.0);
            CHECK(got == doctest::Approx(oracle_rouge(c, r, v)).epsilon(1e-12));
        }
    }
}

TEST_CASE("bleu examples") {
    const std::vector<std::string> same{"the conical seat is wiped by the poppet edge", "a second document here"};
    CHECK(bleu(same, same) == doctest::Approx(100.0));

    const std::vector<std::string> c1{"alpha beta gamma delta"}, r1{"one two three four"};
    CHECK(bleu(c1, r1) < 1.0);

    // Five shared words, reversed, so no bigram matches: p = 1, 1/5, 1/4, 1/3.
    const std::vector<std::string> c2{"valve seat poppet spring guide"}, r2{"guide spring poppet seat valve"};
    const double expected = 100.0 * std::pow(1.0 * (1.0 / 5) * (1.0 / 4) * (1.0 / 3), 0.25);
    CHECK(bleu(c2, r2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(bleu(c2, r2) == doctest::Approx(35.93).epsilon(1e-3));
    CHECK(bleu(c2, r2) > 0.0);
    CHECK(bleu(c2, r2) < 100.0);

    CHECK_THROWS_AS(bleu(c1, same), LengthMismatch);
    CHECK_THROWS_AS(bleu(std::vector<std::string>{}, std::vector<std::string>{}), LengthMismatch);
    CHECK_FALSE(std::string(bleu_settings()).empty());
}

TEST_CASE("bleu brevity penalty") {
    const std::vector<std::string> c{"the valve seat"}, r{"the valve seat is conical and wiped"};
    const auto d = bleu_detail(c, r);
    CHECK(d.brevity_penalty == doctest::Approx(std::exp(1.0 - 7.0 / 3.0)));
    CHECK(d.candidate_length == 3);
    CHECK(d.reference_length == 7);
}

TEST_CASE("bleu matches the corpus oracle") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 100; ++k) {
        std::vector<std::string> cands, refs;
        const int docs = 1 + static_cast<int>(rng() % 4);
        for (int d = 0; d < docs; ++d) {
            cands.push_back(random_document(rng, 5));
            refs.push_back(random_document(rng, 5));
        }
        CHECK(bleu(cands, refs) == doctest::Approx(oracle_bleu(cands, refs)).epsilon(1e-10));
    }
}

TEST_CASE("length stats and token counters") {
    WhitespaceCounter ws;
    auto s = length_stats("a b c", ws);
    CHECK(s.words == 3);
    CHECK(s.tokens == 3);
    auto e = length_stats("", ws);
    CHECK(e.words == 0);
    CHECK(e.tokens == 0);
    CHECK(e.sentences == 0);
    CHECK(e.chars == 0);
    std::string hundred;
    for (int i = 0; i < 100; ++i) hundred += "word" + std::to_string(i) + " ";
    CHECK(length_stats(hundred, ws).tokens == 100);
    CHECK(length_stats("caf\xc3\xa9", ws).chars == 4);

    CHECK(make_token_counter("whitespace")->id() == "whitespace");
    CHECK_THROWS_AS(make_token_counter("sentencepiece"), ConfigError);
    CHECK_THROWS(make_token_counter("bpe:/nonexistent/vocab.txt"));
}

TEST_CASE("bpe counter merges by rank") {
    // Single characters first, then merges in priority order.
    BpeCounter bpe({"a", "b", "c", " ", "ab", " c", "abc"});
    CHECK(bpe.encode("abc") == std::vector<std::string>{"abc"});
    CHECK(bpe.encode("ab c") == std::vector<std::string>{"ab", " c"});
    CHECK(bpe.encode("abcab") == std::vector<std::string>{"abc", "ab"});
    CHECK(bpe.count("") == 0);
}

TEST_CASE("metrics are pure") {
    std::mt19937_64 rng(3);
    const auto doc = random_document(rng, 30);
    IrrConfig cfg;
    const auto ss = split_sentences(doc);
    if (ss.n() >= 2) CHECK(irr(ss, cfg).raw_value == irr(split_sentences(doc), cfg).raw_value);
    CHECK(rouge_f1(doc, doc + " extra", RougeVariant::rl) == rouge_f1(doc, doc + " extra", RougeVariant::rl));
}

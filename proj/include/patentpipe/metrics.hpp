#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "patentpipe/errors.hpp"

namespace patentpipe::metrics {

// ============================================================================
// Tokens and stopwords
// ============================================================================

// Lowercased runs of [a-z0-9]; bytes >= 0x80 count as word characters so
// UTF-8 words stay whole. Everything else separates tokens.
std::vector<std::string> word_tokens(std::string_view text);

class StopwordList {
public:
    // Embedded English list, id "en-v1".
    static const StopwordList& builtin();
    // One word per line; '#' starts a comment line.
    static StopwordList load(const std::filesystem::path& path, std::string id);

    const std::string& id() const noexcept { return id_; }
    bool contains(std::string_view w) const { return words_.count(std::string(w)) > 0; }
    std::size_t size() const noexcept { return words_.size(); }
    std::vector<std::string> sorted_words() const;

private:
    std::string id_;
    std::unordered_set<std::string> words_;
};

// Sorted, de-duplicated.
using TokenSet = std::vector<std::string>;

// word_tokens minus stopwords, as a set. Numbers are kept.
TokenSet content_tokens(std::string_view sentence, const StopwordList& stopwords = StopwordList::builtin());

// ============================================================================
// Sentences
// ============================================================================

struct SentenceSet {
    std::vector<std::string> sentences;
    std::vector<TokenSet> token_sets;
    // True where the sentence has fewer than three content tokens.
    std::vector<bool> short_flags;

    std::size_t n() const noexcept { return sentences.size(); }
};

/**
 * Splits on blank lines and on '.', '!' or '?' followed by whitespace or
 * the end of text (closing quotes and brackets may sit in between).
 *
 * A '.' does not end a sentence when the sentence so far is only a number
 * ("1." in a numbered claim list) or when it closes one of the
 * abbreviations FIG, FIGS, e.g, i.e, No, Nos. Segments with no word
 * characters are dropped.
 */
SentenceSet split_sentences(std::string_view text, const StopwordList& stopwords = StopwordList::builtin());

// ============================================================================
// Jaccard / IRR
// ============================================================================

// |a ∩ b| / |a ∪ b|; both empty gives 1.0.
double jaccard(const TokenSet& a, const TokenSet& b);

// 1 iff jaccard(a, b) >= t.
int rep_indicator(const TokenSet& a, const TokenSet& b, double t);

struct IrrConfig {
    double t = 0.2;
    double epsilon = 1e-6;
    std::string stopword_list_id = "en-v1";
    std::optional<double> cap;

    // Throws ConfigError.
    void validate() const;
};

struct IrrResult {
    double value = 0.0;           // after the optional cap
    double raw_value = 0.0;       // C(n,2) / (pair_sum + epsilon)
    std::uint64_t pair_sum = 0;   // repeated pairs at threshold t
    std::uint64_t total_pairs = 0;  // C(n,2)
    std::size_t n = 0;
    bool capped = false;
};

// Throws IrrUndefined when fewer than two sentences. threads > 1 splits the
// pair loop; the result does not depend on the split.
IrrResult irr(const SentenceSet& ss, const IrrConfig& cfg, unsigned threads = 1);

// ============================================================================
// ROUGE / BLEU
// ============================================================================

enum class RougeVariant { r1, r2, rl };

// F1 over lowercase word tokens (no stopword removal). Clipped n-gram
// overlap for r1/r2, longest common subsequence for rl.
double rouge_f1(std::string_view candidate, std::string_view reference, RougeVariant variant);

struct BleuDetail {
    double score = 0.0;  // 0..100
    double brevity_penalty = 1.0;
    std::vector<double> precisions;  // per order, after smoothing
    std::vector<std::uint64_t> matches;
    std::vector<std::uint64_t> totals;
    std::uint64_t candidate_length = 0;
    std::uint64_t reference_length = 0;
};

inline constexpr int kBleuOrder = 4;
// Human-readable settings string printed in report headers.
std::string_view bleu_settings();

/**
 * Corpus-level BLEU-4 on a 0-100 scale.
 *
 * Clipped n-gram matches and candidate n-gram totals are summed over the
 * corpus. Orders 2..4 with zero matches use (0 + 1) / (total + 1); the
 * unigram precision is never smoothed, so a corpus without a single shared
 * word scores 0. Brevity penalty exp(1 - r/c) when c <= r.
 */
BleuDetail bleu_detail(std::span<const std::string> candidates, std::span<const std::string> references);
double bleu(std::span<const std::string> candidates, std::span<const std::string> references);

// ============================================================================
// Length statistics
// ============================================================================

class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::size_t count(std::string_view text) const = 0;
    virtual std::string id() const = 0;
};

class WhitespaceCounter final : public TokenCounter {
public:
    std::size_t count(std::string_view text) const override;
    std::string id() const override { return "whitespace"; }
};

/**
 * Byte-level BPE with a rank-ordered vocabulary: one token per line, first
 * line is rank 0, lines taken literally (a leading space is part of the
 * token). Text is pre-split into chunks of an optional space followed by a
 * letter, digit or punctuation run; within a chunk the adjacent pair whose
 * concatenation has the lowest rank is merged until no pair is in the
 * vocabulary.
 */
class BpeCounter final : public TokenCounter {
public:
    // Throws ConfigError for a missing or empty vocabulary.
    static std::unique_ptr<BpeCounter> load(const std::filesystem::path& vocab_file);
    explicit BpeCounter(std::vector<std::string> vocab, std::string id = "bpe");

    std::size_t count(std::string_view text) const override;
    std::vector<std::string> encode(std::string_view text) const;
    std::string id() const override { return id_; }

private:
    std::unordered_map<std::string, std::size_t> ranks_;
    std::string id_;
};

// "whitespace" or "bpe:<path>". Throws ConfigError otherwise.
std::unique_ptr<TokenCounter> make_token_counter(std::string_view spec);

struct LengthStats {
    std::size_t tokens = 0;
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t chars = 0;  // UTF-8 code points
};

LengthStats length_stats(std::string_view text, const TokenCounter& counter);

}  // namespace patentpipe::metrics

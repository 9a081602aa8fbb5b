#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patentpipe/errors.hpp"

namespace patentpipe {

inline constexpr int kSchemaVersion = 1;

// ============================================================================
// Text helpers shared across modules
// ============================================================================

std::string trim(std::string_view s);
// Collapses every whitespace run to a single space and trims the ends.
std::string normalize_whitespace(std::string_view s);
bool is_blank(std::string_view s);

// ============================================================================
// Draft
// ============================================================================

// The five inventor questions, in order. Drafts must use these texts.
const std::array<std::string, 5>& canonical_questions();

struct DraftQA {
    int question_id = 0;
    std::string question_text;
    std::string answer_text;

    bool operator==(const DraftQA&) const = default;
};

/**
 * An inventor's technical draft: exactly five question/answer pairs,
 * ordered by question id, each question matching the canonical catalog.
 *
 * Only constructible through the validating factories, so every Draft in
 * circulation is well formed.
 */
class Draft {
public:
    // Pairs the canonical questions with the given answers.
    static Draft from_answers(const std::array<std::string, 5>& answers, std::string source_id = {});

    // Accepts entries in any order; throws InvalidDraft naming the first
    // missing question, a mismatched question text, or a blank answer.
    static Draft from_qa(std::vector<DraftQA> qa, std::string source_id = {});

    const std::vector<DraftQA>& qa() const noexcept { return qa_; }
    const std::string& answer(int question_id) const;
    const std::string& source_id() const noexcept { return source_id_; }

    bool operator==(const Draft&) const = default;

private:
    Draft() = default;
    std::vector<DraftQA> qa_;
    std::string source_id_;
};

// Canonical rendering: "Question k: <text>" then the answer, blocks separated
// by blank lines. Answers are emitted verbatim.
std::string render_draft(const Draft& d);

// ============================================================================
// Guideline tree
// ============================================================================

struct NodeId {
    int section = 0;
    int subsection = 0;

    auto operator<=>(const NodeId&) const = default;
};

std::string to_string(NodeId id);

struct GuidelineNode {
    int section_index = 0;
    int subsection_index = 0;
    std::string guideline_text;

    NodeId id() const noexcept { return {section_index, subsection_index}; }
    bool operator==(const GuidelineNode&) const = default;
};

struct SectionPlan {
    int section_index = 0;
    std::string overview;
    std::vector<GuidelineNode> subsections;

    bool operator==(const SectionPlan&) const = default;
};

// Two-layer writing-guideline tree: m >= 1 sections, each with t_i >= 1
// subsection guidelines. Indices are 1-based and positional.
class PGTree {
public:
    explicit PGTree(std::vector<SectionPlan> sections);

    const std::vector<SectionPlan>& sections() const noexcept { return sections_; }
    std::size_t section_count() const noexcept { return sections_.size(); }
    std::size_t node_count() const noexcept;
    // Nodes in traversal order (section-major).
    std::vector<GuidelineNode> nodes() const;
    bool contains(NodeId id) const noexcept;
    const GuidelineNode& node(NodeId id) const;

    // Human-readable outline handed to writers as the overview of the whole plan.
    std::string render() const;

    bool operator==(const PGTree&) const = default;

private:
    std::vector<SectionPlan> sections_;
};

// ============================================================================
// Reference bundle, retrieval and review
// ============================================================================

struct Reference {
    std::string title;
    std::string abstract;
    std::string background;
    std::string summary;
    std::string claims;
    Draft draft;

    bool complete() const noexcept;
    // Throws IncompleteReference naming the first blank component.
    void require_complete() const;
    // The text bound to the retrieval prompt.
    std::string render() const;
};

struct RetrievedContext {
    NodeId node;
    std::string content;
    // Reference parts whose lines appear verbatim in the content, e.g. "claims,draft".
    std::string source_hint;
    bool empty_retrieval = false;
};

enum class Verdict { pass, fail };

std::string_view to_string(Verdict v);

class ReviewVerdict {
public:
    // Throws Error when advice is blank.
    ReviewVerdict(Verdict result, std::string advice);

    Verdict result() const noexcept { return result_; }
    bool passed() const noexcept { return result_ == Verdict::pass; }
    const std::string& advice() const noexcept { return advice_; }

    bool operator==(const ReviewVerdict&) const = default;

private:
    Verdict result_;
    std::string advice_;
};

struct HistoryEntry {
    std::string text;
    ReviewVerdict verdict;
    // Set when a refinement returned exactly the previous text.
    bool no_change = false;
};

struct SubsectionDraft {
    NodeId node;
    std::string text;
    int rounds_used = 0;
    ReviewVerdict final_verdict{Verdict::fail, "not reviewed"};
    std::vector<HistoryEntry> history;
    bool accepted_with_warning = false;
    std::string warning;
};

// ============================================================================
// Run record
// ============================================================================

struct Sampling {
    double temperature = 0.5;
    double top_p = 0.9;
    int max_tokens = 4096;

    bool operator==(const Sampling&) const = default;
};

struct CallLogEntry {
    std::string agent_role;
    std::string model_id;
    std::string prompt_hash;
    std::string response_hash;
    double latency_ms = 0.0;
    int retries = 0;        // transport retries inside the gateway
    int parse_attempt = 0;  // 0 for the first call, k for the k-th format retry
    bool cached = false;
    std::string finish_reason;
};

struct RunRecord {
    std::string model_id;
    Sampling sampling;
    std::vector<CallLogEntry> calls;
    std::uint64_t seed = 0;
};

// ============================================================================
// Patent document
// ============================================================================

enum class Section { title, abstract, background, summary, claims, description };

inline constexpr std::array<Section, 6> kAllSections = {
    Section::title, Section::abstract, Section::background,
    Section::summary, Section::claims, Section::description};

std::string_view section_name(Section s);
// Accepts the lowercase names; throws ConfigError otherwise.
Section parse_section(std::string_view name);

using SectionOrder = std::array<Section, 6>;

// Title, abstract, background, summary, description, claims.
SectionOrder default_section_order();
// Throws ConfigError unless the order names each section exactly once.
void validate_section_order(const SectionOrder& order);
SectionOrder parse_section_order(const std::vector<std::string>& names);

class PatentDoc {
public:
    const std::string& section(Section s) const noexcept;
    const SectionOrder& section_order() const noexcept { return order_; }
    const RunRecord& generation_meta() const noexcept { return meta_; }

    // Plain-text serialization with a small header and one [[NAME]] block
    // per section in section_order.
    std::string render_text() const;
    // Section bodies only, joined by blank lines in section_order.
    std::string body_text() const;

    friend PatentDoc assemble_patent(std::string, std::string, std::string, std::string, std::string,
                                     std::string, const SectionOrder&, RunRecord);

private:
    PatentDoc() = default;
    std::array<std::string, 6> sections_;
    SectionOrder order_{};
    RunRecord meta_;
};

// Throws EmptySection naming the first blank input (checked in
// title, abstract, background, summary, claims, description order).
PatentDoc assemble_patent(std::string title, std::string abstract, std::string background,
                          std::string summary, std::string claims, std::string description,
                          const SectionOrder& order = default_section_order(), RunRecord meta = {});

struct ParsedPatentText {
    SectionOrder order{};
    std::array<std::optional<std::string>, 6> sections;
};

// Inverse of PatentDoc::render_text. Returns nullopt if the text does not
// carry the expected header.
std::optional<ParsedPatentText> parse_patent_text(std::string_view text);

}  // namespace patentpipe

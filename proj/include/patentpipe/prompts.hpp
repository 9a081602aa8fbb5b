#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patentpipe/errors.hpp"

namespace patentpipe {

// ============================================================================
// Templates
// ============================================================================

enum class TemplateId {
    title_writer,
    abstract_writer,
    background_writer,
    summary_writer,
    claims_writer,
    planner,
    planner_expand,
    pgtree_collect,
    retrieval,
    description_write,
    description_refine,
    examiner_review,
    draft_quality_q1,
    draft_quality_q2,
    draft_quality_q3,
    draft_quality_q4,
    draft_quality_q5,
    inventor_q1,
    inventor_q2,
    inventor_q3,
    inventor_q4,
    inventor_q5,
    zero_shot_full,
};

std::span<const TemplateId> all_template_ids();
std::string_view template_name(TemplateId id);
TemplateId parse_template_id(std::string_view name);
TemplateId draft_quality_template(int question_id);
TemplateId inventor_template(int question_id);

// slot name -> bound text
using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
    TemplateId id{};
    // Slots are written {{name}}; names are [a-z0-9_]+.
    std::string body;
    std::vector<std::string> required_slots;

    std::string content_hash() const;
};

// Slot names in order of first appearance.
std::vector<std::string> scan_slots(std::string_view body);

// Single-pass substitution: bound values are inserted verbatim and never
// rescanned. Throws MissingSlot for the first unbound slot.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

/**
 * The set of prompt templates in use.
 *
 * builtin() holds the embedded bodies. Asset directories hold one
 * "<name>.prompt" file per template with a front-matter block:
 *
 *     ---
 *     template_id: title_writer
 *     required_slots: draft
 *     sha256: <hash of body>
 *     ---
 *     <body>
 *
 * Loading verifies each body against the embedded hash, so an edited
 * prompt is only accepted when the caller opts in.
 */
class PromptRegistry {
public:
    static const PromptRegistry& builtin();
    static PromptRegistry load_assets(const std::filesystem::path& dir, bool allow_modified = false);

    void write_assets(const std::filesystem::path& dir) const;
    const PromptTemplate& get(TemplateId id) const;
    std::string render(TemplateId id, const Bindings& bindings) const;

private:
    std::map<TemplateId, PromptTemplate> templates_;
};

// ============================================================================
// Tag protocol
// ============================================================================

enum class Multiplicity { exactly_one, one_or_more };

struct TagSpec {
    std::string tag_name;
    Multiplicity multiplicity = Multiplicity::exactly_one;
    // Extra closing-tag spellings accepted besides </tag_name>.
    std::vector<std::string> alt_close = {};
};

// Trimmed inner texts in document order. Names match case-sensitively.
// Throws TagMissing, TagDuplicated (exactly_one with >1), TagUnclosed, TagNested.
std::vector<std::string> extract_tags(std::string_view output, const TagSpec& spec);
std::string extract_tag(std::string_view output, const std::string& tag_name);

std::string wrap_tag(std::string_view content, std::string_view tag_name);

struct NumberedBlock {
    int index = 0;
    std::string text;

    bool operator==(const NumberedBlock&) const = default;
};

// Parses <Prefix-k> ... </Prefix-k> blocks. Indices must read 1, 2, ..., m.
// Throws NoSections, NonContiguousIndices, TagUnclosed, TagNested.
std::vector<NumberedBlock> extract_sections(std::string_view output, std::string_view prefix = "Section");

std::string render_sections(const std::vector<NumberedBlock>& blocks, std::string_view prefix = "Section");

}  // namespace patentpipe

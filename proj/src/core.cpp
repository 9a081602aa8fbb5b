#include "patentpipe/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace patentpipe {

NonContiguousIndices::NonContiguousIndices(std::vector<int> found)
    : ParseError([&] {
          std::string msg = "section indices are not 1..m:";
          for (int k : found) msg += " " + std::to_string(k);
          return msg;
      }()),
      found_(std::move(found)) {}

AlignmentError::AlignmentError(std::vector<std::string> missing_in_reference,
                               std::vector<std::string> missing_in_generated)
    : Error([&] {
          std::string msg = "documents not aligned;";
          if (!missing_in_reference.empty()) {
              msg += " missing in reference:";
              for (const auto& id : missing_in_reference) msg += " " + id;
              msg += ";";
          }
          if (!missing_in_generated.empty()) {
              msg += " missing in generated:";
              for (const auto& id : missing_in_generated) msg += " " + id;
          }
          return msg;
      }()),
      missing_ref_(std::move(missing_in_reference)),
      missing_gen_(std::move(missing_in_generated)) {}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending = false;
    for (char c : s) {
        if (is_space(c)) {
            pending = !out.empty();
            continue;
        }
        if (pending) out.push_back(' ');
        pending = false;
        out.push_back(c);
    }
    return out;
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), is_space);
}

// ---------------------------------------------------------------------------
// Draft
// ---------------------------------------------------------------------------

const std::array<std::string, 5>& canonical_questions() {
    static const std::array<std::string, 5> questions = {
        "What is the technical problem that this patent aims to solve?",
        "What is the technical background of this invention, the most similar existing solutions, and its "
        "advantages over these solutions?",
        "What is the detailed technical solution of the invention?",
        "What are the key points of the invention, and which points are intended to be protected?",
        "What is the detailed description of each figure individually?",
    };
    return questions;
}

Draft Draft::from_answers(const std::array<std::string, 5>& answers, std::string source_id) {
    std::vector<DraftQA> qa;
    for (int i = 0; i < 5; ++i) qa.push_back({i + 1, canonical_questions()[i], answers[i]});
    return from_qa(std::move(qa), std::move(source_id));
}

Draft Draft::from_qa(std::vector<DraftQA> qa, std::string source_id) {
    std::set<int> seen;
    for (const auto& e : qa) {
        if (e.question_id < 1 || e.question_id > 5)
            throw InvalidDraft("question_id " + std::to_string(e.question_id) + " is outside 1..5");
        if (!seen.insert(e.question_id).second)
            throw InvalidDraft("question " + std::to_string(e.question_id) + " appears more than once");
    }
    for (int id = 1; id <= 5; ++id) {
        if (!seen.count(id))
            throw InvalidDraft("missing question " + std::to_string(id) + ": \"" + canonical_questions()[id - 1] +
                               "\"");
    }
    std::sort(qa.begin(), qa.end(), [](const auto& a, const auto& b) { return a.question_id < b.question_id; });
    for (const auto& e : qa) {
        const auto& canonical = canonical_questions()[e.question_id - 1];
        if (normalize_whitespace(e.question_text) != canonical)
            throw InvalidDraft("question " + std::to_string(e.question_id) + " does not match the catalog: \"" +
                               e.question_text + "\"");
        if (is_blank(e.answer_text))
            throw InvalidDraft("answer to question " + std::to_string(e.question_id) + " is empty");
    }
    Draft d;
    d.qa_ = std::move(qa);
    for (auto& e : d.qa_) e.question_text = canonical_questions()[e.question_id - 1];
    d.source_id_ = std::move(source_id);
    return d;
}

const std::string& Draft::answer(int question_id) const {
    if (question_id < 1 || question_id > 5) throw InvalidDraft("question_id out of range");
    return qa_[static_cast<std::size_t>(question_id - 1)].answer_text;
}

std::string render_draft(const Draft& d) {
    std::string out;
    for (const auto& e : d.qa()) {
        if (!out.empty()) out += "\n\n";
        out += "Question " + std::to_string(e.question_id) + ": " + e.question_text + "\n";
        out += e.answer_text;
    }
    return out;
}

// ---------------------------------------------------------------------------
// PGTree
// ---------------------------------------------------------------------------

std::string to_string(NodeId id) {
    return std::to_string(id.section) + "." + std::to_string(id.subsection);
}

PGTree::PGTree(std::vector<SectionPlan> sections) : sections_(std::move(sections)) {
    if (sections_.empty()) throw InvalidPlan("guideline tree needs at least one section");
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const auto& s = sections_[i];
        if (s.section_index != static_cast<int>(i) + 1)
            throw InvalidPlan("section " + std::to_string(i + 1) + " carries index " +
                              std::to_string(s.section_index));
        if (s.subsections.empty())
            throw InvalidPlan("section " + std::to_string(s.section_index) + " has no subsections");
        for (std::size_t j = 0; j < s.subsections.size(); ++j) {
            const auto& n = s.subsections[j];
            if (n.section_index != s.section_index || n.subsection_index != static_cast<int>(j) + 1)
                throw InvalidPlan("node " + to_string(n.id()) + " is misplaced under section " +
                                  std::to_string(s.section_index));
            if (is_blank(n.guideline_text)) throw InvalidPlan("node " + to_string(n.id()) + " has no guideline");
        }
    }
}

std::size_t PGTree::node_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : sections_) n += s.subsections.size();
    return n;
}

std::vector<GuidelineNode> PGTree::nodes() const {
    std::vector<GuidelineNode> out;
    out.reserve(node_count());
    for (const auto& s : sections_) out.insert(out.end(), s.subsections.begin(), s.subsections.end());
    return out;
}

bool PGTree::contains(NodeId id) const noexcept {
    if (id.section < 1 || id.section > static_cast<int>(sections_.size())) return false;
    const auto& subs = sections_[static_cast<std::size_t>(id.section - 1)].subsections;
    return id.subsection >= 1 && id.subsection <= static_cast<int>(subs.size());
}

const GuidelineNode& PGTree::node(NodeId id) const {
    if (!contains(id)) throw InvalidPlan("node " + to_string(id) + " is not in the tree");
    return sections_[static_cast<std::size_t>(id.section - 1)].subsections[static_cast<std::size_t>(id.subsection - 1)];
}

std::string PGTree::render() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < sections_.size(); ++i) {
        const auto& s = sections_[i];
        if (i) out << "\n";
        out << "Section " << s.section_index << ": " << s.overview << "\n";
        for (const auto& n : s.subsections)
            out << "  Subsection " << n.section_index << "." << n.subsection_index << ": " << n.guideline_text
                << "\n";
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Reference / verdicts
// ---------------------------------------------------------------------------

bool Reference::complete() const noexcept {
    return !is_blank(title) && !is_blank(abstract) && !is_blank(background) && !is_blank(summary) &&
           !is_blank(claims);
}

void Reference::require_complete() const {
    const std::pair<const char*, const std::string*> parts[] = {
        {"title", &title}, {"abstract", &abstract}, {"background", &background},
        {"summary", &summary}, {"claims", &claims}};
    for (const auto& [name, text] : parts)
        if (is_blank(*text)) throw IncompleteReference(std::string("reference is missing its ") + name);
}

std::string Reference::render() const {
    std::string out;
    out += "Title: " + title + "\n\n";
    out += "Abstract: " + abstract + "\n\n";
    out += "Background: " + background + "\n\n";
    out += "Summary: " + summary + "\n\n";
    out += "Claims: " + claims + "\n\n";
    out += "Draft:\n" + render_draft(draft);
    return out;
}

std::string_view to_string(Verdict v) { return v == Verdict::pass ? "Pass" : "Fail"; }

ReviewVerdict::ReviewVerdict(Verdict result, std::string advice)
    : result_(result), advice_(std::move(advice)) {
    if (is_blank(advice_)) throw Error("review verdict requires advice");
}

// ---------------------------------------------------------------------------
// Sections and PatentDoc
// ---------------------------------------------------------------------------

std::string_view section_name(Section s) {
    switch (s) {
        case Section::title: return "title";
        case Section::abstract: return "abstract";
        case Section::background: return "background";
        case Section::summary: return "summary";
        case Section::claims: return "claims";
        case Section::description: return "description";
    }
    return "unknown";
}

Section parse_section(std::string_view name) {
    for (auto s : kAllSections)
        if (section_name(s) == name) return s;
    throw ConfigError("unknown section name: " + std::string(name));
}

SectionOrder default_section_order() {
    return {Section::title, Section::abstract, Section::background,
            Section::summary, Section::description, Section::claims};
}

void validate_section_order(const SectionOrder& order) {
    std::set<Section> seen(order.begin(), order.end());
    if (seen.size() != order.size()) throw ConfigError("section order must list each of the six sections once");
}

SectionOrder parse_section_order(const std::vector<std::string>& names) {
    if (names.size() != 6) throw ConfigError("section order must have six entries");
    SectionOrder order{};
    for (std::size_t i = 0; i < 6; ++i) order[i] = parse_section(names[i]);
    validate_section_order(order);
    return order;
}

const std::string& PatentDoc::section(Section s) const noexcept {
    return sections_[static_cast<std::size_t>(s)];
}

namespace {
constexpr std::string_view kTextMagic = "patentpipe-patent schema_version=";
}

std::string PatentDoc::render_text() const {
    std::string out(kTextMagic);
    out += std::to_string(kSchemaVersion) + "\nsection_order:";
    for (std::size_t i = 0; i < order_.size(); ++i) out += (i ? "," : " ") + std::string(section_name(order_[i]));
    out += "\n";
    for (auto s : order_) out += "\n[[" + upper(section_name(s)) + "]]\n" + section(s) + "\n";
    return out;
}

std::string PatentDoc::body_text() const {
    std::string out;
    for (auto s : order_) {
        if (!out.empty()) out += "\n\n";
        out += section(s);
    }
    return out;
}

PatentDoc assemble_patent(std::string title, std::string abstract, std::string background, std::string summary,
                          std::string claims, std::string description, const SectionOrder& order, RunRecord meta) {
    validate_section_order(order);
    std::array<std::string, 6> parts = {std::move(title), std::move(abstract), std::move(background),
                                        std::move(summary), std::move(claims), std::move(description)};
    for (auto s : kAllSections)
        if (is_blank(parts[static_cast<std::size_t>(s)])) throw EmptySection(std::string(section_name(s)));
    PatentDoc doc;
    doc.sections_ = std::move(parts);
    doc.order_ = order;
    doc.meta_ = std::move(meta);
    return doc;
}

std::optional<ParsedPatentText> parse_patent_text(std::string_view text) {
    if (text.substr(0, kTextMagic.size()) != kTextMagic) return std::nullopt;
    auto line_end = text.find('\n');
    if (line_end == std::string_view::npos) return std::nullopt;
    std::size_t pos = line_end + 1;
    constexpr std::string_view order_prefix = "section_order: ";
    if (text.substr(pos, order_prefix.size()) != order_prefix) return std::nullopt;
    line_end = text.find('\n', pos);
    if (line_end == std::string_view::npos) return std::nullopt;
    std::vector<std::string> names;
    {
        std::string list(text.substr(pos + order_prefix.size(), line_end - pos - order_prefix.size()));
        std::stringstream ss(list);
        for (std::string item; std::getline(ss, item, ',');) names.push_back(trim(item));
    }
    ParsedPatentText parsed;
    try {
        parsed.order = parse_section_order(names);
    } catch (const ConfigError&) {
        return std::nullopt;
    }
    pos = line_end + 1;
    for (std::size_t i = 0; i < parsed.order.size(); ++i) {
        const std::string header = "\n[[" + upper(section_name(parsed.order[i])) + "]]\n";
        if (text.substr(pos, header.size()) != header) return std::nullopt;
        const std::size_t start = pos + header.size();
        std::size_t end;
        if (i + 1 < parsed.order.size()) {
            const std::string next = "\n\n[[" + upper(section_name(parsed.order[i + 1])) + "]]\n";
            end = text.find(next, start);
            if (end == std::string_view::npos) return std::nullopt;
            pos = end + 1;
        } else {
            if (text.empty() || text.back() != '\n' || text.size() - 1 < start) return std::nullopt;
            end = text.size() - 1;
        }
        parsed.sections[static_cast<std::size_t>(parsed.order[i])] = std::string(text.substr(start, end - start));
    }
    return parsed;
}

}  // namespace patentpipe

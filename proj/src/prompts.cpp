#include "patentpipe/prompts.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "patentpipe/core.hpp"
#include "patentpipe/hash.hpp"
#include "patentpipe/json_io.hpp"
#include "prompt_bodies.hpp"

namespace patentpipe {

namespace {

constexpr std::array<std::pair<TemplateId, std::string_view>, 23> kNames = {{
    {TemplateId::title_writer, "title_writer"},
    {TemplateId::abstract_writer, "abstract_writer"},
    {TemplateId::background_writer, "background_writer"},
    {TemplateId::summary_writer, "summary_writer"},
    {TemplateId::claims_writer, "claims_writer"},
    {TemplateId::planner, "planner"},
    {TemplateId::planner_expand, "planner_expand"},
    {TemplateId::pgtree_collect, "pgtree_collect"},
    {TemplateId::retrieval, "retrieval"},
    {TemplateId::description_write, "description_write"},
    {TemplateId::description_refine, "description_refine"},
    {TemplateId::examiner_review, "examiner_review"},
    {TemplateId::draft_quality_q1, "draft_quality_q1"},
    {TemplateId::draft_quality_q2, "draft_quality_q2"},
    {TemplateId::draft_quality_q3, "draft_quality_q3"},
    {TemplateId::draft_quality_q4, "draft_quality_q4"},
    {TemplateId::draft_quality_q5, "draft_quality_q5"},
    {TemplateId::inventor_q1, "inventor_q1"},
    {TemplateId::inventor_q2, "inventor_q2"},
    {TemplateId::inventor_q3, "inventor_q3"},
    {TemplateId::inventor_q4, "inventor_q4"},
    {TemplateId::inventor_q5, "inventor_q5"},
    {TemplateId::zero_shot_full, "zero_shot_full"},
}};

const std::array<TemplateId, 23>& id_list() {
    static const auto ids = [] {
        std::array<TemplateId, 23> out{};
        for (std::size_t i = 0; i < kNames.size(); ++i) out[i] = kNames[i].first;
        return out;
    }();
    return ids;
}

bool slot_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Returns the slot name if a well-formed {{name}} starts at pos.
std::string_view slot_at(std::string_view body, std::size_t pos, std::size_t& end) {
    if (body.substr(pos, 2) != "{{") return {};
    std::size_t i = pos + 2;
    while (i < body.size() && slot_char(body[i])) ++i;
    if (i == pos + 2 || body.substr(i, 2) != "}}") return {};
    end = i + 2;
    return body.substr(pos + 2, i - pos - 2);
}

}  // namespace

std::span<const TemplateId> all_template_ids() { return id_list(); }

std::string_view template_name(TemplateId id) {
    for (const auto& [tid, name] : kNames)
        if (tid == id) return name;
    return "unknown";
}

TemplateId parse_template_id(std::string_view name) {
    for (const auto& [tid, n] : kNames)
        if (n == name) return tid;
    throw ConfigError("unknown template id: " + std::string(name));
}

TemplateId draft_quality_template(int question_id) {
    if (question_id < 1 || question_id > 5) throw ConfigError("question id out of range");
    return static_cast<TemplateId>(static_cast<int>(TemplateId::draft_quality_q1) + question_id - 1);
}

TemplateId inventor_template(int question_id) {
    if (question_id < 1 || question_id > 5) throw ConfigError("question id out of range");
    return static_cast<TemplateId>(static_cast<int>(TemplateId::inventor_q1) + question_id - 1);
}

std::string PromptTemplate::content_hash() const { return sha256_hex(body); }

std::vector<std::string> scan_slots(std::string_view body) {
    std::vector<std::string> out;
    for (std::size_t pos = 0; pos < body.size();) {
        std::size_t end = 0;
        auto name = slot_at(body, pos, end);
        if (name.empty()) {
            ++pos;
            continue;
        }
        if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
        pos = end;
    }
    return out;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
    for (const auto& slot : tmpl.required_slots)
        if (!bindings.count(slot)) throw MissingSlot(slot);
    const std::string_view body = tmpl.body;
    std::string out;
    out.reserve(body.size());
    for (std::size_t pos = 0; pos < body.size();) {
        std::size_t end = 0;
        auto name = slot_at(body, pos, end);
        if (name.empty()) {
            out.push_back(body[pos++]);
            continue;
        }
        auto it = bindings.find(std::string(name));
        if (it == bindings.end()) throw MissingSlot(std::string(name));
        out += it->second;
        pos = end;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

const PromptRegistry& PromptRegistry::builtin() {
    static const PromptRegistry reg = [] {
        PromptRegistry r;
        for (auto id : all_template_ids()) {
            PromptTemplate t;
            t.id = id;
            t.body = std::string(detail::builtin_body(id));
            t.required_slots = scan_slots(t.body);
            r.templates_.emplace(id, std::move(t));
        }
        return r;
    }();
    return reg;
}

const PromptTemplate& PromptRegistry::get(TemplateId id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw ConfigError("template not registered: " + std::string(template_name(id)));
    return it->second;
}

std::string PromptRegistry::render(TemplateId id, const Bindings& bindings) const {
    return patentpipe::render(get(id), bindings);
}

void PromptRegistry::write_assets(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [id, t] : templates_) {
        std::string slots;
        for (const auto& s : t.required_slots) slots += (slots.empty() ? "" : ", ") + s;
        std::string text = "---\ntemplate_id: " + std::string(template_name(id)) + "\nrequired_slots: " + slots +
                           "\nsha256: " + t.content_hash() + "\n---\n" + t.body;
        write_text_file(dir / (std::string(template_name(id)) + ".prompt"), text);
    }
}

PromptRegistry PromptRegistry::load_assets(const std::filesystem::path& dir, bool allow_modified) {
    const auto& embedded = builtin();
    PromptRegistry reg;
    for (auto id : all_template_ids()) {
        const auto path = dir / (std::string(template_name(id)) + ".prompt");
        const std::string text = read_text_file(path);
        if (text.rfind("---\n", 0) != 0) throw PromptAssetError(path.string() + ": missing front-matter");
        const auto fm_end = text.find("\n---\n", 3);
        if (fm_end == std::string::npos) throw PromptAssetError(path.string() + ": unterminated front-matter");
        std::map<std::string, std::string> fields;
        std::istringstream fm(text.substr(4, fm_end - 4 + 1));
        for (std::string line; std::getline(fm, line);) {
            auto colon = line.find(':');
            if (colon == std::string::npos) continue;
            fields[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
        }
        PromptTemplate t;
        t.id = id;
        t.body = text.substr(fm_end + 5);
        if (fields["template_id"] != template_name(id))
            throw PromptAssetError(path.string() + ": template_id does not match file name");
        t.required_slots = scan_slots(t.body);
        std::string declared = fields["required_slots"];
        std::string actual;
        for (const auto& s : t.required_slots) actual += (actual.empty() ? "" : ", ") + s;
        if (declared != actual)
            throw PromptAssetError(path.string() + ": front-matter slots '" + declared + "' but body uses '" + actual +
                                   "'");
        const std::string hash = t.content_hash();
        if (fields["sha256"] != hash)
            throw PromptAssetError(path.string() + ": body does not match its sha256 front-matter");
        if (!allow_modified && hash != embedded.get(id).content_hash())
            throw PromptAssetError(path.string() + ": prompt differs from the embedded version");
        reg.templates_.emplace(id, std::move(t));
    }
    return reg;
}

// ---------------------------------------------------------------------------
// Tag protocol
// ---------------------------------------------------------------------------

std::vector<std::string> extract_tags(std::string_view output, const TagSpec& spec) {
    const std::string open = "<" + spec.tag_name + ">";
    std::vector<std::string> closers = {"</" + spec.tag_name + ">"};
    for (const auto& alt : spec.alt_close) closers.push_back("</" + alt + ">");

    std::vector<std::string> found;
    std::size_t pos = 0;
    while (true) {
        const auto o = output.find(open, pos);
        if (o == std::string_view::npos) break;
        const auto start = o + open.size();
        std::size_t close = std::string_view::npos, close_len = 0;
        for (const auto& c : closers) {
            const auto at = output.find(c, start);
            if (at < close) {
                close = at;
                close_len = c.size();
            }
        }
        if (close == std::string_view::npos) throw TagUnclosed(spec.tag_name);
        if (output.find(open, start) < close) throw TagNested(spec.tag_name);
        found.push_back(trim(output.substr(start, close - start)));
        pos = close + close_len;
    }
    if (found.empty()) throw TagMissing(spec.tag_name);
    if (spec.multiplicity == Multiplicity::exactly_one && found.size() > 1)
        throw TagDuplicated(spec.tag_name, found.size());
    return found;
}

std::string extract_tag(std::string_view output, const std::string& tag_name) {
    return extract_tags(output, TagSpec{tag_name, Multiplicity::exactly_one}).front();
}

std::string wrap_tag(std::string_view content, std::string_view tag_name) {
    std::string out;
    out.reserve(content.size() + 2 * tag_name.size() + 5);
    out.append("<").append(tag_name).append(">").append(content).append("</").append(tag_name).append(">");
    return out;
}

std::vector<NumberedBlock> extract_sections(std::string_view output, std::string_view prefix) {
    const std::string open_prefix = "<" + std::string(prefix) + "-";
    std::vector<NumberedBlock> blocks;
    std::size_t pos = 0;
    while (true) {
        const auto o = output.find(open_prefix, pos);
        if (o == std::string_view::npos) break;
        std::size_t i = o + open_prefix.size();
        const std::size_t digits_start = i;
        while (i < output.size() && std::isdigit(static_cast<unsigned char>(output[i])) && i - digits_start < 9) ++i;
        if (i == digits_start || i >= output.size() || output[i] != '>') {
            pos = o + 1;
            continue;
        }
        const int k = std::stoi(std::string(output.substr(digits_start, i - digits_start)));
        const std::string tag = std::string(prefix) + "-" + std::to_string(k);
        const std::string open = "<" + std::string(output.substr(o + 1, i - o - 1)) + ">";
        const std::string close = "</" + std::string(output.substr(o + 1, i - o - 1)) + ">";
        const std::size_t start = i + 1;
        const auto c = output.find(close, start);
        if (c == std::string_view::npos) throw TagUnclosed(tag);
        if (output.find(open, start) < c) throw TagNested(tag);
        blocks.push_back({k, trim(output.substr(start, c - start))});
        pos = c + close.size();
    }
    if (blocks.empty()) throw NoSections(std::string(prefix));
    std::vector<int> indices;
    bool contiguous = true;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        indices.push_back(blocks[j].index);
        contiguous = contiguous && blocks[j].index == static_cast<int>(j) + 1;
    }
    if (!contiguous) throw NonContiguousIndices(indices);
    return blocks;
}

std::string render_sections(const std::vector<NumberedBlock>& blocks, std::string_view prefix) {
    std::string out;
    for (const auto& b : blocks) {
        if (!out.empty()) out += "\n\n";
        const std::string tag = std::string(prefix) + "-" + std::to_string(b.index);
        out += "<" + tag + "> " + b.text + " </" + tag + ">";
    }
    return out;
}

}  // namespace patentpipe

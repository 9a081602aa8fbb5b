#include "patentpipe/json_io.hpp"

#include <fstream>
#include <sstream>

namespace patentpipe {

void check_schema_version(const json& j, const std::string& what) {
    if (!j.is_object() || !j.contains("schema_version"))
        throw ConfigError(what + ": missing schema_version");
    if (j.at("schema_version") != kSchemaVersion)
        throw ConfigError(what + ": unsupported schema_version " + j.at("schema_version").dump());
}

json to_json(const Draft& d) {
    json qa = json::array();
    for (const auto& e : d.qa())
        qa.push_back({{"question_id", e.question_id}, {"question_text", e.question_text}, {"answer_text", e.answer_text}});
    return {{"schema_version", kSchemaVersion}, {"source_id", d.source_id()}, {"qa", qa}};
}

Draft draft_from_json(const json& j) {
    if (!j.is_object()) throw InvalidDraft("draft must be a JSON object");
    if (j.contains("schema_version")) check_schema_version(j, "draft");
    const std::string source = j.value("source_id", std::string{});
    try {
        if (j.contains("answers")) {
            const auto& a = j.at("answers");
            if (!a.is_array() || a.size() != 5)
                throw InvalidDraft("\"answers\" must list exactly five answers, got " +
                                   std::to_string(a.is_array() ? a.size() : 0));
            std::array<std::string, 5> answers;
            for (std::size_t i = 0; i < 5; ++i) answers[i] = a.at(i).get<std::string>();
            return Draft::from_answers(answers, source);
        }
        if (!j.contains("qa") || !j.at("qa").is_array()) throw InvalidDraft("draft needs a \"qa\" array");
        std::vector<DraftQA> qa;
        for (const auto& e : j.at("qa"))
            qa.push_back({e.at("question_id").get<int>(), e.value("question_text", std::string{}),
                          e.value("answer_text", std::string{})});
        return Draft::from_qa(std::move(qa), source);
    } catch (const json::exception& e) {
        throw InvalidDraft(std::string("malformed draft: ") + e.what());
    }
}

json to_json(const PGTree& w) {
    json sections = json::array();
    for (const auto& s : w.sections()) {
        json subs = json::array();
        for (const auto& n : s.subsections) subs.push_back(n.guideline_text);
        sections.push_back({{"section_index", s.section_index}, {"overview", s.overview}, {"subsections", subs}});
    }
    return {{"schema_version", kSchemaVersion}, {"sections", sections}};
}

PGTree pgtree_from_json(const json& j) {
    check_schema_version(j, "pgtree");
    std::vector<SectionPlan> plans;
    for (const auto& s : j.at("sections")) {
        SectionPlan p;
        p.section_index = s.at("section_index").get<int>();
        p.overview = s.at("overview").get<std::string>();
        int k = 1;
        for (const auto& g : s.at("subsections")) p.subsections.push_back({p.section_index, k++, g.get<std::string>()});
        plans.push_back(std::move(p));
    }
    return PGTree(std::move(plans));
}

json to_json(const ReviewVerdict& v) {
    return {{"result", std::string(to_string(v.result()))}, {"advice", v.advice()}};
}

ReviewVerdict verdict_from_json(const json& j) {
    const auto r = j.at("result").get<std::string>();
    return ReviewVerdict(r == "Pass" ? Verdict::pass : Verdict::fail, j.at("advice").get<std::string>());
}

json to_json(const SubsectionDraft& s) {
    json history = json::array();
    for (const auto& h : s.history)
        history.push_back({{"text", h.text}, {"verdict", to_json(h.verdict)}, {"no_change", h.no_change}});
    return {{"schema_version", kSchemaVersion},
            {"node", to_string(s.node)},
            {"section_index", s.node.section},
            {"subsection_index", s.node.subsection},
            {"text", s.text},
            {"rounds_used", s.rounds_used},
            {"final_verdict", to_json(s.final_verdict)},
            {"accepted_with_warning", s.accepted_with_warning},
            {"warning", s.warning},
            {"history", history}};
}

json to_json(const CallLogEntry& e, bool include_timing) {
    json j = {{"agent_role", e.agent_role},       {"model_id", e.model_id},
              {"prompt_hash", e.prompt_hash},     {"response_hash", e.response_hash},
              {"retries", e.retries},             {"parse_attempt", e.parse_attempt},
              {"cached", e.cached},               {"finish_reason", e.finish_reason}};
    if (include_timing) j["latency_ms"] = e.latency_ms;
    return j;
}

json to_json(const RunRecord& r, bool include_timing) {
    json calls = json::array();
    for (const auto& c : r.calls) calls.push_back(to_json(c, include_timing));
    return {{"model_id", r.model_id},
            {"sampling",
             {{"temperature", r.sampling.temperature},
              {"top_p", r.sampling.top_p},
              {"max_tokens", r.sampling.max_tokens}}},
            {"seed", r.seed},
            {"calls", calls}};
}

RunRecord run_record_from_json(const json& j) {
    RunRecord r;
    r.model_id = j.value("model_id", std::string{});
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        r.sampling.temperature = s.value("temperature", 0.5);
        r.sampling.top_p = s.value("top_p", 0.9);
        r.sampling.max_tokens = s.value("max_tokens", 4096);
    }
    r.seed = j.value("seed", std::uint64_t{0});
    for (const auto& c : j.value("calls", json::array())) {
        CallLogEntry e;
        e.agent_role = c.value("agent_role", std::string{});
        e.model_id = c.value("model_id", std::string{});
        e.prompt_hash = c.value("prompt_hash", std::string{});
        e.response_hash = c.value("response_hash", std::string{});
        e.latency_ms = c.value("latency_ms", 0.0);
        e.retries = c.value("retries", 0);
        e.parse_attempt = c.value("parse_attempt", 0);
        e.cached = c.value("cached", false);
        e.finish_reason = c.value("finish_reason", std::string{});
        r.calls.push_back(std::move(e));
    }
    return r;
}

json to_json(const PatentDoc& doc, bool include_timing) {
    json order = json::array();
    for (auto s : doc.section_order()) order.push_back(std::string(section_name(s)));
    json j = {{"schema_version", kSchemaVersion}, {"section_order", order}};
    for (auto s : kAllSections) j[std::string(section_name(s))] = doc.section(s);
    j["run_record"] = to_json(doc.generation_meta(), include_timing);
    return j;
}

PatentDoc patent_from_json(const json& j) {
    check_schema_version(j, "patent");
    std::vector<std::string> names;
    for (const auto& n : j.at("section_order")) names.push_back(n.get<std::string>());
    auto field = [&](Section s) { return j.at(std::string(section_name(s))).get<std::string>(); };
    return assemble_patent(field(Section::title), field(Section::abstract), field(Section::background),
                           field(Section::summary), field(Section::claims), field(Section::description),
                           parse_section_order(names),
                           j.contains("run_record") ? run_record_from_json(j.at("run_record")) : RunRecord{});
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace patentpipe

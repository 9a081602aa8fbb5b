#include "patentpipe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>

#include "parallel.hpp"
#include "patentpipe/json_io.hpp"

namespace patentpipe {

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void PipelineConfig::validate() const {
    if (max_refine_rounds < 0) throw ConfigError("max_refine_rounds must be >= 0");
    if (parallel_subsections < 1) throw ConfigError("parallel_subsections must be >= 1");
    validate_section_order(section_order);
}

json PipelineConfig::to_json() const {
    json order = json::array();
    for (auto s : section_order) order.push_back(std::string(section_name(s)));
    return {{"max_refine_rounds", max_refine_rounds},
            {"pgtree_expansion", std::string(patentpipe::to_string(pgtree_expansion))},
            {"parallel_subsections", parallel_subsections},
            {"parallel_components", parallel_components},
            {"section_order", order},
            {"seed", seed}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    if (j.is_null()) return c;
    if (!j.is_object()) throw ConfigError("pipeline config must be an object");
    try {
        c.max_refine_rounds = j.value("max_refine_rounds", c.max_refine_rounds);
        if (j.contains("pgtree_expansion"))
            c.pgtree_expansion = parse_pgtree_expansion(j.at("pgtree_expansion").get<std::string>());
        c.parallel_subsections = j.value("parallel_subsections", c.parallel_subsections);
        c.parallel_components = j.value("parallel_components", c.parallel_components);
        if (j.contains("section_order"))
            c.section_order = parse_section_order(j.at("section_order").get<std::vector<std::string>>());
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("pipeline config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    check_schema_version(j, "run config");
    RunConfig c;
    if (!j.contains("backends") || !j.at("backends").is_object() || j.at("backends").empty())
        throw ConfigError("run config needs at least one backend");
    for (const auto& [name, bj] : j.at("backends").items()) {
        json copy = bj;
        copy["name"] = name;
        c.backends.emplace(name, BackendConfig::from_json(copy, base_dir));
    }
    if (j.contains("agents")) {
        for (const auto& [name, aj] : j.at("agents").items()) {
            const auto role = parse_agent_role(name);
            auto b = default_binding(role);
            try {
                b.backend = aj.value("backend", c.backends.count("default") ? "default" : c.backends.begin()->first);
                b.model_id = aj.value("model_id", "");
                if (aj.contains("temperature")) b.sampling.temperature = aj.at("temperature").get<double>();
                if (aj.contains("top_p")) b.sampling.top_p = aj.at("top_p").get<double>();
                if (aj.contains("max_tokens")) b.sampling.max_tokens = aj.at("max_tokens").get<int>();
                b.parse_retry_max = aj.value("parse_retry_max", b.parse_retry_max);
            } catch (const json::exception& e) {
                throw ConfigError("agent " + name + ": " + e.what());
            }
            if (!c.backends.count(b.backend)) throw ConfigError("agent " + name + " uses unknown backend " + b.backend);
            c.bindings[role] = b;
        }
    }
    // Roles without a block use the "default" backend, or the only one.
    for (auto role : kAllAgentRoles) {
        if (c.bindings.count(role)) continue;
        auto b = default_binding(role);
        if (!c.backends.count(b.backend)) {
            if (c.backends.size() != 1) throw ConfigError("no backend named default and role " +
                                                          std::string(to_string(role)) + " names none");
            b.backend = c.backends.begin()->first;
        }
        c.bindings[role] = b;
    }
    c.pipeline = PipelineConfig::from_json(j.value("pipeline", json()));
    return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.parent_path());
}

json RunConfig::to_json() const {
    json out = {{"schema_version", kSchemaVersion}};
    json bj = json::object();
    for (const auto& [name, b] : backends) {
        auto one = b.to_json();
        one.erase("name");
        bj[name] = one;
    }
    out["backends"] = bj;
    json aj = json::object();
    for (const auto& [role, b] : bindings) {
        json one = {{"backend", b.backend}, {"parse_retry_max", b.parse_retry_max}};
        if (!b.model_id.empty()) one["model_id"] = b.model_id;
        if (b.sampling.temperature) one["temperature"] = *b.sampling.temperature;
        if (b.sampling.top_p) one["top_p"] = *b.sampling.top_p;
        if (b.sampling.max_tokens) one["max_tokens"] = *b.sampling.max_tokens;
        aj[std::string(patentpipe::to_string(role))] = one;
    }
    out["agents"] = aj;
    out["pipeline"] = pipeline.to_json();
    return out;
}

RunConfig RunConfig::single_backend(BackendConfig backend) {
    RunConfig c;
    backend.name = "default";
    c.backends.emplace("default", std::move(backend));
    for (auto role : kAllAgentRoles) c.bindings[role] = default_binding(role);
    return c;
}

EndpointMap RunConfig::make_endpoints() const {
    EndpointMap out;
    for (const auto& [name, b] : backends) out[name] = Endpoint{make_gateway(b), b.model_id};
    return out;
}

// ---------------------------------------------------------------------------
// Reference and RRAG
// ---------------------------------------------------------------------------

namespace {

std::size_t component_index(AgentRole r) {
    const auto it = std::find(kComponentRoles.begin(), kComponentRoles.end(), r);
    if (it == kComponentRoles.end()) throw ConfigError("not a component role: " + std::string(to_string(r)));
    return static_cast<std::size_t>(it - kComponentRoles.begin());
}

std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const TransportError*>(&e)) return "TransportError";
    if (dynamic_cast<const BadStatus*>(&e)) return "BadStatus";
    if (dynamic_cast<const MalformedVerdict*>(&e)) return "MalformedVerdict";
    if (dynamic_cast<const EmptyGeneration*>(&e)) return "EmptyGeneration";
    if (dynamic_cast<const NonContiguousIndices*>(&e)) return "NonContiguousIndices";
    if (dynamic_cast<const NoSections*>(&e)) return "NoSections";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const InvalidPlan*>(&e)) return "InvalidPlan";
    if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "Exception";
}

}  // namespace

std::string& Components::operator[](AgentRole r) { return texts[component_index(r)]; }
const std::string& Components::operator[](AgentRole r) const { return texts[component_index(r)]; }

json Components::to_json() const {
    json out = {{"schema_version", kSchemaVersion}};
    for (auto r : kComponentRoles) {
        const auto& t = (*this)[r];
        if (!t.empty()) out[std::string(patentpipe::to_string(r))] = t;
    }
    return out;
}

Reference build_reference(const Components& c, const Draft& draft) {
    for (auto r : kComponentRoles)
        if (is_blank(c[r])) throw EmptySection(std::string(to_string(r)));
    return Reference{c[AgentRole::title],   c[AgentRole::abstract], c[AgentRole::background],
                     c[AgentRole::summary], c[AgentRole::claims],   draft};
}

SubsectionDraft rrag_subsection(Agents& agents, const GuidelineNode& node, const Reference& ref, const PGTree& w,
                                const Draft& draft, int max_refine_rounds, std::vector<std::string>* warnings) {
    auto warn = [&](std::string msg) {
        if (warnings) warnings->push_back("subsection " + to_string(node.id()) + ": " + std::move(msg));
    };
    SubsectionDraft sd;
    sd.node = node.id();
    const auto r = agents.retrieve(node, ref);
    if (r.empty_retrieval) warn("retrieval returned nothing");
    std::string text = agents.write_subsection(node, r, w, draft);
    bool no_change = false;
    while (true) {
        std::optional<ReviewVerdict> v;
        try {
            v = agents.review(node, text, draft);
        } catch (const MalformedVerdict& e) {
            sd.history.push_back({text, ReviewVerdict(Verdict::fail, std::string("unparseable review: ") + e.what()),
                                  no_change});
            sd.accepted_with_warning = true;
            sd.warning = std::string("review could not be parsed; last text accepted (") + e.what() + ")";
            break;
        }
        sd.history.push_back({text, *v, no_change});
        if (v->passed()) break;
        if (sd.rounds_used >= max_refine_rounds) {
            sd.accepted_with_warning = true;
            sd.warning = "examiner still failing after " + std::to_string(max_refine_rounds) +
                         " refinements; last text accepted";
            break;
        }
        std::string revised = agents.refine(node, text, v->advice(), w);
        no_change = revised == text;
        text = std::move(revised);
        ++sd.rounds_used;
    }
    sd.text = text;
    sd.final_verdict = sd.history.back().verdict;
    if (sd.accepted_with_warning) warn(sd.warning);
    return sd;
}

std::string join_description(const std::vector<SubsectionDraft>& subsections) {
    std::string out;
    for (const auto& s : subsections) {
        if (!out.empty()) out += "\n\n";
        out += s.text;
    }
    return out;
}

std::string_view to_string(RunStatus s) { return s == RunStatus::complete ? "complete" : "partial"; }

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

using detail::fan_out;

RunResult run_pipeline(Agents& base_agents, const Draft& draft, const PipelineConfig& cfg) {
    cfg.validate();
    RunResult res;
    CallLog log;
    Agents agents = base_agents.with_log(&log);
    const auto desc_spec = agents.call_spec(AgentRole::description, "write");
    res.record.model_id = desc_spec.model_id;
    res.record.sampling = desc_spec.sampling;
    res.record.seed = cfg.seed;

    auto fail = [&](const std::exception& e) {
        res.status = RunStatus::partial;
        res.error = e.what();
        res.error_kind = error_kind(e);
    };

    try {
        // Step I. Each writer logs into its own buffer; buffers merge in role order.
        {
            std::vector<CallLog> logs(kComponentRoles.size());
            std::vector<std::exception_ptr> errors(kComponentRoles.size());
            fan_out(kComponentRoles.size(), cfg.parallel_components ? 5 : 1, [&](std::size_t k) {
                if (!cfg.parallel_components && k > 0 && errors[k - 1]) {
                    errors[k] = errors[k - 1];
                    return;
                }
                try {
                    auto a = agents.with_log(&logs[k]);
                    res.components.texts[k] = a.write_component(kComponentRoles[k], draft);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            });
            for (auto& l : logs) log.append_all(l.entries());
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        const Reference ref = build_reference(res.components, draft);

        // Step II.
        res.pgtree = agents.plan(draft, cfg.pgtree_expansion, &res.warnings);
        const PGTree& w = *res.pgtree;

        // Step III.
        const auto nodes = w.nodes();
        std::vector<std::optional<SubsectionDraft>> done(nodes.size());
        std::vector<CallLog> logs(nodes.size());
        std::vector<std::vector<std::string>> node_warnings(nodes.size());
        std::vector<std::exception_ptr> errors(nodes.size());
        std::atomic<bool> abort{false};
        fan_out(nodes.size(), cfg.parallel_subsections, [&](std::size_t k) {
            if (abort.load()) return;
            try {
                auto a = agents.with_log(&logs[k]);
                done[k] = rrag_subsection(a, nodes[k], ref, w, draft, cfg.max_refine_rounds, &node_warnings[k]);
            } catch (...) {
                errors[k] = std::current_exception();
                abort = true;
            }
        });
        std::exception_ptr first_error;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            log.append_all(logs[k].entries());
            for (auto& msg : node_warnings[k]) res.warnings.push_back(std::move(msg));
            if (done[k]) res.subsections.push_back(std::move(*done[k]));
            if (errors[k] && !first_error) first_error = errors[k];
        }
        if (first_error) std::rethrow_exception(first_error);

        res.record.calls = log.entries();
        const auto& c = res.components;
        res.patent = assemble_patent(c[AgentRole::title], c[AgentRole::abstract], c[AgentRole::background],
                                     c[AgentRole::summary], c[AgentRole::claims], join_description(res.subsections),
                                     cfg.section_order, res.record);
        res.status = RunStatus::complete;
    } catch (const std::exception& e) {
        fail(e);
    }
    res.record.calls = log.entries();
    if (base_agents.log()) base_agents.log()->append_all(res.record.calls);
    return res;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void persist_run(const RunResult& result, const Draft& draft, const json& config_snapshot,
                 const std::filesystem::path& run_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(run_dir / "subsections");
    write_json_file(run_dir / "config.json", config_snapshot);
    write_json_file(run_dir / "draft.json", to_json(draft));

    std::string calls;
    for (const auto& e : result.record.calls) calls += to_json(e).dump() + "\n";
    write_text_file(run_dir / "calls.jsonl", calls);

    write_json_file(run_dir / "components.json", result.components.to_json());
    if (result.pgtree) write_json_file(run_dir / "pgtree.json", to_json(*result.pgtree));
    for (const auto& s : result.subsections)
        write_json_file(run_dir / "subsections" /
                            ("s" + std::to_string(s.node.section) + "_" + std::to_string(s.node.subsection) + ".json"),
                        to_json(s));
    if (result.patent) {
        write_text_file(run_dir / "patent.txt", result.patent->render_text());
        write_json_file(run_dir / "patent.json", to_json(*result.patent));
    }
    std::string warnings;
    for (const auto& w : result.warnings) warnings += w + "\n";
    write_text_file(run_dir / "warnings.txt", warnings);

    json status = {{"schema_version", kSchemaVersion},
                   {"status", std::string(to_string(result.status))},
                   {"calls", result.record.calls.size()},
                   {"subsections_done", result.subsections.size()},
                   {"warnings", result.warnings.size()}};
    if (result.pgtree) status["node_count"] = result.pgtree->node_count();
    if (!result.error.empty()) {
        status["error"] = result.error;
        status["error_kind"] = result.error_kind;
    }
    write_json_file(run_dir / "status.json", status);
}

}  // namespace patentpipe

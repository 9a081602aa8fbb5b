#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "patentpipe/agents.hpp"
#include "patentpipe/core.hpp"
#include "patentpipe/gateway.hpp"

namespace patentpipe {

struct PipelineConfig {
    int max_refine_rounds = 3;
    PgtreeExpansion pgtree_expansion = PgtreeExpansion::per_section_call;
    // Subsections in flight at once. 1 keeps the traversal sequential.
    int parallel_subsections = 1;
    // Run the five component writers concurrently.
    bool parallel_components = false;
    SectionOrder section_order = default_section_order();
    std::uint64_t seed = 0;

    // Throws ConfigError.
    void validate() const;
    nlohmann::json to_json() const;
    static PipelineConfig from_json(const nlohmann::json& j);
};

/**
 * Everything a run needs besides the draft, as stored in a config file:
 *
 *   {"schema_version": 1,
 *    "backends": {"default": {"type": "openai", "endpoint": "...", "api_key_env": "OPENAI_API_KEY",
 *                             "model_id": "gpt-4o-mini", "rpm": 60}},
 *    "agents": {"examiner": {"backend": "default", "model_id": "...", "temperature": 0.2,
 *                            "top_p": 0.9, "max_tokens": 2048, "parse_retry_max": 2}},
 *    "pipeline": {"max_refine_rounds": 3, "pgtree_expansion": "per_section_call",
 *                 "parallel_subsections": 1, "section_order": ["title", ...], "seed": 0}}
 *
 * Relative paths inside backends resolve against the config file's directory.
 */
struct RunConfig {
    std::map<std::string, BackendConfig> backends;
    std::map<AgentRole, AgentBinding> bindings;
    PipelineConfig pipeline;

    static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // A config with one backend named "default" and default bindings.
    static RunConfig single_backend(BackendConfig backend);

    EndpointMap make_endpoints() const;
};

// The five short components, indexed like kComponentRoles.
struct Components {
    std::array<std::string, 5> texts;

    std::string& operator[](AgentRole r);
    const std::string& operator[](AgentRole r) const;
    nlohmann::json to_json() const;
};

// Throws EmptySection naming the first blank component.
Reference build_reference(const Components& components, const Draft& draft);

/**
 * Step III for one node: retrieve, write, then review and refine until the
 * examiner passes the text or max_refine_rounds refinements are spent. An
 * exhausted loop, or a review that never parses, accepts the last text with
 * a warning.
 */
SubsectionDraft rrag_subsection(Agents& agents, const GuidelineNode& node, const Reference& ref, const PGTree& w,
                                const Draft& draft, int max_refine_rounds, std::vector<std::string>* warnings);

// Accepted subsection texts in traversal order, joined by one blank line.
std::string join_description(const std::vector<SubsectionDraft>& subsections);

enum class RunStatus { complete, partial };
std::string_view to_string(RunStatus s);

struct RunResult {
    RunStatus status = RunStatus::partial;
    std::optional<PatentDoc> patent;
    Components components;
    std::optional<PGTree> pgtree;
    std::vector<SubsectionDraft> subsections;
    std::vector<std::string> warnings;
    RunRecord record;
    std::string error;       // empty when complete
    std::string error_kind;  // e.g. "TransportError"
};

/**
 * Draft in, patent out. Agent hard errors do not escape: they end the run
 * with status partial, and everything finished so far is kept in the result
 * for persist_run.
 * The merged call log is also appended to the agents' own log, if any.
 */
RunResult run_pipeline(Agents& agents, const Draft& draft, const PipelineConfig& cfg);

/**
 * Run directory layout:
 *   config.json            config snapshot
 *   draft.json
 *   calls.jsonl            one call-log entry per line
 *   components.json        finished short components
 *   pgtree.json            when planning finished
 *   subsections/s<i>_<j>.json
 *   patent.txt, patent.json  when complete
 *   warnings.txt
 *   status.json            status, error, counts
 */
void persist_run(const RunResult& result, const Draft& draft, const nlohmann::json& config_snapshot,
                 const std::filesystem::path& run_dir);

}  // namespace patentpipe

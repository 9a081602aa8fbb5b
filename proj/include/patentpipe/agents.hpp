#pragma once

#include <array>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "patentpipe/core.hpp"
#include "patentpipe/gateway.hpp"
#include "patentpipe/prompts.hpp"

namespace patentpipe {

// ============================================================================
// Roles and bindings
// ============================================================================

enum class AgentRole { title, abstract, background, summary, claims, description, planner, examiner };

inline constexpr std::array<AgentRole, 8> kAllAgentRoles = {
    AgentRole::title,  AgentRole::abstract,    AgentRole::background, AgentRole::summary,
    AgentRole::claims, AgentRole::description, AgentRole::planner,    AgentRole::examiner,
};
inline constexpr std::array<AgentRole, 5> kComponentRoles = {
    AgentRole::title, AgentRole::abstract, AgentRole::background, AgentRole::summary, AgentRole::claims,
};

std::string_view to_string(AgentRole r);
AgentRole parse_agent_role(std::string_view s);
bool is_component_role(AgentRole r);
// The patent section a component writer produces.
Section component_section(AgentRole r);
// Output tag of a component writer: Title, Abstract, ...
std::string component_tag(AgentRole r);

struct SamplingOverrides {
    std::optional<double> temperature;
    std::optional<double> top_p;
    std::optional<int> max_tokens;

    Sampling apply(Sampling base) const;
};

/**
 * How one role talks to a model. template_id is the role's primary
 * template; the description writer also uses retrieval and refinement,
 * the planner also uses planner_expand.
 */
struct AgentBinding {
    AgentRole role = AgentRole::title;
    TemplateId template_id = TemplateId::title_writer;
    std::string backend = "default";
    std::string model_id;  // empty: the backend's model
    SamplingOverrides sampling;
    int parse_retry_max = 2;
};

// The fixed role -> template map.
AgentBinding default_binding(AgentRole role);

// Default sampling for a role: 4096 max_tokens, 8192 for description text.
Sampling default_sampling(AgentRole role);

// A named backend: its gateway plus the model id requests go to by default.
struct Endpoint {
    std::shared_ptr<Gateway> gateway;
    std::string model_id;
};
using EndpointMap = std::map<std::string, Endpoint>;

// ============================================================================
// Calls with parse retries
// ============================================================================

struct CallSpec {
    std::string role_tag;  // agent_role in the call log
    std::string model_id;
    Sampling sampling;
    int parse_retry_max = 2;
    std::optional<std::uint64_t> seed;
};

// The prompt as one user message, plus format_reminder(attempt) when attempt > 0.
ChatRequest build_request(const CallSpec& spec, const std::string& prompt, int attempt = 0);

// Appended as an extra user message on parse retry k (k >= 1). The attempt
// number makes each retry a distinct request, so a cached bad answer is
// never replayed.
std::string format_reminder(int attempt);

/**
 * Sends prompt, hands the reply to parse, and on ParseError asks again with
 * a format reminder, up to spec.parse_retry_max extra times. Every call is
 * logged separately with its parse_attempt. The last ParseError is
 * rethrown; transport and status errors propagate at once.
 */
template <class T>
T call_with_parse(Gateway& gw, const CallSpec& spec, const std::string& prompt, CallLog* log,
                  const std::function<T(const std::string&)>& parse) {
    std::exception_ptr last;
    for (int attempt = 0; attempt <= spec.parse_retry_max; ++attempt) {
        const ChatRequest req = build_request(spec, prompt, attempt);
        const ChatResponse resp = gw.complete(req, log, attempt);
        try {
            return parse(resp.content);
        } catch (const ParseError&) {
            last = std::current_exception();
        }
    }
    std::rethrow_exception(last);
}

// ============================================================================
// Agents
// ============================================================================

// Drops one leading conversational line ("Sure, ...", "Here is ...") when
// more text follows it. Otherwise returns the trimmed input.
std::string strip_leading_filler(std::string_view text);

enum class PgtreeExpansion { off, per_section_call };
std::string_view to_string(PgtreeExpansion e);
PgtreeExpansion parse_pgtree_expansion(std::string_view s);

/**
 * The eight agent roles bound to their templates and endpoints.
 *
 * Call-log role tags: title, abstract, background, summary, claims,
 * planner, planner_expand, retrieve, write, refine, review.
 */
class Agents {
public:
    Agents(EndpointMap endpoints, std::map<AgentRole, AgentBinding> bindings = {},
           const PromptRegistry* registry = nullptr, CallLog* log = nullptr, std::optional<std::uint64_t> seed = {});

    // Same bindings, different log.
    Agents with_log(CallLog* log) const;
    CallLog* log() const noexcept { return log_; }
    const AgentBinding& binding(AgentRole role) const;
    const PromptRegistry& registry() const noexcept { return *registry_; }

    // Step I. Inner text of the role's tag, non-empty.
    std::string write_component(AgentRole role, const Draft& draft);

    // Step II, first layer: planner output parsed as Section-k blocks.
    std::vector<NumberedBlock> plan_sections(const Draft& draft);
    // Second layer for one section: Subsection-j blocks.
    std::vector<NumberedBlock> expand_section(const Draft& draft, const std::vector<NumberedBlock>& first_level,
                                              const NumberedBlock& section);
    // Both layers. Failed expansions fall back to one node and add a warning.
    PGTree plan(const Draft& draft, PgtreeExpansion expansion, std::vector<std::string>* warnings = nullptr);

    // Step III.
    RetrievedContext retrieve(const GuidelineNode& node, const Reference& ref);
    std::string write_subsection(const GuidelineNode& node, const RetrievedContext& r, const PGTree& w,
                                 const Draft& draft);
    ReviewVerdict review(const GuidelineNode& node, const std::string& text, const Draft& draft);
    std::string refine(const GuidelineNode& node, const std::string& text, const std::string& feedback,
                       const PGTree& w);

    // Endpoint and call settings a role resolves to.
    CallSpec call_spec(AgentRole role, const std::string& role_tag) const;
    Gateway& gateway_for(AgentRole role) const;

private:
    EndpointMap endpoints_;
    std::map<AgentRole, AgentBinding> bindings_;
    const PromptRegistry* registry_;
    CallLog* log_;
    std::optional<std::uint64_t> seed_;
};

/**
 * Turns the planner's first layer into a PGTree. With expansion off every
 * section is a single guideline node carrying the section text. Otherwise
 * each section gets one planner_expand call; a section whose expansion
 * cannot be parsed keeps a single node and a warning is recorded.
 */
PGTree expand_pgtree(Agents& agents, const Draft& draft, const std::vector<NumberedBlock>& first_level,
                     PgtreeExpansion expansion, std::vector<std::string>* warnings = nullptr);

}  // namespace patentpipe

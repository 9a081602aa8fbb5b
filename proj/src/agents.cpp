#include "patentpipe/agents.hpp"

#include <algorithm>
#include <cctype>

namespace patentpipe {

namespace {

constexpr std::array<std::string_view, 8> kRoleNames = {"title",  "abstract",    "background", "summary",
                                                        "claims", "description", "planner",    "examiner"};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

std::string_view to_string(AgentRole r) { return kRoleNames[static_cast<std::size_t>(r)]; }

AgentRole parse_agent_role(std::string_view s) {
    for (std::size_t i = 0; i < kRoleNames.size(); ++i)
        if (kRoleNames[i] == s) return kAllAgentRoles[i];
    throw ConfigError("unknown agent role: " + std::string(s));
}

bool is_component_role(AgentRole r) {
    return std::find(kComponentRoles.begin(), kComponentRoles.end(), r) != kComponentRoles.end();
}

Section component_section(AgentRole r) {
    switch (r) {
        case AgentRole::title: return Section::title;
        case AgentRole::abstract: return Section::abstract;
        case AgentRole::background: return Section::background;
        case AgentRole::summary: return Section::summary;
        case AgentRole::claims: return Section::claims;
        default: throw ConfigError("not a component role: " + std::string(to_string(r)));
    }
}

std::string component_tag(AgentRole r) {
    std::string name(to_string(r));
    if (!is_component_role(r)) throw ConfigError("not a component role: " + name);
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    return name;
}

Sampling SamplingOverrides::apply(Sampling base) const {
    if (temperature) base.temperature = *temperature;
    if (top_p) base.top_p = *top_p;
    if (max_tokens) base.max_tokens = *max_tokens;
    return base;
}

AgentBinding default_binding(AgentRole role) {
    AgentBinding b;
    b.role = role;
    switch (role) {
        case AgentRole::title: b.template_id = TemplateId::title_writer; break;
        case AgentRole::abstract: b.template_id = TemplateId::abstract_writer; break;
        case AgentRole::background: b.template_id = TemplateId::background_writer; break;
        case AgentRole::summary: b.template_id = TemplateId::summary_writer; break;
        case AgentRole::claims: b.template_id = TemplateId::claims_writer; break;
        case AgentRole::description: b.template_id = TemplateId::description_write; break;
        case AgentRole::planner: b.template_id = TemplateId::planner; break;
        case AgentRole::examiner: b.template_id = TemplateId::examiner_review; break;
    }
    return b;
}

Sampling default_sampling(AgentRole role) {
    Sampling s;
    if (role == AgentRole::description) s.max_tokens = 8192;
    return s;
}

std::string format_reminder(int attempt) {
    return "Format reminder (attempt " + std::to_string(attempt + 1) +
           "): the previous reply did not follow the required output format. Reply again using exactly the tags "
           "requested above.";
}

ChatRequest build_request(const CallSpec& spec, const std::string& prompt, int attempt) {
    ChatRequest req;
    req.model_id = spec.model_id;
    req.messages.push_back({Role::user, prompt});
    if (attempt > 0) req.messages.push_back({Role::user, format_reminder(attempt)});
    req.temperature = spec.sampling.temperature;
    req.top_p = spec.sampling.top_p;
    req.max_tokens = std::min(spec.sampling.max_tokens, max_tokens_limit(spec.model_id));
    req.request_tag = spec.role_tag;
    req.seed = spec.seed;
    return req;
}

std::string strip_leading_filler(std::string_view text) {
    std::string t = trim(text);
    const auto nl = t.find('\n');
    if (nl == std::string::npos) return t;
    const std::string first = lower(trim(std::string_view(t).substr(0, nl)));
    static const std::string_view kFillers[] = {"sure", "certainly", "of course", "here is",
                                                "here's", "here are", "below is"};
    const bool filler = std::any_of(std::begin(kFillers), std::end(kFillers), [&](std::string_view f) {
        if (first.rfind(f, 0) != 0) return false;
        // Whole word only: "Surely the device" is content.
        return first.size() == f.size() || !std::isalnum(static_cast<unsigned char>(first[f.size()]));
    });
    if (!filler) return t;
    std::string rest = trim(std::string_view(t).substr(nl + 1));
    return rest.empty() ? t : rest;
}

std::string_view to_string(PgtreeExpansion e) { return e == PgtreeExpansion::off ? "off" : "per_section_call"; }

PgtreeExpansion parse_pgtree_expansion(std::string_view s) {
    if (s == "off") return PgtreeExpansion::off;
    if (s == "per_section_call") return PgtreeExpansion::per_section_call;
    throw ConfigError("pgtree_expansion must be off or per_section_call, got " + std::string(s));
}

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

Agents::Agents(EndpointMap endpoints, std::map<AgentRole, AgentBinding> bindings, const PromptRegistry* registry,
               CallLog* log, std::optional<std::uint64_t> seed)
    : endpoints_(std::move(endpoints)),
      bindings_(std::move(bindings)),
      registry_(registry ? registry : &PromptRegistry::builtin()),
      log_(log),
      seed_(seed) {
    for (auto role : kAllAgentRoles) {
        auto it = bindings_.find(role);
        if (it == bindings_.end()) {
            bindings_.emplace(role, default_binding(role));
            continue;
        }
        const auto expected = default_binding(role).template_id;
        if (it->second.role != role || it->second.template_id != expected)
            throw ConfigError("role " + std::string(to_string(role)) + " must use template " +
                              std::string(template_name(expected)));
        if (it->second.parse_retry_max < 0) throw ConfigError("parse_retry_max must be >= 0");
    }
    for (const auto& [role, b] : bindings_)
        if (!endpoints_.count(b.backend))
            throw ConfigError("role " + std::string(to_string(role)) + " uses unknown backend '" + b.backend + "'");
}

Agents Agents::with_log(CallLog* log) const {
    Agents copy = *this;
    copy.log_ = log;
    return copy;
}

const AgentBinding& Agents::binding(AgentRole role) const { return bindings_.at(role); }

CallSpec Agents::call_spec(AgentRole role, const std::string& role_tag) const {
    const auto& b = binding(role);
    const auto& ep = endpoints_.at(b.backend);
    CallSpec spec;
    spec.role_tag = role_tag;
    spec.model_id = b.model_id.empty() ? ep.model_id : b.model_id;
    spec.sampling = b.sampling.apply(default_sampling(role));
    spec.parse_retry_max = b.parse_retry_max;
    spec.seed = seed_;
    return spec;
}

Gateway& Agents::gateway_for(AgentRole role) const { return *endpoints_.at(binding(role).backend).gateway; }

std::string Agents::write_component(AgentRole role, const Draft& draft) {
    const std::string tag = component_tag(role);
    const std::string role_name(to_string(role));
    const auto prompt = registry_->render(binding(role).template_id, {{"draft", render_draft(draft)}});
    return call_with_parse<std::string>(gateway_for(role), call_spec(role, role_name), prompt, log_,
                                        [&](const std::string& out) {
                                            auto text = extract_tag(out, tag);
                                            if (is_blank(text)) throw EmptyGeneration(role_name);
                                            return text;
                                        });
}

std::vector<NumberedBlock> Agents::plan_sections(const Draft& draft) {
    const auto prompt = registry_->render(TemplateId::planner, {{"draft", render_draft(draft)}});
    return call_with_parse<std::vector<NumberedBlock>>(
        gateway_for(AgentRole::planner), call_spec(AgentRole::planner, "planner"), prompt, log_,
        [](const std::string& out) {
            auto blocks = extract_sections(out, "Section");
            for (const auto& b : blocks)
                if (is_blank(b.text)) throw EmptyGeneration("planner");
            return blocks;
        });
}

std::vector<NumberedBlock> Agents::expand_section(const Draft& draft, const std::vector<NumberedBlock>& first_level,
                                                  const NumberedBlock& section) {
    const auto prompt = registry_->render(TemplateId::planner_expand, {{"draft", render_draft(draft)},
                                                                       {"pgtree", render_sections(first_level)},
                                                                       {"section_overview", section.text}});
    return call_with_parse<std::vector<NumberedBlock>>(
        gateway_for(AgentRole::planner), call_spec(AgentRole::planner, "planner_expand"), prompt, log_,
        [](const std::string& out) {
            auto blocks = extract_sections(out, "Subsection");
            for (const auto& b : blocks)
                if (is_blank(b.text)) throw EmptyGeneration("planner_expand");
            return blocks;
        });
}

PGTree Agents::plan(const Draft& draft, PgtreeExpansion expansion, std::vector<std::string>* warnings) {
    return expand_pgtree(*this, draft, plan_sections(draft), expansion, warnings);
}

PGTree expand_pgtree(Agents& agents, const Draft& draft, const std::vector<NumberedBlock>& first_level,
                     PgtreeExpansion expansion, std::vector<std::string>* warnings) {
    if (first_level.empty()) throw InvalidPlan("first level of the guideline tree is empty");
    for (std::size_t k = 0; k < first_level.size(); ++k)
        if (first_level[k].index != static_cast<int>(k) + 1)
            throw InvalidPlan("first-level sections must be numbered 1..m");

    std::vector<SectionPlan> sections;
    for (const auto& sec : first_level) {
        SectionPlan plan;
        plan.section_index = sec.index;
        plan.overview = sec.text;
        std::vector<NumberedBlock> subs;
        if (expansion == PgtreeExpansion::per_section_call) {
            try {
                subs = agents.expand_section(draft, first_level, sec);
            } catch (const ParseError& e) {
                if (warnings)
                    warnings->push_back("section " + std::to_string(sec.index) +
                                        ": expansion unparseable, kept as one subsection (" + e.what() + ")");
            }
        }
        if (subs.empty()) subs.push_back({1, sec.text});
        for (const auto& s : subs) plan.subsections.push_back({sec.index, s.index, s.text});
        sections.push_back(std::move(plan));
    }
    return PGTree(std::move(sections));
}

namespace {

// Reference parts with at least one line copied verbatim into content.
std::string source_hint_for(const std::string& content, const Reference& ref) {
    auto copied = [&](const std::string& part) {
        std::size_t start = 0;
        while (start <= part.size()) {
            auto nl = part.find('\n', start);
            const auto line = trim(std::string_view(part).substr(start, nl == std::string::npos ? std::string::npos
                                                                                               : nl - start));
            if (!line.empty() && content.find(line) != std::string::npos) return true;
            if (nl == std::string::npos) break;
            start = nl + 1;
        }
        return false;
    };
    std::string draft_text;
    for (int q = 1; q <= 5; ++q) draft_text += ref.draft.answer(q) + "\n";
    const std::pair<std::string_view, const std::string*> parts[] = {
        {"title", &ref.title},     {"abstract", &ref.abstract}, {"background", &ref.background},
        {"summary", &ref.summary}, {"claims", &ref.claims},     {"draft", &draft_text},
    };
    std::string hint;
    for (const auto& [name, text] : parts) {
        if (!copied(*text)) continue;
        if (!hint.empty()) hint += ",";
        hint += name;
    }
    return hint;
}

}  // namespace

RetrievedContext Agents::retrieve(const GuidelineNode& node, const Reference& ref) {
    ref.require_complete();
    const auto prompt =
        registry_->render(TemplateId::retrieval, {{"reference", ref.render()}, {"guideline", node.guideline_text}});
    const auto resp = gateway_for(AgentRole::description)
                          .complete(build_request(call_spec(AgentRole::description, "retrieve"), prompt), log_, 0);
    RetrievedContext ctx;
    ctx.node = node.id();
    ctx.content = trim(resp.content);
    ctx.empty_retrieval = ctx.content.empty();
    if (!ctx.empty_retrieval) ctx.source_hint = source_hint_for(ctx.content, ref);
    return ctx;
}

std::string Agents::write_subsection(const GuidelineNode& node, const RetrievedContext& r, const PGTree& w,
                                     const Draft& draft) {
    (void)draft;  // the description prompt carries the draft through the retrieved reference
    if (!w.contains(node.id())) throw InvalidPlan("node " + to_string(node.id()) + " is not in the guideline tree");
    const auto prompt = registry_->render(
        TemplateId::description_write,
        {{"retrieved", r.content}, {"pgtree", w.render()}, {"guideline", node.guideline_text}});
    return call_with_parse<std::string>(gateway_for(AgentRole::description), call_spec(AgentRole::description, "write"),
                                        prompt, log_, [](const std::string& out) {
                                            auto text = strip_leading_filler(out);
                                            if (text.empty()) throw EmptyGeneration("write");
                                            return text;
                                        });
}

ReviewVerdict Agents::review(const GuidelineNode& node, const std::string& text, const Draft& draft) {
    if (is_blank(text)) throw EmptyGeneration("review input");
    const auto prompt = registry_->render(
        TemplateId::examiner_review,
        {{"draft", render_draft(draft)}, {"guideline", node.guideline_text}, {"subsection", text}});
    return call_with_parse<ReviewVerdict>(
        gateway_for(AgentRole::examiner), call_spec(AgentRole::examiner, "review"), prompt, log_,
        [](const std::string& out) {
            std::string result, advice;
            try {
                result = lower(extract_tag(out, "Result"));
                advice = extract_tag(out, "Advice");
            } catch (const ParseError& e) {
                throw MalformedVerdict(std::string("malformed review: ") + e.what());
            }
            if (result != "pass" && result != "fail")
                throw MalformedVerdict("review result must be Pass or Fail, got '" + result + "'");
            if (is_blank(advice)) throw MalformedVerdict("review advice is empty");
            return ReviewVerdict(result == "pass" ? Verdict::pass : Verdict::fail, advice);
        });
}

std::string Agents::refine(const GuidelineNode& node, const std::string& text, const std::string& feedback,
                           const PGTree& w) {
    if (is_blank(feedback)) throw EmptyGeneration("refine feedback");
    const auto prompt = registry_->render(TemplateId::description_refine, {{"pgtree", w.render()},
                                                                           {"guideline", node.guideline_text},
                                                                           {"subsection", text},
                                                                           {"feedback", feedback}});
    return call_with_parse<std::string>(gateway_for(AgentRole::description), call_spec(AgentRole::description, "refine"),
                                        prompt, log_, [](const std::string& out) {
                                            auto revised = strip_leading_filler(out);
                                            if (revised.empty()) throw EmptyGeneration("refine");
                                            return revised;
                                        });
}

}  // namespace patentpipe

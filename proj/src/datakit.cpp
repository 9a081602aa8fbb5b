#include "patentpipe/datakit.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "patentpipe/json_io.hpp"

namespace patentpipe::datakit {

namespace {

constexpr std::array<std::string_view, 8> kRecordFields = {
    "record_id", "title", "abstract", "background", "summary", "claims", "description", "decision"};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// File-name-safe form of a record id.
std::string safe_name(std::string_view id) {
    std::string out;
    for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
    return out.empty() ? "_" : out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

const std::string& PatentRecord::field(Section s) const {
    switch (s) {
        case Section::title: return title;
        case Section::abstract: return abstract;
        case Section::background: return background;
        case Section::summary: return summary;
        case Section::claims: return claims;
        case Section::description: return description;
    }
    return description;
}

std::string PatentRecord::full_text() const {
    return "Title: " + title + "\n\nAbstract: " + abstract + "\n\nBackground: " + background +
           "\n\nSummary: " + summary + "\n\nClaims: " + claims + "\n\nDescription: " + description;
}

PatentDoc PatentRecord::to_patent(const SectionOrder& order) const {
    return assemble_patent(title, abstract, background, summary, claims, description, order);
}

FieldMapping FieldMapping::identity() {
    FieldMapping m;
    for (auto f : kRecordFields) m.fields.emplace(f, f);
    return m;
}

FieldMapping FieldMapping::hupd() {
    FieldMapping m = identity();
    m.fields["record_id"] = "patent_number";
    m.fields["description"] = "full_description";
    return m;
}

FieldMapping FieldMapping::from_json(const json& j) {
    FieldMapping m = identity();
    if (j.is_null()) return m;
    if (j.is_string()) {
        const auto preset = j.get<std::string>();
        if (preset == "hupd") return hupd();
        if (preset == "identity") return m;
        throw ConfigError("unknown field mapping preset: " + preset);
    }
    if (j.contains("preset")) m = from_json(j.at("preset"));
    m.accept_value = j.value("accept_value", m.accept_value);
    if (j.contains("fields")) {
        for (const auto& [k, v] : j.at("fields").items()) {
            if (std::find(kRecordFields.begin(), kRecordFields.end(), k) == kRecordFields.end())
                throw ConfigError("unknown record field in mapping: " + k);
            m.fields[k] = v.get<std::string>();
        }
    }
    return m;
}

json FieldMapping::to_json() const { return {{"accept_value", accept_value}, {"fields", fields}}; }

PatentRecord record_from_json(const json& j, const FieldMapping& mapping) {
    if (!j.is_object()) throw ConfigError("record is not an object");
    auto get = [&](std::string_view field) -> std::string {
        const auto& key = mapping.fields.at(std::string(field));
        if (!j.contains(key) || j.at(key).is_null()) return {};
        const auto& v = j.at(key);
        return v.is_string() ? v.get<std::string>() : v.dump();
    };
    PatentRecord r;
    r.record_id = get("record_id");
    r.title = get("title");
    r.abstract = get("abstract");
    r.background = get("background");
    r.summary = get("summary");
    r.claims = get("claims");
    r.description = get("description");
    r.decision_label = get("decision");
    return r;
}

json to_json(const PatentRecord& r) {
    return {{"record_id", r.record_id}, {"title", r.title},     {"abstract", r.abstract},
            {"background", r.background}, {"summary", r.summary}, {"claims", r.claims},
            {"description", r.description}, {"decision", r.decision_label}};
}

IngestResult ingest_records(const std::filesystem::path& dir, const FieldMapping& mapping) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("record directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && (e.path().extension() == ".json" || e.path().extension() == ".jsonl"))
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    IngestResult out;
    std::set<std::string> seen;
    auto consider = [&](const json& j, const std::string& where) {
        PatentRecord r;
        try {
            r = record_from_json(j, mapping);
        } catch (const std::exception& e) {
            out.skipped.push_back(where + ": " + e.what());
            return;
        }
        const std::string who = r.record_id.empty() ? where : r.record_id;
        if (r.record_id.empty()) return out.skipped.push_back(who + ": missing record id");
        if (r.decision_label != mapping.accept_value)
            return out.skipped.push_back(who + ": decision '" + r.decision_label + "' is not '" +
                                         mapping.accept_value + "'");
        for (auto s : kAllSections)
            if (is_blank(r.field(s)))
                return out.skipped.push_back(who + ": empty " + std::string(section_name(s)));
        if (!seen.insert(r.record_id).second) return out.skipped.push_back(who + ": duplicate record id");
        out.records.push_back(std::move(r));
    };
    for (const auto& f : files) {
        const auto name = f.filename().string();
        try {
            if (f.extension() == ".jsonl") {
                std::ifstream in(f);
                int line_no = 0;
                for (std::string line; std::getline(in, line);) {
                    ++line_no;
                    if (is_blank(line)) continue;
                    consider(json::parse(line), name + ":" + std::to_string(line_no));
                }
            } else {
                const auto j = read_json_file(f);
                if (j.is_array()) {
                    for (std::size_t k = 0; k < j.size(); ++k) consider(j[k], name + "[" + std::to_string(k) + "]");
                } else {
                    consider(j, name);
                }
            }
        } catch (const json::exception& e) {
            out.skipped.push_back(name + ": " + e.what());
        }
    }
    std::sort(out.records.begin(), out.records.end(),
              [](const PatentRecord& a, const PatentRecord& b) { return a.record_id < b.record_id; });
    return out;
}

// ---------------------------------------------------------------------------
// Dataset agents
// ---------------------------------------------------------------------------

bool QualityReport::passed() const noexcept {
    return std::all_of(questions.begin(), questions.end(),
                       [](const QuestionResult& q) { return q.result == Verdict::pass; });
}

json QualityReport::to_json() const {
    json qs = json::array();
    for (const auto& q : questions)
        qs.push_back({{"question_id", q.question_id},
                      {"result", std::string(patentpipe::to_string(q.result))},
                      {"reason", q.reason}});
    return {{"schema_version", kSchemaVersion},
            {"overall", std::string(patentpipe::to_string(passed() ? Verdict::pass : Verdict::fail))},
            {"questions", qs}};
}

TemplateId quality_template_for(int question_id, bool swap_q4_q5) {
    if (swap_q4_q5 && question_id == 4) return draft_quality_template(5);
    if (swap_q4_q5 && question_id == 5) return draft_quality_template(4);
    return draft_quality_template(question_id);
}

DataAgents::DataAgents(EndpointMap endpoints, DataAgentsConfig cfg, const PromptRegistry* registry, CallLog* log,
                       std::optional<std::uint64_t> seed)
    : endpoints_(std::move(endpoints)),
      cfg_(std::move(cfg)),
      registry_(registry ? registry : &PromptRegistry::builtin()),
      log_(log),
      seed_(seed) {
    for (const auto* p : {&cfg_.inventor, &cfg_.quality_examiner, &cfg_.pgtree_collector}) {
        if (!endpoints_.count(p->backend)) throw ConfigError("dataset role uses unknown backend '" + p->backend + "'");
        if (p->parse_retry_max < 0) throw ConfigError("parse_retry_max must be >= 0");
    }
}

DataAgents DataAgents::with_log(CallLog* log) const {
    DataAgents copy = *this;
    copy.log_ = log;
    return copy;
}

CallSpec DataAgents::spec(const RoleProfile& p, std::string tag) const {
    CallSpec s;
    s.role_tag = std::move(tag);
    s.model_id = p.model_id.empty() ? endpoints_.at(p.backend).model_id : p.model_id;
    s.sampling = p.sampling.apply(Sampling{});
    s.parse_retry_max = p.parse_retry_max;
    s.seed = seed_;
    return s;
}

Gateway& DataAgents::gateway(const RoleProfile& p) const { return *endpoints_.at(p.backend).gateway; }

Draft DataAgents::synthesize_draft(const PatentRecord& rec) {
    std::array<std::string, 5> answers;
    const std::string patent = rec.full_text();
    for (int q = 1; q <= 5; ++q) {
        const std::string tag = "inventor_q" + std::to_string(q);
        const auto prompt = registry_->render(inventor_template(q), {{"patent", patent}});
        answers[q - 1] = call_with_parse<std::string>(gateway(cfg_.inventor), spec(cfg_.inventor, tag), prompt, log_,
                                                      [&](const std::string& out) {
                                                          auto a = extract_tag(out, "Answer");
                                                          if (is_blank(a)) throw EmptyGeneration(tag);
                                                          return a;
                                                      });
    }
    return Draft::from_answers(answers, rec.record_id);
}

QualityReport DataAgents::review_draft_quality(const Draft& draft) {
    QualityReport report;
    for (int q = 1; q <= 5; ++q) {
        const std::string tag = "quality_q" + std::to_string(q);
        const auto prompt =
            registry_->render(quality_template_for(q, cfg_.swap_q4_q5_reviewers), {{"answer", draft.answer(q)}});
        QuestionResult r;
        r.question_id = q;
        try {
            r = call_with_parse<QuestionResult>(
                gateway(cfg_.quality_examiner), spec(cfg_.quality_examiner, tag), prompt, log_,
                [&](const std::string& out) {
                    QuestionResult qr;
                    qr.question_id = q;
                    const auto result = lower(extract_tag(out, "Result"));
                    if (result != "pass" && result != "fail")
                        throw MalformedVerdict("quality result must be Pass or Fail, got '" + result + "'");
                    qr.result = result == "pass" ? Verdict::pass : Verdict::fail;
                    if (qr.result == Verdict::fail) {
                        qr.reason = extract_tag(out, "Reason");
                        if (is_blank(qr.reason)) throw MalformedVerdict("Fail without a reason");
                    } else {
                        try {
                            qr.reason = extract_tag(out, "Reason");
                        } catch (const ParseError&) {
                        }
                    }
                    return qr;
                });
        } catch (const ParseError&) {
            r.result = Verdict::fail;
            r.reason = std::string(kUnparseableVerdict);
        }
        report.questions[q - 1] = r;
    }
    return report;
}

std::vector<NumberedBlock> DataAgents::collect_pgtree(const std::string& description) {
    if (is_blank(description)) throw Error("collect_pgtree needs a non-empty description");
    const auto prompt = registry_->render(TemplateId::pgtree_collect, {{"description", description}});
    return call_with_parse<std::vector<NumberedBlock>>(gateway(cfg_.pgtree_collector),
                                                       spec(cfg_.pgtree_collector, "pgtree_collect"), prompt, log_,
                                                       [](const std::string& out) {
                                                           auto blocks = extract_sections(out, "Section");
                                                           for (const auto& b : blocks)
                                                               if (is_blank(b.text))
                                                                   throw EmptyGeneration("pgtree_collect");
                                                           return blocks;
                                                       });
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

SplitSizes default_split_sizes(std::size_t n) {
    const SplitSizes full;
    if (n >= full.total()) return full;
    const std::array<std::size_t, 3> base = {full.train, full.valid, full.test};
    std::array<std::size_t, 3> out{};
    std::array<std::size_t, 3> rem{};
    std::size_t assigned = 0;
    for (int k = 0; k < 3; ++k) {
        out[k] = n * base[k] / full.total();
        rem[k] = n * base[k] % full.total();
        assigned += out[k];
    }
    // Hand the leftover units to the largest remainders; ties go to the earlier split.
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++out[order[k % 3]];
    return {out[0], out[1], out[2]};
}

json SplitManifest::to_json() const {
    return {{"schema_version", kSchemaVersion}, {"seed", seed},  {"train", train},
            {"valid", valid},                   {"test", test},  {"unassigned", unassigned}};
}

SplitManifest SplitManifest::from_json(const json& j) {
    check_schema_version(j, "split manifest");
    SplitManifest m;
    m.seed = j.value("seed", std::uint64_t{0});
    m.train = j.value("train", std::vector<std::string>{});
    m.valid = j.value("valid", std::vector<std::string>{});
    m.test = j.value("test", std::vector<std::string>{});
    m.unassigned = j.value("unassigned", std::vector<std::string>{});
    return m;
}

SplitManifest make_splits(std::vector<std::string> ids, const SplitSizes& sizes, std::uint64_t seed) {
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw ConfigError("duplicate record ids in split input");
    if (sizes.total() > ids.size())
        throw InsufficientRecords("split sizes " + std::to_string(sizes.train) + "/" + std::to_string(sizes.valid) +
                                  "/" + std::to_string(sizes.test) + " need " + std::to_string(sizes.total()) +
                                  " records, have " + std::to_string(ids.size()));
    std::mt19937_64 rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(ids[i - 1], ids[j]);
    }
    SplitManifest m;
    m.seed = seed;
    auto it = ids.begin();
    auto take = [&](std::size_t k, std::vector<std::string>& dst) {
        dst.assign(it, it + static_cast<std::ptrdiff_t>(k));
        it += static_cast<std::ptrdiff_t>(k);
    };
    take(sizes.train, m.train);
    take(sizes.valid, m.valid);
    take(sizes.test, m.test);
    m.unassigned.assign(it, ids.end());
    return m;
}

// ---------------------------------------------------------------------------
// SFT export
// ---------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {"D2T", "D2A", "D2B", "D2S", "D2C", "D2W", "D2P_full"};

}  // namespace

std::string_view to_string(SftKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

SftKind parse_sft_kind(std::string_view s) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == s) return kAllSftKinds[i];
    throw ConfigError("unknown SFT kind: " + std::string(s));
}

std::string sft_output(SftKind kind, const DatasetEntry& e) {
    const auto& r = e.record;
    std::string out;
    switch (kind) {
        case SftKind::d2t: out = r.title; break;
        case SftKind::d2a: out = r.abstract; break;
        case SftKind::d2b: out = r.background; break;
        case SftKind::d2s: out = r.summary; break;
        case SftKind::d2c: out = r.claims; break;
        case SftKind::d2w:
            if (!e.pgtree || e.pgtree->empty()) throw MissingTarget(r.record_id, std::string(to_string(kind)));
            out = render_sections(*e.pgtree);
            break;
        case SftKind::d2p_full: out = r.to_patent().render_text(); break;
    }
    if (is_blank(out)) throw MissingTarget(r.record_id, std::string(to_string(kind)));
    return out;
}

ExportCounts export_sft(SftKind kind, const SplitManifest& manifest, const std::map<std::string, DatasetEntry>& entries,
                        const std::filesystem::path& out_dir) {
    ExportCounts counts;
    const auto dir = out_dir / std::string(to_string(kind));
    std::filesystem::create_directories(dir);
    const std::pair<std::string, const std::vector<std::string>*> splits[] = {
        {"train", &manifest.train}, {"valid", &manifest.valid}, {"test", &manifest.test}};
    for (const auto& [name, ids] : splits) {
        std::string lines;
        std::size_t n = 0;
        for (const auto& id : *ids) {
            auto it = entries.find(id);
            try {
                if (it == entries.end()) throw MissingTarget(id, std::string(to_string(kind)));
                json line = {{"schema_version", kSchemaVersion},
                             {"record_id", id},
                             {"kind", std::string(to_string(kind))},
                             {"input", render_draft(it->second.draft)},
                             {"output", sft_output(kind, it->second)}};
                lines += line.dump() + "\n";
                ++n;
            } catch (const MissingTarget& e) {
                counts.missing.push_back(e.what());
            }
        }
        write_text_file(dir / (name + ".jsonl"), lines);
        counts.written[name] = n;
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Build
// ---------------------------------------------------------------------------

namespace {

RoleProfile role_from_json(const json& j, const std::string& default_backend) {
    RoleProfile p;
    p.backend = default_backend;
    if (j.is_null()) return p;
    p.backend = j.value("backend", p.backend);
    p.model_id = j.value("model_id", "");
    if (j.contains("temperature")) p.sampling.temperature = j.at("temperature").get<double>();
    if (j.contains("top_p")) p.sampling.top_p = j.at("top_p").get<double>();
    if (j.contains("max_tokens")) p.sampling.max_tokens = j.at("max_tokens").get<int>();
    p.parse_retry_max = j.value("parse_retry_max", p.parse_retry_max);
    return p;
}

json role_to_json(const RoleProfile& p) {
    json j = {{"backend", p.backend}, {"parse_retry_max", p.parse_retry_max}};
    if (!p.model_id.empty()) j["model_id"] = p.model_id;
    if (p.sampling.temperature) j["temperature"] = *p.sampling.temperature;
    if (p.sampling.top_p) j["top_p"] = *p.sampling.top_p;
    if (p.sampling.max_tokens) j["max_tokens"] = *p.sampling.max_tokens;
    return j;
}

}  // namespace

DatasetConfig DatasetConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    check_schema_version(j, "dataset config");
    DatasetConfig c;
    if (!j.contains("backends") || !j.at("backends").is_object() || j.at("backends").empty())
        throw ConfigError("dataset config needs at least one backend");
    for (const auto& [name, bj] : j.at("backends").items()) {
        json copy = bj;
        copy["name"] = name;
        c.backends.emplace(name, BackendConfig::from_json(copy, base_dir));
    }
    const std::string fallback = c.backends.count("default") ? "default" : c.backends.begin()->first;
    const json d = j.value("dataset", json::object());
    try {
        c.mapping = FieldMapping::from_json(d.value("ingest", json()));
        const json roles = d.value("roles", json::object());
        c.agents.inventor = role_from_json(roles.value("inventor", json()), fallback);
        c.agents.quality_examiner = role_from_json(roles.value("quality_examiner", json()), fallback);
        c.agents.pgtree_collector = role_from_json(roles.value("pgtree_collector", json()), fallback);
        c.agents.swap_q4_q5_reviewers = d.value("swap_q4_q5_reviewers", false);
        const json splits = d.value("splits", json::object());
        if (splits.contains("sizes")) {
            const auto s = splits.at("sizes").get<std::vector<std::size_t>>();
            if (s.size() != 3) throw ConfigError("splits.sizes must list train, valid, test");
            c.sizes = SplitSizes{s[0], s[1], s[2]};
        }
        c.seed = splits.value("seed", std::uint64_t{0});
        c.jobs = d.value("jobs", 1);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("dataset config: ") + e.what());
    }
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    for (const auto* p : {&c.agents.inventor, &c.agents.quality_examiner, &c.agents.pgtree_collector})
        if (!c.backends.count(p->backend)) throw ConfigError("dataset role uses unknown backend " + p->backend);
    return c;
}

DatasetConfig DatasetConfig::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.parent_path());
}

json DatasetConfig::to_json() const {
    json bj = json::object();
    for (const auto& [name, b] : backends) {
        auto one = b.to_json();
        one.erase("name");
        bj[name] = one;
    }
    json splits = {{"seed", seed}};
    if (sizes) splits["sizes"] = {sizes->train, sizes->valid, sizes->test};
    return {{"schema_version", kSchemaVersion},
            {"backends", bj},
            {"dataset",
             {{"ingest", mapping.to_json()},
              {"roles",
               {{"inventor", role_to_json(agents.inventor)},
                {"quality_examiner", role_to_json(agents.quality_examiner)},
                {"pgtree_collector", role_to_json(agents.pgtree_collector)}}},
              {"swap_q4_q5_reviewers", agents.swap_q4_q5_reviewers},
              {"splits", splits},
              {"jobs", jobs}}}};
}

EndpointMap DatasetConfig::make_endpoints() const {
    EndpointMap out;
    for (const auto& [name, b] : backends) out[name] = Endpoint{make_gateway(b), b.model_id};
    return out;
}

json BuildSummary::to_json() const {
    json ex = json::object();
    for (const auto& [kind, c] : exports) ex[kind] = {{"written", c.written}, {"missing", c.missing.size()}};
    return {{"schema_version", kSchemaVersion},
            {"ingested", ingested},
            {"drafted", drafted},
            {"accepted", accepted},
            {"rejected", rejected},
            {"pgtrees", pgtrees},
            {"splits",
             {{"train", manifest.train.size()},
              {"valid", manifest.valid.size()},
              {"test", manifest.test.size()},
              {"unassigned", manifest.unassigned.size()},
              {"seed", manifest.seed}}},
            {"exports", ex},
            {"calls", calls.size()}};
}

BuildSummary build_dataset(const std::filesystem::path& records_dir, const DatasetConfig& cfg,
                           const std::filesystem::path& out_dir, const EndpointMap* endpoints) {
    namespace fs = std::filesystem;
    BuildSummary sum;
    const auto ingest = ingest_records(records_dir, cfg.mapping);
    sum.ingested = ingest.records.size();
    for (const auto& s : ingest.skipped) sum.log.push_back("ingest skip " + s);

    const EndpointMap eps = endpoints ? *endpoints : cfg.make_endpoints();
    const DataAgents base(eps, cfg.agents, nullptr, nullptr, cfg.seed);

    struct Outcome {
        std::optional<Draft> draft;
        std::optional<QualityReport> report;
        std::optional<std::vector<NumberedBlock>> pgtree;
        std::vector<std::string> log;
        CallLog calls;
    };
    const auto& recs = ingest.records;
    std::vector<Outcome> outcomes(recs.size());
    detail::fan_out(recs.size(), cfg.jobs, [&](std::size_t k) {
        auto& o = outcomes[k];
        const auto& rec = recs[k];
        auto agents = base.with_log(&o.calls);
        try {
            o.draft = agents.synthesize_draft(rec);
        } catch (const std::exception& e) {
            o.log.push_back("draft skip " + rec.record_id + ": " + e.what());
            return;
        }
        try {
            o.report = agents.review_draft_quality(*o.draft);
        } catch (const std::exception& e) {
            o.log.push_back("quality skip " + rec.record_id + ": " + e.what());
            return;
        }
        if (!o.report->passed()) {
            for (const auto& q : o.report->questions)
                if (q.result == Verdict::fail)
                    o.log.push_back("rejected " + rec.record_id + " q" + std::to_string(q.question_id) + ": " +
                                    q.reason);
            return;
        }
        try {
            o.pgtree = agents.collect_pgtree(rec.description);
        } catch (const std::exception& e) {
            o.log.push_back("pgtree skip " + rec.record_id + ": " + e.what());
        }
    });

    fs::create_directories(out_dir);
    std::map<std::string, DatasetEntry> entries;
    std::vector<std::string> accepted_ids;
    std::string borderline;
    for (std::size_t k = 0; k < recs.size(); ++k) {
        auto& o = outcomes[k];
        const auto& rec = recs[k];
        const auto calls = o.calls.entries();
        sum.calls.insert(sum.calls.end(), calls.begin(), calls.end());
        for (auto& l : o.log) sum.log.push_back(std::move(l));
        if (!o.draft) continue;
        ++sum.drafted;
        write_json_file(out_dir / "drafts" / (safe_name(rec.record_id) + ".json"), to_json(*o.draft));
        if (!o.report) continue;
        sum.reports.emplace(rec.record_id, *o.report);
        write_json_file(out_dir / "quality" / (safe_name(rec.record_id) + ".json"), o.report->to_json());
        if (!o.report->passed()) {
            ++sum.rejected;
            json b = {{"schema_version", kSchemaVersion},
                      {"record_id", rec.record_id},
                      {"draft", to_json(*o.draft)},
                      {"quality", o.report->to_json()}};
            borderline += b.dump() + "\n";
            continue;
        }
        ++sum.accepted;
        accepted_ids.push_back(rec.record_id);
        if (o.pgtree) {
            ++sum.pgtrees;
            json pj = {{"schema_version", kSchemaVersion}, {"record_id", rec.record_id}, {"sections", json::array()}};
            for (const auto& b : *o.pgtree) pj["sections"].push_back({{"index", b.index}, {"text", b.text}});
            write_json_file(out_dir / "pgtrees" / (safe_name(rec.record_id) + ".json"), pj);
        }
        entries.emplace(rec.record_id, DatasetEntry{rec, *o.draft, o.pgtree});
    }
    write_text_file(out_dir / "borderline.jsonl", borderline);

    const SplitSizes sizes = cfg.sizes ? *cfg.sizes : default_split_sizes(accepted_ids.size());
    sum.manifest = make_splits(accepted_ids, sizes, cfg.seed);
    write_json_file(out_dir / "manifest.json", sum.manifest.to_json());

    for (auto kind : kAllSftKinds) {
        auto counts = export_sft(kind, sum.manifest, entries, out_dir / "sft");
        for (const auto& m : counts.missing) sum.log.push_back("export skip " + m);
        sum.exports.emplace(std::string(to_string(kind)), std::move(counts));
    }

    std::string calls;
    for (const auto& e : sum.calls) calls += patentpipe::to_json(e).dump() + "\n";
    write_text_file(out_dir / "calls.jsonl", calls);
    std::string log;
    for (const auto& l : sum.log) log += l + "\n";
    write_text_file(out_dir / "build_log.txt", log);
    write_json_file(out_dir / "summary.json", sum.to_json());
    return sum;
}

}  // namespace patentpipe::datakit

#include "patentpipe/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "patentpipe/json_io.hpp"

namespace patentpipe::bench {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Metric config
// ---------------------------------------------------------------------------

void MetricConfig::validate() const {
    if (irr_t.empty()) throw ConfigError("at least one IRR threshold is required");
    for (double t : irr_t) {
        metrics::IrrConfig c;
        c.t = t;
        c.epsilon = epsilon;
        c.cap = cap;
        c.validate();
    }
    if (threads < 1) throw ConfigError("threads must be >= 1");
}

json MetricConfig::to_json() const {
    json j = {{"schema_version", kSchemaVersion},
              {"irr_t", irr_t},
              {"epsilon", epsilon},
              {"token_counter", token_counter},
              {"stopword_list_id", metrics::StopwordList::builtin().id()}};
    j["cap"] = cap ? json(*cap) : json(nullptr);
    return j;
}

MetricConfig MetricConfig::from_json(const json& j, const fs::path& base_dir) {
    MetricConfig c;
    if (j.is_null()) return c;
    try {
        if (j.contains("schema_version")) check_schema_version(j, "metric config");
        if (j.contains("irr_t")) c.irr_t = j.at("irr_t").get<std::vector<double>>();
        c.epsilon = j.value("epsilon", c.epsilon);
        if (j.contains("cap") && !j.at("cap").is_null()) c.cap = j.at("cap").get<double>();
        c.token_counter = j.value("token_counter", c.token_counter);
        c.threads = j.value("threads", c.threads);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("metric config: ") + e.what());
    }
    if (c.token_counter.rfind("bpe:", 0) == 0 && !base_dir.empty()) {
        fs::path p = c.token_counter.substr(4);
        if (p.is_relative()) c.token_counter = "bpe:" + (base_dir / p).string();
    }
    c.validate();
    return c;
}

std::string irr_column(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", t);
    std::string s = buf;
    while (s.size() > 3 && s.back() == '0') s.pop_back();
    s.erase(std::remove(s.begin(), s.end(), '.'), s.end());
    return "irr_t" + s;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

json opt_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_opt(const json& j, const std::string& key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t w, bool right) {
    if (s.size() >= w) return s;
    return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
}

}  // namespace

Aggregate aggregate_rows(const std::vector<BenchRow>& rows, std::size_t irr_columns, double corpus_bleu) {
    Aggregate a;
    a.rows = rows.size();
    a.corpus_bleu = corpus_bleu;
    std::vector<double> irr_sum(irr_columns, 0.0);
    a.irr_count.assign(irr_columns, 0);
    for (const auto& r : rows) {
        if (r.failed) {
            ++a.failed;
            continue;
        }
        ++a.completed;
        a.bleu += r.bleu;
        a.rouge1 += r.rouge1;
        a.rouge2 += r.rouge2;
        a.rougel += r.rougel;
        a.tokens += static_cast<double>(r.tokens);
        for (std::size_t k = 0; k < irr_columns && k < r.irr.size(); ++k)
            if (r.irr[k].value) {
                irr_sum[k] += *r.irr[k].value;
                ++a.irr_count[k];
            }
    }
    if (a.completed > 0) {
        const double n = static_cast<double>(a.completed);
        a.bleu /= n;
        a.rouge1 /= n;
        a.rouge2 /= n;
        a.rougel /= n;
        a.tokens /= n;
    }
    for (std::size_t k = 0; k < irr_columns; ++k)
        a.irr.push_back(a.irr_count[k] ? std::optional<double>(irr_sum[k] / static_cast<double>(a.irr_count[k]))
                                       : std::nullopt);
    return a;
}

json BenchReport::to_json() const {
    json rows_j = json::array();
    for (const auto& r : rows) {
        json row = {{"doc_id", r.doc_id}, {"status", r.failed ? "failed" : "complete"}};
        if (r.failed) {
            row["failure"] = r.failure;
        } else {
            row["bleu"] = r.bleu;
            row["rouge1"] = r.rouge1;
            row["rouge2"] = r.rouge2;
            row["rougel"] = r.rougel;
            for (std::size_t k = 0; k < metrics.irr_t.size() && k < r.irr.size(); ++k) {
                const auto col = irr_column(metrics.irr_t[k]);
                row[col] = opt_number(r.irr[k].value);
                row[col + "_pair_sum"] = r.irr[k].pair_sum;
                row[col + "_total_pairs"] = r.irr[k].total_pairs;
            }
            row["tokens"] = r.tokens;
        }
        rows_j.push_back(row);
    }
    json agg = {{"rows", aggregate.rows},     {"completed", aggregate.completed}, {"failed", aggregate.failed},
                {"bleu", aggregate.bleu},     {"rouge1", aggregate.rouge1},       {"rouge2", aggregate.rouge2},
                {"rougel", aggregate.rougel}, {"tokens", aggregate.tokens},       {"corpus_bleu", aggregate.corpus_bleu}};
    for (std::size_t k = 0; k < metrics.irr_t.size() && k < aggregate.irr.size(); ++k) {
        const auto col = irr_column(metrics.irr_t[k]);
        agg[col] = opt_number(aggregate.irr[k]);
        agg[col + "_count"] = aggregate.irr_count[k];
    }
    return {{"schema_version", kSchemaVersion},
            {"header", header},
            {"metrics", metrics.to_json()},
            {"rows", rows_j},
            {"aggregate", agg}};
}

BenchReport BenchReport::from_json(const json& j) {
    check_schema_version(j, "bench report");
    BenchReport r;
    r.metrics = MetricConfig::from_json(j.at("metrics"));
    r.header = j.value("header", std::map<std::string, std::string>{});
    for (const auto& rj : j.at("rows")) {
        BenchRow row;
        row.doc_id = rj.at("doc_id").get<std::string>();
        row.failed = rj.value("status", "complete") == "failed";
        if (row.failed) {
            row.failure = rj.value("failure", "");
        } else {
            row.bleu = rj.at("bleu").get<double>();
            row.rouge1 = rj.at("rouge1").get<double>();
            row.rouge2 = rj.at("rouge2").get<double>();
            row.rougel = rj.at("rougel").get<double>();
            for (double t : r.metrics.irr_t) {
                const auto col = irr_column(t);
                IrrCell c;
                c.value = read_opt(rj, col);
                c.pair_sum = rj.value(col + "_pair_sum", std::uint64_t{0});
                c.total_pairs = rj.value(col + "_total_pairs", std::uint64_t{0});
                row.irr.push_back(c);
            }
            row.tokens = rj.at("tokens").get<std::size_t>();
        }
        r.rows.push_back(std::move(row));
    }
    const auto& aj = j.at("aggregate");
    r.aggregate = aggregate_rows(r.rows, r.metrics.irr_t.size(), aj.value("corpus_bleu", 0.0));
    return r;
}

std::string BenchReport::render_table() const {
    std::ostringstream out;
    for (const auto& [k, v] : header) out << "# " << k << ": " << v << "\n";
    out << "# metrics: " << metrics.to_json().dump() << "\n\n";

    std::vector<std::pair<std::string, std::size_t>> cols = {{"doc_id", 0},   {"BLEU", 8},  {"ROUGE-1", 8},
                                                             {"ROUGE-2", 8},  {"ROUGE-L", 8}};
    for (double t : metrics.irr_t) cols.push_back({"IRR(t=" + fmt("%g", t) + ")", 14});
    cols.push_back({"tokens", 9});
    cols.push_back({"status", 8});
    std::size_t id_w = 6;
    for (const auto& r : rows) id_w = std::max(id_w, r.doc_id.size());
    id_w = std::max<std::size_t>(id_w, 4);
    cols[0].second = id_w;

    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (k) out << "  ";
            out << pad(cells[k], cols[k].second, k != 0 && k + 1 != cols.size());
        }
        out << "\n";
    };
    std::vector<std::string> head;
    for (const auto& c : cols) head.push_back(c.first);
    line(head);
    std::size_t total_w = 0;
    for (const auto& c : cols) total_w += std::max(c.first.size(), c.second) + 2;
    out << std::string(total_w - 2, '-') << "\n";

    auto irr_cell = [](const std::optional<double>& v) { return v ? fmt("%.2f", *v) : std::string("n/a"); };
    for (const auto& r : rows) {
        std::vector<std::string> cells = {r.doc_id};
        if (r.failed) {
            for (std::size_t k = 1; k + 1 < cols.size(); ++k) cells.push_back("-");
            cells.push_back("failed");
        } else {
            cells.push_back(fmt("%.2f", r.bleu));
            cells.push_back(fmt("%.4f", r.rouge1));
            cells.push_back(fmt("%.4f", r.rouge2));
            cells.push_back(fmt("%.4f", r.rougel));
            for (std::size_t k = 0; k < metrics.irr_t.size(); ++k)
                cells.push_back(k < r.irr.size() ? irr_cell(r.irr[k].value) : "n/a");
            cells.push_back(std::to_string(r.tokens));
            cells.push_back("ok");
        }
        line(cells);
    }
    out << std::string(total_w - 2, '-') << "\n";
    std::vector<std::string> mean = {"mean", fmt("%.2f", aggregate.bleu), fmt("%.4f", aggregate.rouge1),
                                     fmt("%.4f", aggregate.rouge2), fmt("%.4f", aggregate.rougel)};
    for (std::size_t k = 0; k < metrics.irr_t.size(); ++k)
        mean.push_back(k < aggregate.irr.size() ? irr_cell(aggregate.irr[k]) : "n/a");
    mean.push_back(fmt("%.1f", aggregate.tokens));
    mean.push_back(std::to_string(aggregate.completed) + "/" + std::to_string(aggregate.rows));
    line(mean);
    out << "\ncompleted " << aggregate.completed << " of " << aggregate.rows << " documents, " << aggregate.failed
        << " failed; means cover completed documents only; corpus BLEU " << fmt("%.2f", aggregate.corpus_bleu)
        << "\n";
    return out.str();
}

void write_report(const BenchReport& report, const fs::path& dir) {
    write_json_file(dir / "report.json", report.to_json());
    write_text_file(dir / "report.txt", report.render_table());
}

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

BenchRow score_document(const DocPair& pair, const MetricConfig& cfg, const metrics::TokenCounter& counter) {
    BenchRow row;
    row.doc_id = pair.doc_id;
    const std::string gens[] = {pair.generated};
    const std::string refs[] = {pair.reference};
    row.bleu = metrics::bleu(gens, refs);
    row.rouge1 = metrics::rouge_f1(pair.generated, pair.reference, metrics::RougeVariant::r1);
    row.rouge2 = metrics::rouge_f1(pair.generated, pair.reference, metrics::RougeVariant::r2);
    row.rougel = metrics::rouge_f1(pair.generated, pair.reference, metrics::RougeVariant::rl);
    const auto ss = metrics::split_sentences(pair.generated);
    for (double t : cfg.irr_t) {
        IrrCell cell;
        metrics::IrrConfig ic;
        ic.t = t;
        ic.epsilon = cfg.epsilon;
        ic.cap = cfg.cap;
        if (ss.n() >= 2) {
            const auto r = metrics::irr(ss, ic);
            cell.value = r.value;
            cell.pair_sum = r.pair_sum;
            cell.total_pairs = r.total_pairs;
        }
        row.irr.push_back(cell);
    }
    row.tokens = counter.count(pair.generated);
    return row;
}

BenchReport score_pairs(const std::vector<DocPair>& pairs, const std::vector<BenchRow>& failed_rows,
                        const MetricConfig& cfg, std::map<std::string, std::string> header) {
    cfg.validate();
    const auto counter = metrics::make_token_counter(cfg.token_counter);
    BenchReport rep;
    rep.metrics = cfg;
    rep.header = std::move(header);
    rep.header["bleu"] = std::string(metrics::bleu_settings());
    rep.header["token_counter"] = counter->id();
    rep.header["stopwords"] = metrics::StopwordList::builtin().id();
    rep.header["rouge"] = "F1 over lowercase word tokens, no stopword removal";

    std::vector<BenchRow> rows(pairs.size());
    detail::fan_out(pairs.size(), static_cast<int>(cfg.threads),
                    [&](std::size_t k) { rows[k] = score_document(pairs[k], cfg, *counter); });
    double corpus = 0.0;
    if (!pairs.empty()) {
        std::vector<std::string> gens, refs;
        for (const auto& p : pairs) {
            gens.push_back(p.generated);
            refs.push_back(p.reference);
        }
        corpus = metrics::bleu(gens, refs);
    }
    rep.rows = std::move(rows);
    for (const auto& f : failed_rows) rep.rows.push_back(f);
    rep.aggregate = aggregate_rows(rep.rows, cfg.irr_t.size(), corpus);
    return rep;
}

namespace {

std::string body_of_parsed(const ParsedPatentText& p) {
    std::string out;
    for (auto s : p.order) {
        const auto& sec = p.sections[static_cast<std::size_t>(s)];
        if (!sec) continue;
        if (!out.empty()) out += "\n\n";
        out += *sec;
    }
    return out;
}

std::optional<std::string> load_document(const fs::path& path) {
    if (fs::is_directory(path)) {
        if (fs::exists(path / "patent.json")) return patent_from_json(read_json_file(path / "patent.json")).body_text();
        if (fs::exists(path / "document.txt")) return read_text_file(path / "document.txt");
        return std::nullopt;
    }
    if (path.extension() == ".json") {
        const auto j = read_json_file(path);
        if (j.contains("section_order")) return patent_from_json(j).body_text();
        std::string out;
        for (auto s : default_section_order()) {
            const auto key = std::string(section_name(s));
            if (!j.contains(key) || !j.at(key).is_string() || is_blank(j.at(key).get<std::string>())) continue;
            if (!out.empty()) out += "\n\n";
            out += j.at(key).get<std::string>();
        }
        if (out.empty()) throw ConfigError(path.string() + ": no patent sections found");
        return out;
    }
    if (path.extension() == ".txt") {
        const auto text = read_text_file(path);
        if (auto parsed = parse_patent_text(text)) return body_of_parsed(*parsed);
        return text;
    }
    return std::nullopt;
}

}  // namespace

std::map<std::string, std::string> load_documents(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("document directory not found: " + dir.string());
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto& p = e.path();
        const std::string id = e.is_directory() ? p.filename().string() : p.stem().string();
        if (id.empty() || id[0] == '.') continue;
        if (!e.is_directory() && p.extension() != ".json" && p.extension() != ".txt") continue;
        if (p.filename() == "report.json" || p.filename() == "report.txt") continue;
        auto doc = load_document(p);
        if (!doc) continue;
        if (out.count(id)) throw ConfigError("document id " + id + " appears twice in " + dir.string());
        out.emplace(id, std::move(*doc));
    }
    return out;
}

BenchReport score_dirs(const fs::path& generated_dir, const fs::path& reference_dir, const MetricConfig& cfg) {
    const auto gen = load_documents(generated_dir);
    const auto ref = load_documents(reference_dir);
    std::vector<std::string> missing_ref, missing_gen;
    for (const auto& [id, _] : gen)
        if (!ref.count(id)) missing_ref.push_back(id);
    for (const auto& [id, _] : ref)
        if (!gen.count(id)) missing_gen.push_back(id);
    if (!missing_ref.empty() || !missing_gen.empty()) throw AlignmentError(missing_ref, missing_gen);
    std::vector<DocPair> pairs;
    for (const auto& [id, text] : gen) pairs.push_back({id, text, ref.at(id)});
    return score_pairs(pairs, {}, cfg,
                       {{"generated_dir", generated_dir.string()}, {"reference_dir", reference_dir.string()}});
}

// ---------------------------------------------------------------------------
// Zero-shot baseline
// ---------------------------------------------------------------------------

namespace {

struct ZeroShotTag {
    Section section;
    std::string tag;
    std::vector<std::string> alt_close;
};

const std::vector<ZeroShotTag>& zero_shot_tags() {
    // The prompt's own format closes Summary with a lowercase tag.
    static const std::vector<ZeroShotTag> tags = {
        {Section::title, "Title", {}},
        {Section::abstract, "Abstract", {}},
        {Section::background, "Background", {}},
        {Section::summary, "Summary", {"summary"}},
        {Section::claims, "Claims", {}},
        {Section::description, "Full Description", {}},
    };
    return tags;
}

}  // namespace

bool ZeroShotResult::complete() const {
    return std::all_of(sections.begin(), sections.end(), [](const auto& s) { return s.has_value(); });
}

std::string ZeroShotResult::document_text() const {
    std::string out;
    for (auto s : default_section_order()) {
        const auto& sec = sections[static_cast<std::size_t>(s)];
        if (!sec) continue;
        if (!out.empty()) out += "\n\n";
        out += *sec;
    }
    return out.empty() ? raw : out;
}

json ZeroShotResult::parse_report() const {
    json found = json::array();
    for (auto s : kAllSections)
        if (sections[static_cast<std::size_t>(s)]) found.push_back(std::string(section_name(s)));
    return {{"schema_version", kSchemaVersion},
            {"patent_tag_found", patent_tag_found},
            {"sections_found", found},
            {"missing", missing},
            {"errors", errors},
            {"complete", complete()}};
}

ZeroShotResult parse_zero_shot(const std::string& output) {
    ZeroShotResult r;
    r.raw = output;
    std::string_view body = output;
    const auto open = body.find("<Patent>");
    if (open != std::string_view::npos) {
        r.patent_tag_found = true;
        const auto start = open + 8;
        const auto close = body.find("</Patent>", start);
        if (close == std::string_view::npos) {
            r.errors.push_back("<Patent> is not closed; parsed to end of output");
            body = body.substr(start);
        } else {
            body = body.substr(start, close - start);
        }
    } else {
        r.errors.push_back("no <Patent> block; parsed whole output");
    }
    for (const auto& t : zero_shot_tags()) {
        const auto name = std::string(section_name(t.section));
        try {
            auto text = extract_tags(body, TagSpec{t.tag, Multiplicity::exactly_one, t.alt_close}).front();
            if (is_blank(text)) {
                r.missing.push_back(name);
                r.errors.push_back(name + ": empty");
                continue;
            }
            r.sections[static_cast<std::size_t>(t.section)] = std::move(text);
        } catch (const ParseError& e) {
            r.missing.push_back(name);
            r.errors.push_back(name + ": " + e.what());
        }
    }
    return r;
}

ZeroShotResult run_zero_shot(Agents& agents, const Draft& draft) {
    const auto prompt = agents.registry().render(TemplateId::zero_shot_full, {{"draft", render_draft(draft)}});
    const auto spec = agents.call_spec(AgentRole::description, "zero_shot");
    const auto resp = agents.gateway_for(AgentRole::description).complete(build_request(spec, prompt), agents.log(), 0);
    return parse_zero_shot(resp.content);
}

void persist_zero_shot(const ZeroShotResult& result, const Draft& draft, const json& config_snapshot,
                       const std::vector<CallLogEntry>& calls, const SectionOrder& order, const fs::path& run_dir) {
    fs::create_directories(run_dir);
    write_json_file(run_dir / "config.json", config_snapshot);
    write_json_file(run_dir / "draft.json", to_json(draft));
    write_text_file(run_dir / "raw_output.txt", result.raw);
    write_json_file(run_dir / "parse_report.json", result.parse_report());
    write_text_file(run_dir / "document.txt", result.document_text());
    std::string lines;
    for (const auto& e : calls) lines += to_json(e).dump() + "\n";
    write_text_file(run_dir / "calls.jsonl", lines);
    if (result.complete()) {
        const auto& s = result.sections;
        RunRecord rec;
        rec.calls = calls;
        if (!calls.empty()) rec.model_id = calls.front().model_id;
        const auto doc = assemble_patent(*s[0], *s[1], *s[2], *s[3], *s[4], *s[5], order, rec);
        write_text_file(run_dir / "patent.txt", doc.render_text());
        write_json_file(run_dir / "patent.json", to_json(doc));
    }
}

// ---------------------------------------------------------------------------
// Bench
// ---------------------------------------------------------------------------

std::vector<BenchEntry> load_bench_manifest(const fs::path& path) {
    const auto j = read_json_file(path);
    check_schema_version(j, "bench manifest");
    std::vector<BenchEntry> out;
    std::set<std::string> seen;
    try {
        for (const auto& d : j.at("documents")) {
            BenchEntry e;
            e.doc_id = d.at("doc_id").get<std::string>();
            e.draft = d.at("draft").get<std::string>();
            e.reference = d.at("reference").get<std::string>();
            if (e.draft.is_relative()) e.draft = path.parent_path() / e.draft;
            if (e.reference.is_relative()) e.reference = path.parent_path() / e.reference;
            if (e.doc_id.empty() || e.doc_id.find('/') != std::string::npos || e.doc_id[0] == '.')
                throw ConfigError("bad doc_id '" + e.doc_id + "'");
            if (!seen.insert(e.doc_id).second) throw ConfigError("duplicate doc_id " + e.doc_id);
            out.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bench manifest: ") + e.what());
    }
    return out;
}

namespace {

BenchRow failed_row(const std::string& id, const std::string& why) {
    BenchRow r;
    r.doc_id = id;
    r.failed = true;
    r.failure = why;
    return r;
}

bool run_complete(const fs::path& run_dir) {
    try {
        if (!fs::exists(run_dir / "status.json") || !fs::exists(run_dir / "patent.json")) return false;
        return read_json_file(run_dir / "status.json").value("status", "") == "complete";
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

BenchOutcome run_bench(const std::vector<BenchEntry>& entries, const RunConfig& run_cfg, const MetricConfig& metrics_cfg,
                       const fs::path& out_dir, const BenchOptions& opts, const EndpointMap* endpoints) {
    metrics_cfg.validate();
    if (opts.jobs < 1) throw ConfigError("jobs must be >= 1");
    // Mock backends keep per-rule response cursors, so each document gets a
    // fresh set; that keeps a document's output independent of --jobs.
    bool all_mock = !run_cfg.backends.empty();
    for (const auto& [name, b] : run_cfg.backends) all_mock = all_mock && b.type == "mock";
    const EndpointMap shared = endpoints ? *endpoints : run_cfg.make_endpoints();
    const bool fresh = !endpoints && all_mock;
    const json snapshot = run_cfg.to_json();

    enum class State { skipped, executed, failed };
    struct Slot {
        State state = State::failed;
        std::string failure;
    };
    std::vector<Slot> slots(entries.size());
    detail::fan_out(entries.size(), opts.jobs, [&](std::size_t k) {
        const auto& e = entries[k];
        const auto run_dir = out_dir / "runs" / e.doc_id;
        auto& slot = slots[k];
        if (opts.resume && run_complete(run_dir)) {
            slot.state = State::skipped;
            return;
        }
        try {
            const Draft draft = draft_from_json(read_json_file(e.draft));
            Agents agents(fresh ? run_cfg.make_endpoints() : shared, run_cfg.bindings, nullptr, nullptr, run_cfg.pipeline.seed);
            const auto result = run_pipeline(agents, draft, run_cfg.pipeline);
            persist_run(result, draft, snapshot, run_dir);
            if (result.status == RunStatus::complete) {
                slot.state = State::executed;
            } else {
                slot.failure = result.error_kind + ": " + result.error;
            }
        } catch (const std::exception& ex) {
            slot.failure = ex.what();
        }
    });

    BenchOutcome outcome;
    std::vector<DocPair> pairs;
    std::vector<BenchRow> failed;
    std::vector<std::string> order;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        order.push_back(e.doc_id);
        const auto& slot = slots[k];
        if (slot.state == State::skipped) outcome.skipped.push_back(e.doc_id);
        else outcome.executed.push_back(e.doc_id);
        if (slot.state == State::failed) {
            failed.push_back(failed_row(e.doc_id, slot.failure));
            continue;
        }
        try {
            const auto gen = load_document(out_dir / "runs" / e.doc_id);
            const auto ref = load_document(e.reference);
            if (!gen) throw Error("generated patent missing");
            if (!ref) throw Error("reference unreadable: " + e.reference.string());
            pairs.push_back({e.doc_id, *gen, *ref});
        } catch (const std::exception& ex) {
            failed.push_back(failed_row(e.doc_id, ex.what()));
        }
    }

    std::map<std::string, std::string> header;
    header["seed"] = std::to_string(run_cfg.pipeline.seed);
    header["max_refine_rounds"] = std::to_string(run_cfg.pipeline.max_refine_rounds);
    header["pgtree_expansion"] = std::string(to_string(run_cfg.pipeline.pgtree_expansion));
    for (const auto& [role, b] : run_cfg.bindings) {
        const auto& backend = run_cfg.backends.at(b.backend);
        header["model." + std::string(to_string(role))] = b.model_id.empty() ? backend.model_id : b.model_id;
    }
    auto report = score_pairs(pairs, failed, metrics_cfg, header);
    // Keep manifest order regardless of which rows failed.
    std::map<std::string, std::size_t> pos;
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [&](const BenchRow& a, const BenchRow& b) { return pos[a.doc_id] < pos[b.doc_id]; });
    write_report(report, out_dir);
    outcome.report = std::move(report);
    return outcome;
}

}  // namespace patentpipe::bench

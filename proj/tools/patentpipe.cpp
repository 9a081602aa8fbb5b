// patentpipe command-line tool.
//
// Exit codes: 0 complete, 1 invalid input or configuration, 2 partial run.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "patentpipe/bench.hpp"
#include "patentpipe/datakit.hpp"
#include "patentpipe/json_io.hpp"
#include "patentpipe/pipeline.hpp"
#include "patentpipe/prompts.hpp"

namespace fs = std::filesystem;
using namespace patentpipe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitPartial = 2;

struct BackendFlags {
    std::string config;
    std::string backend;
    std::string mock_playbook;
    std::optional<std::uint64_t> seed;
};

void add_backend_flags(CLI::App* cmd, BackendFlags& f) {
    cmd->add_option("--config", f.config, "Run config file (JSON)");
    cmd->add_option("--backend", f.backend, "Send every role to this named backend");
    cmd->add_option("--mock-playbook", f.mock_playbook, "Replace all backends with a scripted mock");
    cmd->add_option("--seed", f.seed, "Seed recorded in the run and sent with requests");
}

BackendConfig mock_backend(const std::string& playbook) {
    BackendConfig b;
    b.type = "mock";
    b.model_id = "mock";
    b.playbook = playbook;
    b.retry_max = 0;
    b.backoff_base_ms = 0;
    return b;
}

RunConfig load_run_config(const BackendFlags& f) {
    RunConfig cfg;
    if (!f.config.empty()) {
        cfg = RunConfig::load(f.config);
    } else if (!f.mock_playbook.empty()) {
        cfg = RunConfig::single_backend(mock_backend(f.mock_playbook));
    } else {
        throw ConfigError("either --config or --mock-playbook is required");
    }
    if (!f.mock_playbook.empty() && !f.config.empty()) {
        for (auto& [name, b] : cfg.backends) {
            auto m = mock_backend(f.mock_playbook);
            m.name = name;
            b = m;
        }
    }
    if (!f.backend.empty()) {
        if (!cfg.backends.count(f.backend)) throw ConfigError("no backend named " + f.backend + " in config");
        for (auto& [role, b] : cfg.bindings) b.backend = f.backend;
    }
    if (f.seed) cfg.pipeline.seed = *f.seed;
    return cfg;
}

Draft load_draft(const std::string& path) { return draft_from_json(read_json_file(path)); }

struct MetricFlags {
    std::string metric_config;
    std::vector<double> t;
    std::optional<double> epsilon;
    std::optional<double> cap;
    std::string token_counter;
};

void add_metric_flags(CLI::App* cmd, MetricFlags& f) {
    cmd->add_option("--metric-config", f.metric_config, "Metric config file (JSON)");
    cmd->add_option("--t", f.t, "IRR thresholds, repeatable (default 0.2 0.4)");
    cmd->add_option("--epsilon", f.epsilon, "IRR smoothing term (default 1e-6)");
    cmd->add_option("--cap", f.cap, "Cap reported IRR values");
    cmd->add_option("--token-counter", f.token_counter, "whitespace or bpe:<vocab file>");
}

bench::MetricConfig load_metric_config(const MetricFlags& f) {
    bench::MetricConfig c;
    if (!f.metric_config.empty())
        c = bench::MetricConfig::from_json(read_json_file(f.metric_config), fs::path(f.metric_config).parent_path());
    if (!f.t.empty()) c.irr_t = f.t;
    if (f.epsilon) c.epsilon = *f.epsilon;
    if (f.cap) c.cap = *f.cap;
    if (!f.token_counter.empty()) c.token_counter = f.token_counter;
    c.validate();
    return c;
}

int cmd_generate(const std::string& draft_path, const BackendFlags& bf, const fs::path& out) {
    const auto cfg = load_run_config(bf);
    const auto draft = load_draft(draft_path);
    Agents agents(cfg.make_endpoints(), cfg.bindings, nullptr, nullptr, cfg.pipeline.seed);
    const auto result = run_pipeline(agents, draft, cfg.pipeline);
    persist_run(result, draft, cfg.to_json(), out);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (result.status != RunStatus::complete) {
        std::cerr << "partial run (" << result.error_kind << "): " << result.error << "\n"
                  << "artifacts kept in " << out.string() << "\n";
        return kExitPartial;
    }
    std::cout << "complete: " << out.string() << " (" << result.record.calls.size() << " calls, "
              << result.subsections.size() << " subsections)\n";
    return kExitOk;
}

int cmd_baseline(const std::string& draft_path, const BackendFlags& bf, const fs::path& out) {
    const auto cfg = load_run_config(bf);
    const auto draft = load_draft(draft_path);
    CallLog log;
    Agents agents(cfg.make_endpoints(), cfg.bindings, nullptr, &log, cfg.pipeline.seed);
    const auto result = bench::run_zero_shot(agents, draft);
    bench::persist_zero_shot(result, draft, cfg.to_json(), log.entries(), cfg.pipeline.section_order, out);
    if (!result.complete()) {
        std::cerr << "baseline output incomplete; missing:";
        for (const auto& m : result.missing) std::cerr << " " << m;
        std::cerr << "\n";
        return kExitPartial;
    }
    std::cout << "complete: " << out.string() << "\n";
    return kExitOk;
}

int cmd_build_dataset(const fs::path& records, const BackendFlags& bf, const std::string& mapping, int jobs,
                      const fs::path& out) {
    datakit::DatasetConfig cfg;
    if (!bf.config.empty()) {
        cfg = datakit::DatasetConfig::load(bf.config);
    } else if (!bf.mock_playbook.empty()) {
        cfg = datakit::DatasetConfig::from_json(
            {{"schema_version", kSchemaVersion}, {"backends", {{"default", mock_backend(bf.mock_playbook).to_json()}}}});
    } else {
        throw ConfigError("either --config or --mock-playbook is required");
    }
    if (!bf.mock_playbook.empty() && !bf.config.empty())
        for (auto& [name, b] : cfg.backends) b = mock_backend(bf.mock_playbook), b.name = name;
    if (!bf.backend.empty()) {
        if (!cfg.backends.count(bf.backend)) throw ConfigError("no backend named " + bf.backend + " in config");
        cfg.agents.inventor.backend = cfg.agents.quality_examiner.backend = cfg.agents.pgtree_collector.backend =
            bf.backend;
    }
    if (!mapping.empty()) cfg.mapping = datakit::FieldMapping::from_json(json(mapping));
    if (bf.seed) cfg.seed = *bf.seed;
    if (jobs > 0) cfg.jobs = jobs;
    const auto sum = datakit::build_dataset(records, cfg, out);
    std::cout << "ingested " << sum.ingested << ", drafted " << sum.drafted << ", accepted " << sum.accepted
              << ", rejected " << sum.rejected << ", guideline trees " << sum.pgtrees << "\n"
              << "splits train/valid/test: " << sum.manifest.train.size() << "/" << sum.manifest.valid.size() << "/"
              << sum.manifest.test.size() << " (seed " << sum.manifest.seed << ")\n";
    return kExitOk;
}

int cmd_score(const fs::path& gen, const fs::path& ref, const MetricFlags& mf, const std::string& out) {
    const auto report = bench::score_dirs(gen, ref, load_metric_config(mf));
    if (!out.empty()) bench::write_report(report, out);
    std::cout << report.render_table();
    return kExitOk;
}

int cmd_bench(const fs::path& manifest, const BackendFlags& bf, const MetricFlags& mf, int jobs, bool resume,
              const fs::path& out) {
    const auto cfg = load_run_config(bf);
    const auto metrics = load_metric_config(mf);
    const auto entries = bench::load_bench_manifest(manifest);
    bench::BenchOptions opts;
    opts.jobs = std::max(1, jobs);
    opts.resume = resume;
    const auto outcome = bench::run_bench(entries, cfg, metrics, out, opts);
    std::cout << outcome.report.render_table();
    std::cout << "executed " << outcome.executed.size() << ", reused " << outcome.skipped.size() << "\n";
    return outcome.report.aggregate.failed == 0 ? kExitOk : kExitPartial;
}

int cmd_report(const fs::path& path) {
    const auto report = bench::BenchReport::from_json(read_json_file(path));
    std::cout << report.render_table();
    return kExitOk;
}

int cmd_prompts(const std::string& action, const std::string& arg, bool allow_modified) {
    const auto& reg = PromptRegistry::builtin();
    if (action == "list") {
        for (auto id : all_template_ids()) {
            const auto& t = reg.get(id);
            std::cout << template_name(id) << "  slots:";
            for (const auto& s : t.required_slots) std::cout << " " << s;
            std::cout << "  sha256:" << t.content_hash().substr(0, 12) << "\n";
        }
        return kExitOk;
    }
    if (action == "show") {
        std::cout << reg.get(parse_template_id(arg)).body << "\n";
        return kExitOk;
    }
    if (action == "export") {
        if (arg.empty()) throw ConfigError("prompts export needs a directory");
        reg.write_assets(arg);
        std::cout << "wrote " << all_template_ids().size() << " templates to " << arg << "\n";
        return kExitOk;
    }
    if (action == "verify") {
        if (arg.empty()) throw ConfigError("prompts verify needs a directory");
        PromptRegistry::load_assets(arg, allow_modified);
        std::cout << "ok: " << arg << "\n";
        return kExitOk;
    }
    throw ConfigError("unknown prompts action: " + action + " (list, show, export, verify)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"patentpipe: draft-to-patent generation, dataset building and evaluation"};
    app.require_subcommand(1);

    BackendFlags bf;
    MetricFlags mf;
    std::string draft, out, records, mapping, generated, reference, manifest, report, action, arg;
    int jobs = 0;
    bool resume = false, allow_modified = false;

    auto* gen = app.add_subcommand("generate", "Run the full pipeline on one draft");
    gen->add_option("--draft", draft, "Draft file (JSON)")->required();
    gen->add_option("--out", out, "Run directory")->required();
    add_backend_flags(gen, bf);

    auto* base = app.add_subcommand("baseline", "Single zero-shot call for comparison");
    base->add_option("--draft", draft, "Draft file (JSON)")->required();
    base->add_option("--out", out, "Run directory")->required();
    add_backend_flags(base, bf);

    auto* ds = app.add_subcommand("build-dataset", "Draft, gate, split and export a record corpus");
    ds->add_option("--records", records, "Directory of patent records")->required();
    ds->add_option("--out", out, "Output directory")->required();
    ds->add_option("--mapping", mapping, "Field mapping preset: identity or hupd");
    ds->add_option("--jobs", jobs, "Records processed concurrently");
    add_backend_flags(ds, bf);

    auto* sc = app.add_subcommand("score", "Score generated documents against references");
    sc->add_option("--generated", generated, "Generated documents")->required();
    sc->add_option("--reference", reference, "Reference documents")->required();
    sc->add_option("--out", out, "Write report.json and report.txt here");
    add_metric_flags(sc, mf);

    auto* bn = app.add_subcommand("bench", "Generate and score a test set");
    bn->add_option("--manifest", manifest, "Test-set manifest")->required();
    bn->add_option("--out", out, "Bench directory")->required();
    bn->add_option("--jobs", jobs, "Documents run concurrently");
    bn->add_flag("--resume", resume, "Reuse completed runs in --out");
    add_backend_flags(bn, bf);
    add_metric_flags(bn, mf);

    auto* rp = app.add_subcommand("report", "Print a saved report as a table");
    rp->add_option("report", report, "report.json")->required();

    auto* pr = app.add_subcommand("prompts", "List, show, export or verify prompt templates");
    pr->add_option("action", action, "list | show | export | verify")->required();
    pr->add_option("arg", arg, "Template name or directory");
    pr->add_flag("--allow-modified", allow_modified, "Accept edited prompt assets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*gen) return cmd_generate(draft, bf, out);
        if (*base) return cmd_baseline(draft, bf, out);
        if (*ds) return cmd_build_dataset(records, bf, mapping, jobs, out);
        if (*sc) return cmd_score(generated, reference, mf, out);
        if (*bn) return cmd_bench(manifest, bf, mf, jobs, resume, out);
        if (*rp) return cmd_report(report);
        if (*pr) return cmd_prompts(action, arg, allow_modified);
    } catch (const AlignmentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const TransportError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}

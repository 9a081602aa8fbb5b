// Python module. Structured results cross the boundary as JSON text; the
// package's __init__ decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "patentpipe/bench.hpp"
#include "patentpipe/datakit.hpp"
#include "patentpipe/json_io.hpp"
#include "patentpipe/metrics.hpp"
#include "patentpipe/pipeline.hpp"
#include "patentpipe/prompts.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace patentpipe;
using nlohmann::json;

namespace {

BackendConfig mock_backend(const std::string& playbook) {
    BackendConfig b;
    b.type = "mock";
    b.model_id = "mock";
    b.playbook = playbook;
    b.retry_max = 0;
    b.backoff_base_ms = 0;
    return b;
}

void require_source(const std::string& config_path, const std::string& mock_playbook) {
    if (config_path.empty() && mock_playbook.empty())
        throw ConfigError("either a config file or a mock playbook is required");
}

// Same rules as the CLI: a playbook alone gives a one-backend mock config; a
// playbook next to a config replaces every backend in it.
RunConfig run_config(const std::string& config_path, const std::string& mock_playbook) {
    require_source(config_path, mock_playbook);
    if (config_path.empty()) return RunConfig::single_backend(mock_backend(mock_playbook));
    auto cfg = RunConfig::load(config_path);
    if (!mock_playbook.empty())
        for (auto& [name, b] : cfg.backends) b = mock_backend(mock_playbook), b.name = name;
    return cfg;
}

std::string generate(const std::string& draft_path, const std::string& config_path, const std::string& mock_playbook,
                     const std::optional<fs::path>& out_dir) {
    const auto cfg = run_config(config_path, mock_playbook);
    const auto draft = draft_from_json(read_json_file(draft_path));
    RunResult r;
    {
        py::gil_scoped_release release;
        Agents agents(cfg.make_endpoints(), cfg.bindings, nullptr, nullptr, cfg.pipeline.seed);
        r = run_pipeline(agents, draft, cfg.pipeline);
        if (out_dir) persist_run(r, draft, cfg.to_json(), *out_dir);
    }
    json j = {{"status", to_string(r.status)}, {"warnings", r.warnings}, {"error", r.error},
              {"error_kind", r.error_kind}, {"calls", r.record.calls.size()}};
    j["patent"] = r.patent ? to_json(*r.patent, false) : json(nullptr);
    j["text"] = r.patent ? r.patent->render_text() : "";
    return j.dump();
}

std::string irr_text(const std::string& text, double t, double epsilon, std::optional<double> cap) {
    metrics::IrrConfig cfg;
    cfg.t = t;
    cfg.epsilon = epsilon;
    cfg.cap = cap;
    cfg.validate();
    const auto r = metrics::irr(metrics::split_sentences(text), cfg);
    return json({{"value", r.value},
                 {"raw_value", r.raw_value},
                 {"pair_sum", r.pair_sum},
                 {"total_pairs", r.total_pairs},
                 {"n", r.n},
                 {"capped", r.capped}})
        .dump();
}

metrics::RougeVariant rouge_variant(const std::string& v) {
    if (v == "1" || v == "rouge1") return metrics::RougeVariant::r1;
    if (v == "2" || v == "rouge2") return metrics::RougeVariant::r2;
    if (v == "l" || v == "L" || v == "rougeL") return metrics::RougeVariant::rl;
    throw ConfigError("unknown ROUGE variant: " + v);
}

std::string score(const fs::path& generated, const fs::path& reference, const std::vector<double>& t,
                  const std::optional<fs::path>& out_dir) {
    bench::MetricConfig cfg;
    if (!t.empty()) cfg.irr_t = t;
    cfg.validate();
    const auto report = bench::score_dirs(generated, reference, cfg);
    if (out_dir) bench::write_report(report, *out_dir);
    return report.to_json().dump();
}

std::string split(const std::vector<std::string>& ids, std::size_t train, std::size_t valid, std::size_t test,
                  std::uint64_t seed) {
    return datakit::make_splits(ids, {train, valid, test}, seed).to_json().dump();
}

std::string build_dataset(const fs::path& records, const std::string& config_path, const std::string& mock_playbook,
                          const fs::path& out_dir, int jobs) {
    require_source(config_path, mock_playbook);
    auto cfg = config_path.empty() ? datakit::DatasetConfig::from_json(
                                         {{"schema_version", kSchemaVersion},
                                          {"backends", {{"default", mock_backend(mock_playbook).to_json()}}}})
                                   : datakit::DatasetConfig::load(config_path);
    if (!mock_playbook.empty())
        for (auto& [name, b] : cfg.backends) b = mock_backend(mock_playbook), b.name = name;
    if (jobs > 0) cfg.jobs = jobs;
    py::gil_scoped_release release;
    return datakit::build_dataset(records, cfg, out_dir).to_json().dump();
}

std::vector<std::string> template_names() {
    std::vector<std::string> out;
    for (auto id : all_template_ids()) out.emplace_back(template_name(id));
    return out;
}

}  // namespace

PYBIND11_MODULE(_patentpipe, m) {
    m.doc() = "Draft-to-patent generation, dataset building and evaluation";

    py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<ParseError>(m, "ParseError");
    py::register_exception<AlignmentError>(m, "AlignmentError");

    m.def("_generate", &generate, py::arg("draft"), py::arg("config") = "", py::arg("mock_playbook") = "",
          py::arg("out_dir") = std::nullopt);
    m.def("_irr", &irr_text, py::arg("text"), py::arg("t") = 0.2, py::arg("epsilon") = 1e-6,
          py::arg("cap") = std::nullopt);
    m.def(
        "rouge",
        [](const std::string& c, const std::string& r, const std::string& v) {
            return metrics::rouge_f1(c, r, rouge_variant(v));
        },
        py::arg("candidate"), py::arg("reference"), py::arg("variant") = "1");
    m.def(
        "bleu",
        [](const std::vector<std::string>& c, const std::vector<std::string>& r) { return metrics::bleu(c, r); },
        py::arg("candidates"), py::arg("references"));
    m.def(
        "split_sentences", [](const std::string& text) { return metrics::split_sentences(text).sentences; },
        py::arg("text"));
    m.def("_score", &score, py::arg("generated"), py::arg("reference"), py::arg("t") = std::vector<double>{},
          py::arg("out_dir") = std::nullopt);
    m.def("_split", &split, py::arg("ids"), py::arg("train"), py::arg("valid"), py::arg("test"), py::arg("seed"));
    m.def(
        "default_split_sizes",
        [](std::size_t n) {
            const auto s = datakit::default_split_sizes(n);
            return std::make_tuple(s.train, s.valid, s.test);
        },
        py::arg("n"));
    m.def("_build_dataset", &build_dataset, py::arg("records"), py::arg("config") = "", py::arg("mock_playbook") = "",
          py::arg("out_dir"), py::arg("jobs") = 0);
    m.def("template_names", &template_names);
    m.def(
        "render_prompt",
        [](const std::string& name, const Bindings& slots) {
            return PromptRegistry::builtin().render(parse_template_id(name), slots);
        },
        py::arg("name"), py::arg("slots"));
    m.def(
        "extract_tag", [](const std::string& text, const std::string& tag) { return extract_tag(text, tag); },
        py::arg("text"), py::arg("tag"));
}

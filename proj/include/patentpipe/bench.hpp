#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "patentpipe/agents.hpp"
#include "patentpipe/metrics.hpp"
#include "patentpipe/pipeline.hpp"

namespace patentpipe::bench {

// ============================================================================
// Metric configuration and reports
// ============================================================================

struct MetricConfig {
    std::vector<double> irr_t = {0.2, 0.4};
    double epsilon = 1e-6;
    std::optional<double> cap;
    // "whitespace" or "bpe:<vocab path>"
    std::string token_counter = "whitespace";
    unsigned threads = 1;

    void validate() const;
    nlohmann::json to_json() const;
    static MetricConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
};

// Column name for an IRR threshold: 0.2 -> "irr_t02", 0.45 -> "irr_t045".
std::string irr_column(double t);

struct IrrCell {
    std::optional<double> value;  // empty when the document has < 2 sentences
    std::uint64_t pair_sum = 0;
    std::uint64_t total_pairs = 0;
};

struct BenchRow {
    std::string doc_id;
    bool failed = false;
    std::string failure;
    double bleu = 0.0;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougel = 0.0;
    std::vector<IrrCell> irr;  // aligned with MetricConfig::irr_t
    std::size_t tokens = 0;
};

struct Aggregate {
    std::size_t rows = 0;
    std::size_t completed = 0;
    std::size_t failed = 0;
    double bleu = 0.0;
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougel = 0.0;
    std::vector<std::optional<double>> irr;  // mean over documents where IRR is defined
    std::vector<std::size_t> irr_count;
    double tokens = 0.0;
    double corpus_bleu = 0.0;  // corpus-level BLEU over completed documents
};

/**
 * Per-document metric rows plus arithmetic means over completed rows.
 * The header carries every setting the numbers depend on.
 */
struct BenchReport {
    MetricConfig metrics;
    std::map<std::string, std::string> header;  // model ids, seed, counter, BLEU settings...
    std::vector<BenchRow> rows;
    Aggregate aggregate;

    nlohmann::json to_json() const;
    static BenchReport from_json(const nlohmann::json& j);
    // Fixed-width table with the header block on top.
    std::string render_table() const;
};

// Recomputes aggregate from rows.
Aggregate aggregate_rows(const std::vector<BenchRow>& rows, std::size_t irr_columns, double corpus_bleu);

// Writes report.json and report.txt into dir.
void write_report(const BenchReport& report, const std::filesystem::path& dir);

// ============================================================================
// Scoring
// ============================================================================

struct DocPair {
    std::string doc_id;
    std::string generated;
    std::string reference;
};

BenchRow score_document(const DocPair& pair, const MetricConfig& cfg, const metrics::TokenCounter& counter);

// Rows in input order; failed rows pass through untouched.
BenchReport score_pairs(const std::vector<DocPair>& pairs, const std::vector<BenchRow>& failed_rows,
                        const MetricConfig& cfg, std::map<std::string, std::string> header = {});

/**
 * The scoreable text of every document in dir, by doc_id:
 *   <id>/patent.json or <id>/document.txt   run directories
 *   <id>.json                               patent record (or record-shaped JSON)
 *   <id>.txt                                plain text, or the patent text format
 * Section bodies are joined by blank lines.
 */
std::map<std::string, std::string> load_documents(const std::filesystem::path& dir);

// Throws AlignmentError when either side lacks ids the other has.
BenchReport score_dirs(const std::filesystem::path& generated_dir, const std::filesystem::path& reference_dir,
                       const MetricConfig& cfg);

// ============================================================================
// Zero-shot baseline
// ============================================================================

struct ZeroShotResult {
    std::string raw;
    // Indexed like kAllSections: title, abstract, background, summary, claims, description.
    std::array<std::optional<std::string>, 6> sections;
    std::vector<std::string> missing;
    std::vector<std::string> errors;
    bool patent_tag_found = false;

    bool complete() const;
    // Found sections joined by blank lines in the default order; raw text when none.
    std::string document_text() const;
    nlohmann::json parse_report() const;
};

// Reads the <Patent> block format the zero-shot prompt asks for.
ZeroShotResult parse_zero_shot(const std::string& output);

// One zero_shot_full call through the description writer's endpoint.
ZeroShotResult run_zero_shot(Agents& agents, const Draft& draft);

/**
 * Run directory: config.json, draft.json, raw_output.txt, parse_report.json,
 * document.txt, calls.jsonl, and patent.txt/patent.json when all six
 * sections were found.
 */
void persist_zero_shot(const ZeroShotResult& result, const Draft& draft, const nlohmann::json& config_snapshot,
                       const std::vector<CallLogEntry>& calls, const SectionOrder& order,
                       const std::filesystem::path& run_dir);

// ============================================================================
// Bench
// ============================================================================

/**
 * Test-set manifest:
 *   {"schema_version": 1,
 *    "documents": [{"doc_id": "d1", "draft": "drafts/d1.json", "reference": "refs/d1.json"}]}
 * Paths are relative to the manifest. References use any load_documents form.
 */
struct BenchEntry {
    std::string doc_id;
    std::filesystem::path draft;
    std::filesystem::path reference;
};

std::vector<BenchEntry> load_bench_manifest(const std::filesystem::path& path);

struct BenchOptions {
    int jobs = 1;
    bool resume = false;
};

struct BenchOutcome {
    BenchReport report;
    std::vector<std::string> executed;  // doc ids run in this invocation
    std::vector<std::string> skipped;   // doc ids reused from a completed run
};

/**
 * Runs the pipeline on every draft into <out_dir>/runs/<doc_id>, then scores
 * completed documents against their references and writes the report to
 * out_dir. With resume, documents whose run directory already holds a
 * complete status are not run again. A failing document becomes a failed
 * row; the bench continues.
 */
BenchOutcome run_bench(const std::vector<BenchEntry>& entries, const RunConfig& run_cfg, const MetricConfig& metrics,
                       const std::filesystem::path& out_dir, const BenchOptions& opts,
                       const EndpointMap* endpoints = nullptr);

}  // namespace patentpipe::bench

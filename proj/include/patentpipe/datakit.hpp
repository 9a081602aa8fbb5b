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
#include "patentpipe/core.hpp"
#include "patentpipe/gateway.hpp"

namespace patentpipe::datakit {

// ============================================================================
// Records
// ============================================================================

struct PatentRecord {
    std::string record_id;
    std::string title;
    std::string abstract;
    std::string background;
    std::string summary;
    std::string claims;
    std::string description;
    std::string decision_label;

    const std::string& field(Section s) const;
    // All six sections with labels; what the simulated inventor reads.
    std::string full_text() const;
    // The six sections as a PatentDoc in the given order.
    PatentDoc to_patent(const SectionOrder& order = default_section_order()) const;
};

/**
 * Where each PatentRecord field lives in an input record. Keys are the
 * record field names (record_id, title, abstract, background, summary,
 * claims, description, decision); values are keys in the source JSON.
 * Config form: {"accept_value": "ACCEPTED", "fields": {"description": "full_description", ...}}.
 */
struct FieldMapping {
    std::map<std::string, std::string> fields;
    std::string accept_value = "ACCEPTED";

    // Identity mapping on the record field names.
    static FieldMapping identity();
    // Keys used by USPTO-derived corpora: patent_number, full_description, decision, ...
    static FieldMapping hupd();
    static FieldMapping from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct IngestResult {
    std::vector<PatentRecord> records;   // sorted by record_id
    std::vector<std::string> skipped;    // "<id or file>: reason"
};

// Reads *.json (one object or an array of objects) and *.jsonl files in dir,
// in file-name order. Keeps records whose decision equals accept_value and
// whose six text fields are non-empty. Duplicate ids are skipped.
IngestResult ingest_records(const std::filesystem::path& dir, const FieldMapping& mapping);
PatentRecord record_from_json(const nlohmann::json& j, const FieldMapping& mapping);
nlohmann::json to_json(const PatentRecord& r);

// ============================================================================
// Dataset agents
// ============================================================================

struct QuestionResult {
    int question_id = 0;
    Verdict result = Verdict::fail;
    std::string reason;  // non-empty when Fail
};

struct QualityReport {
    std::array<QuestionResult, 5> questions;

    bool passed() const noexcept;
    nlohmann::json to_json() const;
};

inline constexpr std::string_view kUnparseableVerdict = "unparseable verdict";

struct RoleProfile {
    std::string backend = "default";
    std::string model_id;  // empty: the backend's model
    SamplingOverrides sampling;
    int parse_retry_max = 2;
};

struct DataAgentsConfig {
    RoleProfile inventor;
    RoleProfile quality_examiner;
    RoleProfile pgtree_collector;
    // false: answer k is reviewed with the k-th review prompt as published.
    // true: answers 4 and 5 trade review prompts, so the drawings check
    // lands on the figure answer.
    bool swap_q4_q5_reviewers = false;
};

// Review template applied to the answer of question_id.
TemplateId quality_template_for(int question_id, bool swap_q4_q5);

/**
 * The three dataset roles. Call-log tags: inventor_q<k>, quality_q<k>,
 * pgtree_collect.
 */
class DataAgents {
public:
    DataAgents(EndpointMap endpoints, DataAgentsConfig cfg, const PromptRegistry* registry = nullptr,
               CallLog* log = nullptr, std::optional<std::uint64_t> seed = {});

    DataAgents with_log(CallLog* log) const;

    // Five inventor calls, each reading the full record and one question.
    // Throws ParseError (EmptyGeneration for a blank answer) or transport errors.
    Draft synthesize_draft(const PatentRecord& rec);

    // One review call per question. A verdict that never parses counts as
    // Fail with reason kUnparseableVerdict.
    QualityReport review_draft_quality(const Draft& draft);

    // First-level guideline sections summarized from a description.
    // Throws Error for a blank description, ParseError after retries.
    std::vector<NumberedBlock> collect_pgtree(const std::string& description);

private:
    CallSpec spec(const RoleProfile& p, std::string tag) const;
    Gateway& gateway(const RoleProfile& p) const;

    EndpointMap endpoints_;
    DataAgentsConfig cfg_;
    const PromptRegistry* registry_;
    CallLog* log_;
    std::optional<std::uint64_t> seed_;
};

// ============================================================================
// Splits
// ============================================================================

struct SplitSizes {
    std::size_t train = 1500;
    std::size_t valid = 133;
    std::size_t test = 300;

    std::size_t total() const noexcept { return train + valid + test; }
    bool operator==(const SplitSizes&) const = default;
};

// 1500/133/300 when n >= 1933; otherwise the same proportions scaled to n
// by largest remainder, so the sizes sum to n.
SplitSizes default_split_sizes(std::size_t n);

struct SplitManifest {
    std::vector<std::string> train;
    std::vector<std::string> valid;
    std::vector<std::string> test;
    // Accepted ids left over when the sizes sum to less than the corpus.
    std::vector<std::string> unassigned;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static SplitManifest from_json(const nlohmann::json& j);
};

/**
 * Sorts the ids, shuffles them with mt19937_64(seed) (Fisher-Yates, j =
 * rng() % (i + 1) from the back), then cuts train, valid, test in that
 * order. Throws InsufficientRecords when the sizes exceed the ids and
 * ConfigError on duplicate ids.
 */
SplitManifest make_splits(std::vector<std::string> ids, const SplitSizes& sizes, std::uint64_t seed);

// ============================================================================
// SFT export
// ============================================================================

enum class SftKind { d2t, d2a, d2b, d2s, d2c, d2w, d2p_full };
inline constexpr std::array<SftKind, 7> kAllSftKinds = {SftKind::d2t, SftKind::d2a, SftKind::d2b, SftKind::d2s,
                                                        SftKind::d2c, SftKind::d2w, SftKind::d2p_full};
std::string_view to_string(SftKind k);  // "D2T", ..., "D2P_full"
SftKind parse_sft_kind(std::string_view s);

// What export needs per record. pgtree is absent when collection failed.
struct DatasetEntry {
    PatentRecord record;
    Draft draft;
    std::optional<std::vector<NumberedBlock>> pgtree;
};

struct ExportCounts {
    std::map<std::string, std::size_t> written;  // split -> lines
    std::vector<std::string> missing;            // MissingTarget messages
};

/**
 * Writes <out_dir>/<KIND>/{train,valid,test}.jsonl. Each line:
 *   {"schema_version":1,"record_id":...,"kind":"D2T","input":<render_draft>,"output":...}
 * Outputs: the component text; for D2W the first-level guideline sections
 * as <Section-k> blocks; for D2P_full the plain-text patent in the default
 * section order. Records without a target are left out and listed.
 */
ExportCounts export_sft(SftKind kind, const SplitManifest& manifest,
                        const std::map<std::string, DatasetEntry>& entries, const std::filesystem::path& out_dir);

// The target text for one record, or MissingTarget.
std::string sft_output(SftKind kind, const DatasetEntry& entry);

// ============================================================================
// Build
// ============================================================================

/**
 * Dataset build config, read from the "dataset" block of a config file
 * whose "backends" block has the run-config shape:
 *
 *   "dataset": {"ingest": {"accept_value": "ACCEPTED", "fields": {...}},
 *               "roles": {"inventor": {"backend": "default", "model_id": "..."},
 *                         "quality_examiner": {...}, "pgtree_collector": {...}},
 *               "swap_q4_q5_reviewers": false,
 *               "splits": {"sizes": [1500, 133, 300], "seed": 0},
 *               "jobs": 1}
 */
struct DatasetConfig {
    std::map<std::string, BackendConfig> backends;
    FieldMapping mapping = FieldMapping::identity();
    DataAgentsConfig agents;
    std::optional<SplitSizes> sizes;  // default_split_sizes when absent
    std::uint64_t seed = 0;
    int jobs = 1;

    static DatasetConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static DatasetConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    EndpointMap make_endpoints() const;
};

struct BuildSummary {
    std::size_t ingested = 0;
    std::size_t drafted = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t pgtrees = 0;
    SplitManifest manifest;
    std::vector<std::string> log;  // skips and warnings, in record order
    std::vector<CallLogEntry> calls;
    std::map<std::string, QualityReport> reports;  // by record id
    std::map<std::string, ExportCounts> exports;   // by kind

    nlohmann::json to_json() const;
};

/**
 * Ingest, draft, quality-gate, collect guideline trees, split, export.
 *
 * out_dir receives drafts/<id>.json, quality/<id>.json, pgtrees/<id>.json,
 * manifest.json, borderline.jsonl (rejected drafts with their reasons, for
 * manual review), sft/<KIND>/<split>.jsonl, calls.jsonl, build_log.txt and
 * summary.json. Records are processed up to cfg.jobs at a time; outputs
 * are assembled in record order.
 */
BuildSummary build_dataset(const std::filesystem::path& records_dir, const DatasetConfig& cfg,
                           const std::filesystem::path& out_dir, const EndpointMap* endpoints = nullptr);

}  // namespace patentpipe::datakit

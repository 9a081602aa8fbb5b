#pragma once

// JSON forms of the core records. Every top-level document carries
// "schema_version"; readers reject versions they do not know.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "patentpipe/core.hpp"

namespace patentpipe {

using json = nlohmann::json;

json to_json(const Draft& d);
// Accepts {"qa": [...]} or {"answers": [five strings]}.
Draft draft_from_json(const json& j);

json to_json(const PGTree& w);
PGTree pgtree_from_json(const json& j);

json to_json(const ReviewVerdict& v);
ReviewVerdict verdict_from_json(const json& j);

json to_json(const SubsectionDraft& s);

json to_json(const CallLogEntry& e, bool include_timing = true);
json to_json(const RunRecord& r, bool include_timing = true);
RunRecord run_record_from_json(const json& j);

// Structured record: one field per section, the order, and the run record.
// With include_timing=false latencies are dropped, giving a form that is
// byte-stable across replays of the same scripted run.
json to_json(const PatentDoc& doc, bool include_timing = true);
PatentDoc patent_from_json(const json& j);

// Throws ConfigError when the document is missing or has an unknown version.
void check_schema_version(const json& j, const std::string& what);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary file and rename.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace patentpipe

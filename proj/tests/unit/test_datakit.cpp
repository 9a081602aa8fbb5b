#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "patentpipe/datakit.hpp"
#include "patentpipe/json_io.hpp"
#include "support.hpp"

using namespace patentpipe;
using namespace patentpipe::datakit;
using nlohmann::json;

namespace {

PatentRecord record(const std::string& id) {
    return {id, id + "-title Clip", "An abstract.", "A background.", "A summary.", "1. A clip.",
            "The clip has a spring. Figure 1 shows it.", "ACCEPTED"};
}

json inventor_rules(const std::string& id, const std::array<std::string, 5>& answers) {
    json rules = json::array();
    const auto& qs = canonical_questions();
    for (int q = 0; q < 5; ++q) {
        std::string pattern = id + "-title[\\s\\S]*Question: ";
        for (char c : qs[q]) {
            if (c == '?' || c == '.' || c == '(' || c == ')') pattern += '\\';
            pattern += c;
        }
        rules.push_back({{"match", pattern}, {"regex", true}, {"responses", {"<Answer>" + answers[q] + "</Answer>"}}});
    }
    return rules;
}

json playbook(json rules) { return {{"schema_version", 1}, {"rules", std::move(rules)}}; }

// Reference shuffle written from the documented procedure.
std::vector<std::string> oracle_shuffle(std::vector<std::string> ids, std::uint64_t seed) {
    std::sort(ids.begin(), ids.end());
    std::mt19937_64 rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) {
        const std::size_t j = rng() % i;
        std::swap(ids[i - 1], ids[j]);
    }
    return ids;
}

}  // namespace

TEST_CASE("inventor simulation assembles the draft in order") {
    const std::array<std::string, 5> answers = {"a1", "a2", "a3", "a4", "a5"};
    auto m = testsupport::mock_endpoints(playbook(inventor_rules("r1", answers)));
    CallLog log;
    DataAgents agents(m.endpoints, {}, nullptr, &log);
    const auto d = agents.synthesize_draft(record("r1"));
    for (int q = 1; q <= 5; ++q) CHECK(d.answer(q) == answers[q - 1]);
    CHECK(d.source_id() == "r1");
    CHECK(log.size() == 5);
    CHECK(log.entries()[2].agent_role == "inventor_q3");

    auto m2 = testsupport::mock_endpoints(playbook(inventor_rules("r1", answers)));
    DataAgents again(m2.endpoints, {});
    CHECK(again.synthesize_draft(record("r1")) == d);

    const std::array<std::string, 5> blank = {"a1", " ", "a3", "a4", "a5"};
    auto m3 = testsupport::mock_endpoints(playbook(inventor_rules("r1", blank)));
    DataAgents empty(m3.endpoints, {});
    CHECK_THROWS_AS(empty.synthesize_draft(record("r1")), EmptyGeneration);
}

TEST_CASE("quality gate") {
    const auto draft = Draft::from_answers({"p1", "p2", "FAIL p3", "p4", "p5"});
    auto m = testsupport::mock_endpoints(playbook(json::array(
        {{{"match", "# Draft: FAIL"}, {"responses", {"<Result> Fail </Result>\n<Reason> no means given </Reason>"}}},
         {{"match", "# Draft: p4"}, {"responses", {"<Result> Undecided </Result>"}}},
         {{"match", "# Requirements"}, {"responses", {"<Result> Pass </Result>"}}}})));
    CallLog log;
    DataAgents agents(m.endpoints, {}, nullptr, &log);
    const auto report = agents.review_draft_quality(draft);
    CHECK_FALSE(report.passed());
    CHECK(report.questions[0].result == Verdict::pass);
    CHECK(report.questions[2].result == Verdict::fail);
    CHECK(report.questions[2].reason == "no means given");
    CHECK(report.questions[3].result == Verdict::fail);
    CHECK(report.questions[3].reason == kUnparseableVerdict);
    CHECK(log.size() == 5 + 2);  // q4 retried twice

    auto all_pass = testsupport::mock_endpoints(
        playbook(json::array({{{"match", "# Requirements"}, {"responses", {"<Result>pass</Result>"}}}})));
    DataAgents ok(all_pass.endpoints, {});
    CHECK(ok.review_draft_quality(draft).passed());
}

TEST_CASE("fail without a reason is retried, then unparseable") {
    auto m = testsupport::mock_endpoints(
        playbook(json::array({{{"match", "# Requirements"}, {"responses", {"<Result> Fail </Result>"}}}})));
    DataAgents agents(m.endpoints, {});
    const auto r = agents.review_draft_quality(Draft::from_answers({"a", "b", "c", "d", "e"}));
    for (const auto& q : r.questions) CHECK(q.reason == kUnparseableVerdict);
}

TEST_CASE("reviewer mapping for q4 and q5") {
    CHECK(quality_template_for(4, false) == TemplateId::draft_quality_q4);
    CHECK(quality_template_for(5, false) == TemplateId::draft_quality_q5);
    CHECK(quality_template_for(4, true) == TemplateId::draft_quality_q5);
    CHECK(quality_template_for(5, true) == TemplateId::draft_quality_q4);
    CHECK(quality_template_for(1, true) == TemplateId::draft_quality_q1);
}

TEST_CASE("gate over 2000 drafts keeps the all-pass ones") {
    auto m = testsupport::mock_endpoints(playbook(json::array(
        {{{"match", "# Draft: reject"}, {"responses", {"<Result> Fail </Result><Reason> thin </Reason>"}}},
         {{"match", "# Requirements"}, {"responses", {"<Result> Pass </Result>"}}}})));
    DataAgents agents(m.endpoints, {});
    int accepted = 0;
    for (int i = 0; i < 2000; ++i) {
        const std::string a = i < 1933 ? "keep " + std::to_string(i) : "reject " + std::to_string(i);
        if (agents.review_draft_quality(Draft::from_answers({a, "b", "c", "d", "e"})).passed()) ++accepted;
    }
    CHECK(accepted == 1933);
}

TEST_CASE("guideline collection") {
    auto m = testsupport::mock_endpoints(playbook(json::array(
        {{{"match", "Description: four"},
          {"responses", {"<Section-1>a</Section-1><Section-2>b</Section-2><Section-3>c</Section-3><Section-4>d</Section-4>"}}},
         {{"match", "Description: gap"}, {"responses", {"<Section-1>a</Section-1><Section-3>c</Section-3>"}}}})));
    DataAgents agents(m.endpoints, {});
    CHECK(agents.collect_pgtree("four part description").size() == 4);
    CHECK_THROWS_AS(agents.collect_pgtree("gap description"), NonContiguousIndices);
    CHECK_THROWS(agents.collect_pgtree("   "));
}

TEST_CASE("default split sizes") {
    CHECK(default_split_sizes(1933) == SplitSizes{1500, 133, 300});
    CHECK(default_split_sizes(5000) == SplitSizes{1500, 133, 300});
    CHECK(default_split_sizes(7) == SplitSizes{5, 1, 1});
    for (std::size_t n = 0; n < 1933; n += 37) CHECK(default_split_sizes(n).total() == n);
}

TEST_CASE("splits") {
    std::vector<std::string> ids;
    for (int i = 0; i < 1933; ++i) ids.push_back("id" + std::to_string(i));
    const auto m = make_splits(ids, {1500, 133, 300}, 42);
    CHECK(m.train.size() == 1500);
    CHECK(m.valid.size() == 133);
    CHECK(m.test.size() == 300);
    CHECK(m.unassigned.empty());
    std::set<std::string> all(m.train.begin(), m.train.end());
    all.insert(m.valid.begin(), m.valid.end());
    all.insert(m.test.begin(), m.test.end());
    CHECK(all.size() == 1933);

    const auto shuffled = oracle_shuffle(ids, 42);
    CHECK(std::equal(m.train.begin(), m.train.end(), shuffled.begin()));
    CHECK(m.test.back() == shuffled.back());

    std::vector<std::string> ten;
    for (int i = 0; i < 10; ++i) ten.push_back("r" + std::to_string(i));
    auto reversed = ten;
    std::reverse(reversed.begin(), reversed.end());
    const auto a = make_splits(ten, {6, 2, 2}, 7);
    const auto b = make_splits(reversed, {6, 2, 2}, 7);
    CHECK(a.train == b.train);
    CHECK(a.test == b.test);
    CHECK(make_splits(ten, {6, 2, 2}, 8).train != a.train);
    CHECK(make_splits(ten, {5, 1, 1}, 7).unassigned.size() == 3);
    CHECK_THROWS_AS(make_splits(ten, {8, 2, 2}, 7), InsufficientRecords);
    auto dup = ten;
    dup.push_back("r1");
    CHECK_THROWS_AS(make_splits(dup, {1, 1, 1}, 7), ConfigError);
    CHECK(SplitManifest::from_json(a.to_json()).train == a.train);
}

TEST_CASE("ingestion with field mapping") {
    testsupport::TempDir dir("ingest");
    json hupd = {{"patent_number", "US1"},  {"title", "T"},     {"abstract", "A"},
                 {"background", "B"},       {"summary", "S"},   {"claims", "C"},
                 {"full_description", "D"}, {"decision", "ACCEPTED"}};
    auto pending = hupd;
    pending["patent_number"] = "US2";
    pending["decision"] = "PENDING";
    auto blank = hupd;
    blank["patent_number"] = "US3";
    blank["claims"] = "";
    write_json_file(dir / "a.json", json::array({hupd, pending, blank}));
    std::ofstream(dir / "b.jsonl") << hupd.dump() << "\n";
    std::ofstream(dir / "notes.txt") << "ignored";

    const auto r = ingest_records(dir.path(), FieldMapping::hupd());
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].record_id == "US1");
    CHECK(r.records[0].description == "D");
    CHECK(r.skipped.size() == 3);

    const auto identity = ingest_records(testsupport::fixture("records"), FieldMapping::identity());
    CHECK(identity.records.size() == 10);
    CHECK(identity.records.front().record_id == "rec01");

    const auto mapped = FieldMapping::from_json(json{{"preset", "hupd"}, {"accept_value", "GRANTED"}});
    CHECK(mapped.accept_value == "GRANTED");
    CHECK(mapped.fields.at("description") == "full_description");
}

TEST_CASE("sft export") {
    std::map<std::string, DatasetEntry> entries;
    for (const char* id : {"a", "b", "c"}) {
        DatasetEntry e{record(id), Draft::from_answers({"1", "2", "3", "4", "5"}, id), std::nullopt};
        if (std::string(id) != "b") e.pgtree = std::vector<NumberedBlock>{{1, "first"}, {2, "second"}};
        entries.emplace(id, e);
    }
    SplitManifest m;
    m.train = {"a", "b"};
    m.test = {"c"};
    testsupport::TempDir dir("sft");

    const auto t = export_sft(SftKind::d2t, m, entries, dir.path());
    CHECK(t.written.at("train") == 2);
    CHECK(t.written.at("test") == 1);
    std::ifstream in(dir / "D2T/train.jsonl");
    std::string line;
    std::getline(in, line);
    const auto j = json::parse(line);
    CHECK(j.at("output") == "a-title Clip");
    CHECK(j.at("input") == render_draft(entries.at("a").draft));
    CHECK(j.at("kind") == "D2T");

    const auto w = export_sft(SftKind::d2w, m, entries, dir.path());
    CHECK(w.written.at("train") == 1);
    CHECK(w.missing.size() == 1);
    CHECK_THROWS_AS(sft_output(SftKind::d2w, entries.at("b")), MissingTarget);
    CHECK(sft_output(SftKind::d2w, entries.at("a")) == render_sections({{1, "first"}, {2, "second"}}));

    const auto full = sft_output(SftKind::d2p_full, entries.at("a"));
    CHECK(full.find("[[DESCRIPTION]]") < full.find("[[CLAIMS]]"));
    CHECK(parse_sft_kind("D2P_full") == SftKind::d2p_full);
}

TEST_CASE("dataset build end to end") {
    const auto cfg = DatasetConfig::from_json(
        {{"schema_version", 1},
         {"backends", {{"default", {{"type", "mock"}, {"model_id", "mock"}, {"playbook", "playbook_dataset.json"}, {"retry_max", 0}, {"backoff_base_ms", 0}}}}},
         {"dataset", {{"jobs", 3}, {"splits", {{"seed", 5}}}}}},
        testsupport::fixture(""));
    testsupport::TempDir out("dataset");
    const auto sum = build_dataset(testsupport::fixture("records"), cfg, out.path());
    CHECK(sum.ingested == 10);
    CHECK(sum.accepted == 7);
    CHECK(sum.rejected == 3);
    CHECK(sum.pgtrees == 7);
    CHECK(sum.manifest.train.size() == 5);
    CHECK(sum.manifest.valid.size() == 1);
    CHECK(sum.manifest.test.size() == 1);
    CHECK(sum.exports.at("D2W").written.at("train") == 5);
    for (const char* f : {"manifest.json", "borderline.jsonl", "summary.json", "calls.jsonl", "build_log.txt",
                          "sft/D2T/train.jsonl", "sft/D2P_full/test.jsonl", "drafts/rec01.json", "quality/rec03.json"})
        CHECK(std::filesystem::exists(out / f));

    // Same corpus, same playbook, one worker: same manifest and call sequence.
    auto serial = cfg;
    serial.jobs = 1;
    testsupport::TempDir out2("dataset2");
    const auto sum2 = build_dataset(testsupport::fixture("records"), serial, out2.path());
    CHECK(sum2.manifest.to_json() == sum.manifest.to_json());
    REQUIRE(sum2.calls.size() == sum.calls.size());
    for (std::size_t k = 0; k < sum.calls.size(); ++k) CHECK(sum2.calls[k].prompt_hash == sum.calls[k].prompt_hash);
}

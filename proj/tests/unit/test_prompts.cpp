#include <random>
#include <set>
#include <string>

#include "doctest.h"
#include "patentpipe/core.hpp"
#include "patentpipe/hash.hpp"
#include "patentpipe/json_io.hpp"
#include "patentpipe/metrics.hpp"
#include "patentpipe/prompts.hpp"
#include "support.hpp"

using namespace patentpipe;

TEST_CASE("every template renders with its slots bound") {
    const auto& reg = PromptRegistry::builtin();
    for (auto id : all_template_ids()) {
        const auto& t = reg.get(id);
        CHECK(t.required_slots == scan_slots(t.body));
        Bindings b;
        for (const auto& s : t.required_slots) b[s] = "value of " + s;
        const auto out = reg.render(id, b);
        CHECK(out.find("{{") == std::string::npos);
        CHECK(out == reg.render(id, b));
    }
}

TEST_CASE("published prompt lines survive") {
    const auto& reg = PromptRegistry::builtin();
    const auto title = reg.render(TemplateId::title_writer, {{"draft", "D"}});
    CHECK(title.find("follows the format below:\n\n<Title>the title of patent</Title>") != std::string::npos);
    CHECK(reg.get(TemplateId::planner).body.find("detailed writing guide for the patent description") !=
          std::string::npos);
    CHECK(reg.get(TemplateId::retrieval).body.find("copy the all relevant content") != std::string::npos);
    CHECK(reg.get(TemplateId::description_refine).body.find("Only output the revised subsection.") !=
          std::string::npos);
    CHECK(reg.get(TemplateId::examiner_review).required_slots ==
          std::vector<std::string>{"draft", "guideline", "subsection"});
    CHECK(reg.get(TemplateId::description_refine).required_slots ==
          std::vector<std::string>{"pgtree", "guideline", "subsection", "feedback"});
}

TEST_CASE("missing slot names the slot") {
    const auto& reg = PromptRegistry::builtin();
    try {
        reg.render(TemplateId::examiner_review, {{"draft", "d"}, {"subsection", "s"}});
        FAIL("expected MissingSlot");
    } catch (const MissingSlot& e) {
        CHECK(std::string(e.what()).find("guideline") != std::string::npos);
    }
}

TEST_CASE("bound values are never rescanned") {
    const auto& reg = PromptRegistry::builtin();
    const auto out = reg.render(TemplateId::title_writer, {{"draft", "literal {{draft}} and {{other}}"}});
    CHECK(out.find("literal {{draft}} and {{other}}") != std::string::npos);
}

TEST_CASE("template names round-trip") {
    std::set<std::string> names;
    for (auto id : all_template_ids()) {
        names.insert(std::string(template_name(id)));
        CHECK(parse_template_id(template_name(id)) == id);
    }
    CHECK(names.size() == all_template_ids().size());
    CHECK_THROWS(parse_template_id("no_such_template"));
}

TEST_CASE("shipped prompt assets match the embedded bodies") {
    const auto loaded = PromptRegistry::load_assets(std::filesystem::path(PATENTPIPE_ASSETS) / "prompts");
    for (auto id : all_template_ids()) CHECK(loaded.get(id).body == PromptRegistry::builtin().get(id).body);
}

TEST_CASE("edited assets need an explicit opt-in") {
    testsupport::TempDir dir("assets");
    PromptRegistry::builtin().write_assets(dir.path());
    const auto file = dir / "title_writer.prompt";
    const auto original = read_text_file(file);
    const std::string body = PromptRegistry::builtin().get(TemplateId::title_writer).body + "\nExtra instruction.";

    // Body edited without updating the front-matter hash: always rejected.
    write_text_file(file, original + "\nExtra instruction.");
    CHECK_THROWS_AS(PromptRegistry::load_assets(dir.path(), true), PromptAssetError);

    // Consistent edit: rejected by default, accepted with the opt-in.
    write_text_file(file, "---\ntemplate_id: title_writer\nrequired_slots: draft\nsha256: " + sha256_hex(body) +
                              "\n---\n" + body);
    CHECK_THROWS_AS(PromptRegistry::load_assets(dir.path()), PromptAssetError);
    const auto edited = PromptRegistry::load_assets(dir.path(), true);
    CHECK(edited.get(TemplateId::title_writer).body.find("Extra instruction.") != std::string::npos);
}

TEST_CASE("shipped stopword asset matches the builtin list") {
    const auto l = metrics::StopwordList::load(std::filesystem::path(PATENTPIPE_ASSETS) / "stopwords_en_v1.txt", "en-v1");
    CHECK(l.sorted_words() == metrics::StopwordList::builtin().sorted_words());
}

TEST_CASE("tag extraction") {
    CHECK(extract_tag("<Result> Pass </Result>", "Result") == "Pass");
    CHECK(extract_tag("pre <Title>A Widget</Title> post", "Title") == "A Widget");
    CHECK(extract_tag("<Title>\n  multi\n  line\n</Title>", "Title") == "multi\n  line");
    CHECK_THROWS_AS(extract_tag("<Title>A</Title><Title>B</Title>", "Title"), TagDuplicated);
    CHECK_THROWS_AS(extract_tag("no tags here", "Title"), TagMissing);
    CHECK_THROWS_AS(extract_tag("<Title>open only", "Title"), TagUnclosed);
    CHECK_THROWS_AS(extract_tag("<Title>a <Title>b</Title> c</Title>", "Title"), TagNested);
    CHECK_THROWS_AS(extract_tag("<title>lower</title>", "Title"), TagMissing);

    const auto many = extract_tags("<Answer>a</Answer> x <Answer> b </Answer>", {"Answer", Multiplicity::one_or_more});
    CHECK(many == std::vector<std::string>{"a", "b"});

    TagSpec summary{"Summary", Multiplicity::exactly_one, {"summary"}};
    CHECK(extract_tags("<Summary> s </summary>", summary) == std::vector<std::string>{"s"});
}

TEST_CASE("numbered sections") {
    const auto two = extract_sections("<Section-1> one </Section-1>\n<Section-2>two</Section-2>");
    REQUIRE(two.size() == 2);
    CHECK(two[0] == NumberedBlock{1, "one"});
    CHECK(two[1] == NumberedBlock{2, "two"});

    try {
        extract_sections("<Section-1>a</Section-1><Section-3>c</Section-3>");
        FAIL("expected NonContiguousIndices");
    } catch (const NonContiguousIndices& e) {
        CHECK(e.found() == std::vector<int>{1, 3});
    }
    CHECK_THROWS_AS(extract_sections("<Section-2>b</Section-2>"), NonContiguousIndices);
    CHECK_THROWS_AS(extract_sections("plain text"), NoSections);
    CHECK_THROWS_AS(extract_sections("<Section-1>never closed"), TagUnclosed);
    CHECK(extract_sections("<Subsection-1>x</Subsection-1>", "Subsection").size() == 1);

    const std::vector<NumberedBlock> blocks{{1, "alpha"}, {2, "beta"}, {3, "gamma"}};
    CHECK(extract_sections(render_sections(blocks)) == blocks);
}

namespace {

std::string random_markup(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "<Title>", "</Title>", "<Result>", "</Result>", "<Section-1>", "</Section-1>", "<Section-2>",
        "</Section-2>", "<Section-3>", "</Section-3>", "<Section-", ">", "<", "/", " ", "\n", "Pass",
        "Fail", "text", "9", "<Section-99999999999>", "</", "<Title", "Title>", "\xe2\x80\x94", "\0"};
    std::string out;
    const std::size_t n = rng() % 24;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng() % 5 == 0) {
            out += static_cast<char>(rng() % 256);
        } else {
            out += pieces[rng() % pieces.size()];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("tag parser fuzz: only parse errors, never anything else") {
    std::mt19937_64 rng(12345);
    int parsed = 0, rejected = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto s = random_markup(rng);
        for (const char* tag : {"Title", "Result"}) {
            try {
                const auto v = extract_tag(s, tag);
                CHECK(v == trim(v));
                ++parsed;
            } catch (const ParseError&) {
                ++rejected;
            }
        }
        try {
            const auto blocks = extract_sections(s);
            for (std::size_t k = 0; k < blocks.size(); ++k) CHECK(blocks[k].index == static_cast<int>(k) + 1);
            ++parsed;
        } catch (const ParseError&) {
            ++rejected;
        }
    }
    CHECK(parsed > 0);
    CHECK(rejected > 0);
}

TEST_CASE("wrap and extract round-trip") {
    std::mt19937_64 rng(77);
    const std::string alphabet = "abcdefXYZ0123 \n\t.,;:!?-()\"'";
    for (int i = 0; i < 2000; ++i) {
        std::string c;
        const std::size_t n = rng() % 40;
        for (std::size_t k = 0; k < n; ++k) c += alphabet[rng() % alphabet.size()];
        for (const char* tag : {"Title", "Claims", "Advice"}) CHECK(extract_tag(wrap_tag(c, tag), tag) == trim(c));
    }
}

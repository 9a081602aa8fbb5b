#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include <unistd.h>

#include "patentpipe/agents.hpp"
#include "patentpipe/gateway.hpp"
#include "patentpipe/json_io.hpp"

#ifndef PATENTPIPE_FIXTURES
#error "PATENTPIPE_FIXTURES must point at tests/fixtures"
#endif

namespace testsupport {

namespace fs = std::filesystem;
using nlohmann::json;

inline fs::path fixture(const std::string& rel) { return fs::path(PATENTPIPE_FIXTURES) / rel; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("patentpipe_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

struct MockEndpoints {
    std::shared_ptr<patentpipe::MockBackend> backend;
    patentpipe::EndpointMap endpoints;
};

// One mock backend behind a no-retry, no-backoff, uncached gateway.
inline MockEndpoints mock_endpoints(const json& playbook) {
    MockEndpoints m;
    m.backend = std::make_shared<patentpipe::MockBackend>(patentpipe::MockPlaybook::from_json(playbook));
    patentpipe::GatewayOptions opts;
    opts.retry_max = 0;
    opts.backoff_base_ms = 0;
    m.endpoints["default"] = {std::make_shared<patentpipe::Gateway>(m.backend, opts), "mock"};
    return m;
}

inline MockEndpoints mock_endpoints_file(const std::string& rel) {
    return mock_endpoints(patentpipe::read_json_file(fixture(rel)));
}

inline patentpipe::Draft fixture_draft() {
    return patentpipe::draft_from_json(patentpipe::read_json_file(fixture("draft.json")));
}

// Builds playbooks for the pipeline prompts. Guideline texts carry "G-k"
// and "G-k-j" markers so each node's calls can be scripted separately.
struct PlaybookBuilder {
    std::vector<int> shape = {2, 2};  // subsections per section
    std::function<json(int, int)> reviews = [](int, int) { return json::array({pass()}); };
    std::map<int, json> expansion_override;  // section -> responses
    json extra_first = json::array();        // rules placed before everything else

    static std::string pass() { return "<Result>Pass</Result>\n<Advice>Consistent with the draft.</Advice>"; }
    static std::string fail() { return "<Result>Fail</Result>\n<Advice>Name the guide's stop angle.</Advice>"; }
    static std::string node(int k, int j) { return "G-" + std::to_string(k) + "-" + std::to_string(j); }

    json build() const {
        json rules = extra_first;
        auto add = [&](const std::string& match, json responses, bool regex = false) {
            rules.push_back({{"match", match}, {"regex", regex}, {"responses", std::move(responses)}});
        };
        add("<Title>the title of patent</Title>", {"<Title>Self-cleaning valve</Title>"});
        add("<Abstract>the abstract of patent</Abstract>", {"<Abstract>A valve that wipes its seat.</Abstract>"});
        add("<Background>the background information of patent</Background>",
            {"<Background>Valve seats collect sediment.</Background>"});
        add("<Summary>the summary of the patent</Summary>", {"<Summary>A rotating poppet wipes the seat.</Summary>"});
        add("<Claims>the claims of patent</Claims>", {"<Claims>1. A valve with a rotating poppet.</Claims>"});
        std::string plan;
        for (std::size_t k = 1; k <= shape.size(); ++k) {
            const auto ks = std::to_string(k);
            plan += "<Section-" + ks + "> G-" + ks + " overview of part " + ks + " </Section-" + ks + ">\n\n";
        }
        add("I need you to help me write a detailed writing guide", {plan});
        for (std::size_t k = 1; k <= shape.size(); ++k) {
            const auto ks = std::to_string(k);
            if (auto it = expansion_override.find(static_cast<int>(k)); it != expansion_override.end()) {
                add("Section To Expand: G-" + ks + " ", it->second);
                continue;
            }
            std::string subs;
            for (int j = 1; j <= shape[k - 1]; ++j) {
                const auto js = std::to_string(j);
                subs += "<Subsection-" + js + "> " + node(static_cast<int>(k), j) + " guidance for item " + ks + "." +
                        js + " </Subsection-" + js + ">\n\n";
            }
            add("Section To Expand: G-" + ks + " ", {subs});
        }
        for (std::size_t k = 1; k <= shape.size(); ++k)
            for (int j = 1; j <= shape[k - 1]; ++j) {
                const auto g = node(static_cast<int>(k), j);
                add("The subsection already written: [^\\n]*" + g + "\\.", {"Revised body of " + g + ". The poppet turns."},
                    true);
            }
        for (std::size_t k = 1; k <= shape.size(); ++k)
            for (int j = 1; j <= shape[k - 1]; ++j) {
                const auto g = node(static_cast<int>(k), j);
                add("Writing Plan: " + g + " ", {"Facts for " + g + ": the guide rotates the poppet."});
                add("Subsection Writing Guideline: " + g + " ", {"Body of " + g + ". The seat is conical."});
                add("<WritingGuideline> " + g + " ", reviews(static_cast<int>(k), j));
            }
        // With expansion off the guideline is the section text itself.
        for (std::size_t k = 1; k <= shape.size(); ++k) {
            const auto g = "G-" + std::to_string(k);
            add("The subsection already written: [^\\n]*" + g + "\\.", {"Revised body of " + g + ". Turned."}, true);
            add("Writing Plan: " + g + " ", {"Facts for " + g + "."});
            add("Subsection Writing Guideline: " + g + " ", {"Body of " + g + ". Whole section."});
            add("<WritingGuideline> " + g + " ", reviews(static_cast<int>(k), 0));
        }
        return {{"schema_version", 1}, {"rules", rules}};
    }
};

}  // namespace testsupport

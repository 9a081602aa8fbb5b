#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>
#include <thread>

#include "doctest.h"
#include "patentpipe/gateway.hpp"
#include "support.hpp"

using namespace patentpipe;
using nlohmann::json;

namespace {

ChatRequest request(const std::string& prompt, const std::string& tag = "title") {
    ChatRequest r;
    r.model_id = "m";
    r.messages = {{Role::user, prompt}};
    r.request_tag = tag;
    return r;
}

GatewayOptions quick(int retry_max = 0) {
    GatewayOptions o;
    o.retry_max = retry_max;
    o.backoff_base_ms = 0;
    return o;
}

std::shared_ptr<MockBackend> mock(const json& rules, std::optional<std::string> fallback = {}) {
    json pb = {{"schema_version", 1}, {"rules", rules}};
    if (fallback) pb["default_response"] = *fallback;
    return std::make_shared<MockBackend>(MockPlaybook::from_json(pb));
}

}  // namespace

TEST_CASE("request validation") {
    auto r = request("p");
    CHECK_NOTHROW(r.validate());
    r.temperature = 2.5;
    CHECK_THROWS_AS(r.validate(), InvalidRequest);
    r = request("p");
    r.top_p = 0;
    CHECK_THROWS_AS(r.validate(), InvalidRequest);
    r = request("p");
    r.messages = {{Role::system, "only system"}};
    CHECK_THROWS_AS(r.validate(), InvalidRequest);
    r = request("p");
    r.max_tokens = max_tokens_limit(r.model_id) + 1;
    CHECK_THROWS_AS(r.validate(), InvalidRequest);
}

TEST_CASE("cache key") {
    auto a = request("p", "title"), b = request("p", "claims");
    CHECK(cache_key(a) == cache_key(b));
    b.temperature = 0.6;
    CHECK(cache_key(a) != cache_key(b));
    auto c = request("x");
    c.messages = {{Role::user, "one"}, {Role::user, "two"}};
    auto d = c;
    std::swap(d.messages[0], d.messages[1]);
    CHECK(cache_key(c) != cache_key(d));
}

TEST_CASE("mock playbook: scripted echo, sequences and default") {
    auto m = mock(json::array({{{"match", "patent title"}, {"responses", {"<Title>X</Title>"}}},
                               {{"match", "seq"}, {"responses", {"one", "two"}}},
                               {{"match", "^re[0-9]+$"}, {"regex", true}, {"responses", {"regex hit"}}}}),
                  "fallback");
    Gateway g(m, quick());
    CallLog log;
    auto r = g.complete(request("write the patent title"), &log);
    CHECK(r.content == "<Title>X</Title>");
    CHECK_FALSE(r.cached);
    CHECK(g.complete(request("seq")).content == "one");
    CHECK(g.complete(request("seq")).content == "two");
    CHECK(g.complete(request("seq")).content == "two");
    CHECK(g.complete(request("re42")).content == "regex hit");
    CHECK(g.complete(request("nothing matches")).content == "fallback");
    CHECK(m->calls() == 6);
    REQUIRE(log.size() == 1);
    const auto e = log.entries()[0];
    CHECK(e.agent_role == "title");
    CHECK(e.prompt_hash.size() == 64);
    CHECK(e.retries == 0);
}

TEST_CASE("unmatched request without default is a bad status") {
    Gateway g(mock(json::array()), quick());
    CHECK_THROWS_AS(g.complete(request("anything")), BadStatus);
}

TEST_CASE("retries on 5xx and transport failures") {
    auto m = mock(json::array({{{"match", "p"}, {"responses", {{{"status", 500}}, {{"status", 500}}, {{"status", 500}}}}}}));
    Gateway g(m, quick(2));
    try {
        g.complete(request("p"));
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK(e.attempts() == 3);
    }
    CHECK(g.backend_attempts() == 3);

    auto flaky = mock(json::array({{{"match", "p"}, {"responses", {{{"transport_error", true}}, "ok"}}}}));
    Gateway g2(flaky, quick(3));
    CallLog log;
    CHECK(g2.complete(request("p"), &log).content == "ok");
    CHECK(log.entries().at(0).retries == 1);

    auto denied = mock(json::array({{{"match", "p"}, {"responses", {{{"status", 401}}}}}}));
    Gateway g3(denied, quick(3));
    CHECK_THROWS_AS(g3.complete(request("p")), BadStatus);
    CHECK(g3.backend_attempts() == 1);
}

TEST_CASE("length finish reason is returned, not thrown") {
    auto m = mock(json::array({{{"match", "p"}, {"responses", {{{"content", "cut"}, {"finish_reason", "length"}}}}}}));
    Gateway g(m, quick());
    const auto r = g.complete(request("p"));
    CHECK(r.finish_reason == FinishReason::length);
    CHECK(r.content == "cut");
}

TEST_CASE("response cache") {
    testsupport::TempDir dir("cache");
    auto m = mock(json::array({{{"match", "p"}, {"responses", {"first", "second"}}}}));
    auto opts = quick();
    opts.cache_dir = dir.path().string();
    Gateway g(m, opts);
    CallLog log;
    const auto a = g.complete(request("p"), &log);
    const auto b = g.complete(request("p"), &log);
    CHECK(a.content == "first");
    CHECK(b.content == "first");
    CHECK(b.cached);
    CHECK(m->calls() == 1);
    CHECK(log.entries().at(1).cached);

    // A fresh gateway on the same directory hits the persisted entry.
    Gateway g2(m, opts);
    CHECK(g2.complete(request("p")).cached);
    CHECK(m->calls() == 1);
}

TEST_CASE("backend config") {
    const json j = {{"type", "openai"},
                    {"endpoint", "https://example.invalid/v1/chat/completions"},
                    {"api_key_env", "SOME_KEY"},
                    {"model_id", "m"},
                    {"rpm", 60},
                    {"retry_max", 2},
                    {"timeout_s", 30}};
    const auto c = BackendConfig::from_json(j);
    CHECK(c.model_id == "m");
    CHECK(c.retry_max == 2);
    CHECK(BackendConfig::from_json(c.to_json()).endpoint == c.endpoint);

    auto with_key = j;
    with_key["api_key"] = "sk-secret";
    CHECK_THROWS_AS(BackendConfig::from_json(with_key), ConfigError);
    CHECK(c.to_json().dump().find("api_key\"") == std::string::npos);
}

TEST_CASE("http backend speaks the chat-completions shape") {
    httplib::Server server;
    json seen;
    std::string auth;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        auth = req.get_header_value("Authorization");
        const std::string content = seen["messages"].back()["content"].get<std::string>() == "fail" ? "" : "pong";
        if (content.empty()) {
            res.status = 503;
            return;
        }
        res.set_content(json({{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}},
                                            {"finish_reason", "stop"}}}},
                              {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 1}}}})
                            .dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("PATENTPIPE_TEST_KEY", "test-key", 1);
    BackendConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    cfg.api_key_env = "PATENTPIPE_TEST_KEY";
    cfg.model_id = "m";
    cfg.timeout_s = 5;
    cfg.retry_max = 1;
    cfg.backoff_base_ms = 0;
    auto gw = make_gateway(cfg);

    auto req = request("ping");
    req.seed = 7;
    const auto r = gw->complete(req);
    CHECK(r.content == "pong");
    CHECK(r.usage.prompt_tokens == 3);
    CHECK(seen["model"] == "m");
    CHECK(seen["temperature"] == 0.5);
    CHECK(seen["top_p"] == 0.9);
    CHECK(seen["seed"] == 7);
    CHECK(auth == "Bearer test-key");

    CHECK_THROWS_AS(gw->complete(request("fail")), TransportError);
    CHECK(gw->backend_attempts() == 3);

    server.stop();
    th.join();

    BackendConfig missing = cfg;
    missing.api_key_env = "PATENTPIPE_TEST_KEY_UNSET";
    ::unsetenv("PATENTPIPE_TEST_KEY_UNSET");
    CHECK_THROWS_AS(make_gateway(missing), ConfigError);
}

TEST_CASE("rate limiter disabled at zero rpm") {
    RateLimiter off(0);
    for (int i = 0; i < 1000; ++i) off.acquire();
    CHECK(true);
}

// httplib is heavy; it is confined to this translation unit.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <cstdlib>

#include "patentpipe/gateway.hpp"

namespace patentpipe {

HttpBackend::HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
    const auto& url = cfg_.endpoint;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/v1/chat/completions" : url.substr(path_start);
    if (!cfg_.api_key_env.empty()) {
        const char* key = std::getenv(cfg_.api_key_env.c_str());
        if (!key || !*key) throw ConfigError("environment variable " + cfg_.api_key_env + " is not set");
        api_key_ = key;
    }
}

BackendReply HttpBackend::send(const ChatRequest& req) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : req.messages)
        messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
    nlohmann::json body = {{"model", req.model_id},
                           {"messages", messages},
                           {"temperature", req.temperature},
                           {"top_p", req.top_p},
                           {"max_tokens", req.max_tokens}};
    if (req.seed) body["seed"] = *req.seed;

    httplib::Client client(scheme_host_port_);
    const auto timeout = std::chrono::duration<double>(cfg_.timeout_s);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    BackendReply reply;
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res) {
        reply.status = 0;
        reply.error = httplib::to_string(res.error());
        return reply;
    }
    reply.status = res->status;
    if (res->status < 200 || res->status >= 300) {
        reply.error = res->body.substr(0, 512);
        return reply;
    }
    try {
        const auto j = nlohmann::json::parse(res->body);
        const auto& choice = j.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        reply.response.content = content.is_string() ? content.get<std::string>() : std::string{};
        const auto& fr = choice.value("finish_reason", nlohmann::json{});
        reply.response.finish_reason = parse_finish_reason(fr.is_string() ? fr.get<std::string>() : "stop");
        if (j.contains("usage") && j.at("usage").is_object()) {
            reply.response.usage.prompt_tokens = j.at("usage").value("prompt_tokens", 0);
            reply.response.usage.completion_tokens = j.at("usage").value("completion_tokens", 0);
        }
    } catch (const nlohmann::json::exception& e) {
        // A 200 with an unreadable body is treated like a dropped connection.
        reply.status = 0;
        reply.error = std::string("malformed completion body: ") + e.what();
    }
    return reply;
}

}  // namespace patentpipe

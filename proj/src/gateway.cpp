#include "patentpipe/gateway.hpp"

#include <cmath>
#include <thread>

#include "patentpipe/hash.hpp"
#include "patentpipe/json_io.hpp"

namespace patentpipe {

std::string_view to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(FinishReason f) {
    switch (f) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason parse_finish_reason(std::string_view s) {
    if (s == "stop" || s.empty()) return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    return FinishReason::error;
}

int max_tokens_limit(std::string_view model_id) {
    static const std::pair<std::string_view, int> table[] = {
        {"gpt-4o", 16384}, {"gpt-4", 8192}, {"llama3.1", 32768}, {"llama-3.1", 32768},
        {"qwen2.5", 32768}, {"mistral", 32768},
    };
    for (const auto& [prefix, limit] : table)
        if (model_id.substr(0, prefix.size()) == prefix) return limit;
    return 32768;
}

void ChatRequest::validate() const {
    if (model_id.empty()) throw InvalidRequest("request has no model_id");
    bool has_user = false;
    for (const auto& m : messages) has_user = has_user || m.role == Role::user;
    if (!has_user) throw InvalidRequest("request needs at least one user message");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw InvalidRequest("temperature must be in [0, 2]");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidRequest("top_p must be in (0, 1]");
    if (max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
    if (max_tokens > max_tokens_limit(model_id))
        throw InvalidRequest("max_tokens " + std::to_string(max_tokens) + " exceeds the limit for " + model_id);
}

std::string ChatRequest::rendered_prompt() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n\n";
        out += m.content;
    }
    return out;
}

std::string cache_key(const ChatRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({std::string(to_string(m.role)), m.content});
    const json key = {{"model_id", req.model_id},
                      {"messages", msgs},
                      {"temperature", req.temperature},
                      {"top_p", req.top_p},
                      {"max_tokens", req.max_tokens}};
    return sha256_hex(key.dump());
}

// ---------------------------------------------------------------------------
// Backend config
// ---------------------------------------------------------------------------

BackendConfig BackendConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("backend config must be an object");
    if (j.contains("api_key")) throw ConfigError("backend config must not store an API key; use api_key_env");
    BackendConfig c;
    c.name = j.value("name", c.name);
    c.type = j.value("type", c.type);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.model_id = j.value("model_id", c.model_id);
    c.rpm = j.value("rpm", c.rpm);
    c.retry_max = j.value("retry_max", c.retry_max);
    c.timeout_s = j.value("timeout_s", c.timeout_s);
    c.backoff_base_ms = j.value("backoff_base_ms", c.backoff_base_ms);
    c.playbook = j.value("playbook", c.playbook);
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    if (c.type != "openai" && c.type != "mock") throw ConfigError("unknown backend type: " + c.type);
    if (c.retry_max < 0) throw ConfigError("retry_max must be >= 0");
    if (c.model_id.empty()) c.model_id = c.type == "mock" ? "mock" : "";
    if (c.model_id.empty()) throw ConfigError("backend " + c.name + " needs a model_id");
    if (c.type == "openai" && c.endpoint.empty()) throw ConfigError("backend " + c.name + " needs an endpoint");
    auto resolve = [&](std::string& p) {
        if (!p.empty() && !base_dir.empty() && std::filesystem::path(p).is_relative()) p = (base_dir / p).string();
    };
    resolve(c.playbook);
    resolve(c.cache_dir);
    return c;
}

json BackendConfig::to_json() const {
    return {{"name", name},           {"type", type},           {"endpoint", endpoint},
            {"api_key_env", api_key_env}, {"model_id", model_id}, {"rpm", rpm},
            {"retry_max", retry_max}, {"timeout_s", timeout_s}, {"backoff_base_ms", backoff_base_ms},
            {"playbook", playbook},   {"cache_dir", cache_dir}};
}

// ---------------------------------------------------------------------------
// Mock backend
// ---------------------------------------------------------------------------

MockPlaybook MockPlaybook::from_json(const json& j) {
    check_schema_version(j, "mock playbook");
    MockPlaybook pb;
    for (const auto& r : j.value("rules", json::array())) {
        PlaybookRule rule;
        rule.pattern = r.at("match").get<std::string>();
        rule.kind = r.value("regex", false) ? PlaybookRule::Kind::regex : PlaybookRule::Kind::substring;
        for (const auto& resp : r.at("responses")) {
            ScriptedReply s;
            if (resp.is_string()) {
                s.content = resp.get<std::string>();
            } else {
                s.content = resp.value("content", std::string{});
                s.status = resp.value("status", 200);
                s.transport_failure = resp.value("transport_error", false);
                s.finish_reason = resp.value("finish_reason", std::string("stop"));
            }
            rule.responses.push_back(std::move(s));
        }
        if (rule.responses.empty()) throw ConfigError("playbook rule \"" + rule.pattern + "\" has no responses");
        pb.rules.push_back(std::move(rule));
    }
    if (j.contains("default_response") && !j.at("default_response").is_null())
        pb.default_response = j.at("default_response").get<std::string>();
    return pb;
}

MockPlaybook MockPlaybook::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

json MockPlaybook::to_json() const {
    json out = json::array();
    for (const auto& r : rules) {
        json responses = json::array();
        for (const auto& s : r.responses) {
            if (s.status == 200 && !s.transport_failure && s.finish_reason == "stop")
                responses.push_back(s.content);
            else
                responses.push_back({{"content", s.content},
                                     {"status", s.status},
                                     {"transport_error", s.transport_failure},
                                     {"finish_reason", s.finish_reason}});
        }
        out.push_back(
            {{"match", r.pattern}, {"regex", r.kind == PlaybookRule::Kind::regex}, {"responses", responses}});
    }
    json j = {{"schema_version", kSchemaVersion}, {"rules", out}};
    if (default_response) j["default_response"] = *default_response;
    return j;
}

MockBackend::MockBackend(MockPlaybook playbook) : playbook_(std::move(playbook)) {
    for (const auto& r : playbook_.rules) {
        if (r.kind == PlaybookRule::Kind::regex) {
            try {
                compiled_.emplace_back(r.pattern, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                throw ConfigError("bad playbook regex \"" + r.pattern + "\": " + e.what());
            }
        } else {
            compiled_.emplace_back();
        }
    }
    hits_.assign(playbook_.rules.size(), 0);
}

BackendReply MockBackend::send(const ChatRequest& req) {
    const std::string prompt = req.rendered_prompt();
    std::lock_guard lock(mu_);
    ++calls_;
    for (std::size_t i = 0; i < playbook_.rules.size(); ++i) {
        const auto& rule = playbook_.rules[i];
        const bool match = rule.kind == PlaybookRule::Kind::substring
                               ? prompt.find(rule.pattern) != std::string::npos
                               : std::regex_search(prompt, compiled_[i]);
        if (!match) continue;
        const auto& s = rule.responses[std::min(hits_[i], rule.responses.size() - 1)];
        ++hits_[i];
        BackendReply reply;
        if (s.transport_failure) {
            reply.status = 0;
            reply.error = "scripted transport failure";
            return reply;
        }
        reply.status = s.status;
        if (s.status < 200 || s.status >= 300) {
            reply.error = "scripted status";
            return reply;
        }
        reply.response.content = s.content;
        reply.response.finish_reason = parse_finish_reason(s.finish_reason);
        reply.response.usage.prompt_tokens = static_cast<int>(prompt.size() / 4);
        reply.response.usage.completion_tokens = static_cast<int>(s.content.size() / 4);
        return reply;
    }
    BackendReply reply;
    if (playbook_.default_response) {
        reply.response.content = *playbook_.default_response;
        return reply;
    }
    reply.status = 404;
    reply.error = "no playbook rule matched request tagged '" + req.request_tag + "'";
    return reply;
}

std::size_t MockBackend::calls() const {
    std::lock_guard lock(mu_);
    return calls_;
}

std::vector<std::size_t> MockBackend::rule_hits() const {
    std::lock_guard lock(mu_);
    return hits_;
}

// ---------------------------------------------------------------------------
// Rate limiter, cache, log
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double rpm, double burst)
    : rate_per_s_(rpm > 0 ? rpm / 60.0 : 0.0),
      capacity_(rpm > 0 ? (burst > 0 ? burst : rpm) : 0.0),
      tokens_(capacity_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
    if (rate_per_s_ <= 0) return;
    std::unique_lock lock(mu_);
    for (;;) {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_s_);
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        const double wait_s = (1.0 - tokens_) / rate_per_s_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
    const auto path = dir_ / (key + ".json");
    std::lock_guard lock(mu_);
    if (!std::filesystem::exists(path)) return std::nullopt;
    const auto j = read_json_file(path);
    ChatResponse r;
    r.content = j.at("content").get<std::string>();
    r.finish_reason = parse_finish_reason(j.value("finish_reason", std::string("stop")));
    r.usage.prompt_tokens = j.value("prompt_tokens", 0);
    r.usage.completion_tokens = j.value("completion_tokens", 0);
    r.cached = true;
    return r;
}

void ResponseCache::put(const std::string& key, const ChatResponse& resp) {
    const json j = {{"schema_version", kSchemaVersion},
                    {"content", resp.content},
                    {"finish_reason", std::string(to_string(resp.finish_reason))},
                    {"prompt_tokens", resp.usage.prompt_tokens},
                    {"completion_tokens", resp.usage.completion_tokens}};
    std::lock_guard lock(mu_);
    write_json_file(dir_ / (key + ".json"), j);
}

void CallLog::append(CallLogEntry e) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(e));
}

void CallLog::append_all(const std::vector<CallLogEntry>& es) {
    std::lock_guard lock(mu_);
    entries_.insert(entries_.end(), es.begin(), es.end());
}

std::vector<CallLogEntry> CallLog::entries() const {
    std::lock_guard lock(mu_);
    return entries_;
}

std::size_t CallLog::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

// ---------------------------------------------------------------------------
// Gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions opts)
    : backend_(std::move(backend)), opts_(std::move(opts)), limiter_(opts_.rpm, opts_.burst) {
    if (!backend_) throw ConfigError("gateway needs a backend");
    if (opts_.retry_max < 0) throw ConfigError("retry_max must be >= 0");
    if (!opts_.cache_dir.empty()) cache_ = std::make_unique<ResponseCache>(opts_.cache_dir);
}

ChatResponse Gateway::complete(const ChatRequest& req, CallLog* log, int parse_attempt) {
    req.validate();
    const auto started = std::chrono::steady_clock::now();
    CallLogEntry entry;
    entry.agent_role = req.request_tag;
    entry.model_id = req.model_id;
    entry.prompt_hash = sha256_hex(req.rendered_prompt());
    entry.parse_attempt = parse_attempt;
    auto finish_log = [&](const ChatResponse* resp) {
        entry.latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
        if (resp) {
            entry.response_hash = sha256_hex(resp->content);
            entry.cached = resp->cached;
            entry.finish_reason = std::string(to_string(resp->finish_reason));
        } else {
            entry.finish_reason = "error";
        }
        if (log) log->append(entry);
    };

    std::string key;
    if (cache_) {
        key = cache_key(req);
        if (auto hit = cache_->get(key)) {
            finish_log(&*hit);
            return *hit;
        }
    }

    std::string last_error;
    for (int attempt = 0; attempt <= opts_.retry_max; ++attempt) {
        limiter_.acquire();
        ++attempts_;
        BackendReply reply = backend_->send(req);
        entry.retries = attempt;
        const bool transient = reply.status == 0 || reply.status == 429 || reply.status >= 500;
        if (transient) {
            last_error = reply.status == 0 ? reply.error : "status " + std::to_string(reply.status);
            if (attempt < opts_.retry_max && opts_.backoff_base_ms > 0)
                std::this_thread::sleep_for(
                    std::chrono::duration<double, std::milli>(opts_.backoff_base_ms * std::pow(2.0, attempt)));
            continue;
        }
        if (reply.status < 200 || reply.status >= 300) {
            finish_log(nullptr);
            throw BadStatus(reply.status, reply.error);
        }
        ChatResponse resp = std::move(reply.response);
        resp.cached = false;
        if (resp.content.empty()) resp.finish_reason = FinishReason::error;
        if (cache_ && resp.finish_reason != FinishReason::error) cache_->put(key, resp);
        finish_log(&resp);
        return resp;
    }
    finish_log(nullptr);
    throw TransportError("request '" + req.request_tag + "' failed after " + std::to_string(opts_.retry_max + 1) +
                             " attempts: " + last_error,
                         opts_.retry_max + 1);
}

std::shared_ptr<Backend> make_backend(const BackendConfig& cfg) {
    if (cfg.type == "mock") {
        if (cfg.playbook.empty()) throw ConfigError("mock backend " + cfg.name + " needs a playbook");
        return std::make_shared<MockBackend>(MockPlaybook::load(cfg.playbook));
    }
    return std::make_shared<HttpBackend>(cfg);
}

std::shared_ptr<Gateway> make_gateway(const BackendConfig& cfg) {
    GatewayOptions opts;
    opts.retry_max = cfg.retry_max;
    opts.backoff_base_ms = cfg.backoff_base_ms;
    opts.rpm = cfg.rpm;
    opts.cache_dir = cfg.cache_dir;
    return std::make_shared<Gateway>(make_backend(cfg), opts);
}

}  // namespace patentpipe

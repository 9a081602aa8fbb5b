#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "json.hpp"
#include "patentpipe/core.hpp"

namespace patentpipe {

// ============================================================================
// Requests and responses
// ============================================================================

enum class Role { system, user, assistant };
std::string_view to_string(Role r);

struct Message {
    Role role = Role::user;
    std::string content;
};

struct ChatRequest {
    std::string model_id;
    std::vector<Message> messages;
    double temperature = 0.5;
    double top_p = 0.9;
    int max_tokens = 4096;
    std::string request_tag;  // agent role; not part of the cache key
    std::optional<std::uint64_t> seed;

    // Throws InvalidRequest.
    void validate() const;
    // Every message body concatenated with blank lines; what mock rules match against.
    std::string rendered_prompt() const;
};

// Largest max_tokens accepted for a model id (prefix table, 32768 otherwise).
int max_tokens_limit(std::string_view model_id);

enum class FinishReason { stop, length, error };
std::string_view to_string(FinishReason f);
FinishReason parse_finish_reason(std::string_view s);

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
    Usage usage;
    bool cached = false;
};

// Stable SHA-256 over model, messages, temperature, top_p and max_tokens.
std::string cache_key(const ChatRequest& req);

// ============================================================================
// Backends
// ============================================================================

// One attempt against a backend. status 0 means the transport failed.
struct BackendReply {
    int status = 200;
    ChatResponse response;
    std::string error;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendReply send(const ChatRequest& req) = 0;
};

// Backend config file. The API key is read from the named env var only.
struct BackendConfig {
    std::string name = "default";
    std::string type = "openai";  // "openai" or "mock"
    std::string endpoint;         // e.g. https://api.openai.com/v1/chat/completions
    std::string api_key_env;
    std::string model_id;
    double rpm = 0;        // 0 disables rate limiting
    int retry_max = 3;
    double timeout_s = 120;
    double backoff_base_ms = 500;
    std::string playbook;  // mock only: path to the playbook file
    std::string cache_dir; // empty: no cache

    static BackendConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    nlohmann::json to_json() const;
};

// Chat-completions over HTTP(S): messages in, choices out.
class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig cfg);
    BackendReply send(const ChatRequest& req) override;

private:
    BackendConfig cfg_;
    std::string scheme_host_port_;
    std::string path_;
    std::string api_key_;
};

// A scripted reply: content, or a failing HTTP status, or a transport failure.
struct ScriptedReply {
    std::string content;
    int status = 200;
    bool transport_failure = false;
    std::string finish_reason = "stop";
};

struct PlaybookRule {
    enum class Kind { substring, regex };
    Kind kind = Kind::substring;
    std::string pattern;
    std::vector<ScriptedReply> responses;
};

/**
 * Ordered rules matched against the rendered prompt; the first rule that
 * matches answers. Repeat hits on a rule walk its responses in order and
 * then keep returning the last one.
 *
 * File form (JSON):
 *   {"schema_version": 1,
 *    "rules": [{"match": "patent title", "regex": false,
 *               "responses": ["<Title>X</Title>", {"status": 500}, {"transport_error": true}]}],
 *    "default_response": "..."}
 */
struct MockPlaybook {
    std::vector<PlaybookRule> rules;
    std::optional<std::string> default_response;

    static MockPlaybook from_json(const nlohmann::json& j);
    static MockPlaybook load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

class MockBackend final : public Backend {
public:
    explicit MockBackend(MockPlaybook playbook);
    BackendReply send(const ChatRequest& req) override;

    // Number of send() calls observed, i.e. simulated network attempts.
    std::size_t calls() const;
    // How many times each rule has answered.
    std::vector<std::size_t> rule_hits() const;

private:
    MockPlaybook playbook_;
    std::vector<std::regex> compiled_;
    std::vector<std::size_t> hits_;
    std::size_t calls_ = 0;
    mutable std::mutex mu_;
};

// ============================================================================
// Gateway
// ============================================================================

// Shared token bucket. rpm <= 0 disables it.
class RateLimiter {
public:
    explicit RateLimiter(double rpm, double burst = 0);
    void acquire();

private:
    double rate_per_s_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

// On-disk key/value store: one JSON file per cache key. Eviction is manual.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);
    std::optional<ChatResponse> get(const std::string& key) const;
    void put(const std::string& key, const ChatResponse& resp);
    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
};

// Append-only call log, safe to share between threads.
class CallLog {
public:
    void append(CallLogEntry e);
    void append_all(const std::vector<CallLogEntry>& es);
    std::vector<CallLogEntry> entries() const;
    std::size_t size() const;

private:
    std::vector<CallLogEntry> entries_;
    mutable std::mutex mu_;
};

struct GatewayOptions {
    int retry_max = 3;
    double backoff_base_ms = 500;
    double rpm = 0;
    double burst = 0;
    std::string cache_dir;  // empty disables the cache
};

/**
 * Uniform access to a chat backend: validation, rate limiting, cache,
 * retry with exponential backoff on transient failures (transport errors,
 * 429 and 5xx), and logging of each call.
 *
 * complete() is safe to call concurrently.
 */
class Gateway {
public:
    Gateway(std::shared_ptr<Backend> backend, GatewayOptions opts);

    // Throws TransportError once retries are exhausted, BadStatus on other
    // non-2xx statuses. finish_reason=length is returned, not thrown.
    ChatResponse complete(const ChatRequest& req, CallLog* log = nullptr, int parse_attempt = 0);

    // Attempts made against the backend, including retries.
    std::size_t backend_attempts() const noexcept { return attempts_.load(); }
    const GatewayOptions& options() const noexcept { return opts_; }

private:
    std::shared_ptr<Backend> backend_;
    GatewayOptions opts_;
    RateLimiter limiter_;
    std::unique_ptr<ResponseCache> cache_;
    std::atomic<std::size_t> attempts_{0};
};

// Builds the backend a config describes; mock playbooks are loaded from disk.
std::shared_ptr<Backend> make_backend(const BackendConfig& cfg);
std::shared_ptr<Gateway> make_gateway(const BackendConfig& cfg);

}  // namespace patentpipe

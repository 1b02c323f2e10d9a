#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/values.h"

namespace forge {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view s);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    int max_tokens = 1024;

    // Throws ConfigError on an empty message list, a misplaced system message,
    // empty system/user content or a negative temperature.
    void validate() const;
};

enum class BackendKind { Remote, Scripted };

struct BackendConfig {
    BackendKind kind = BackendKind::Scripted;
    std::string endpoint;            // remote: full URL of the chat-completions route
    std::string model_id;
    int retry_limit = 3;
    std::chrono::milliseconds timeout{60000};
    std::chrono::milliseconds backoff_base{250};
    std::string api_key_env;         // name of the environment variable holding the key
    std::filesystem::path transcript; // scripted: fingerprint -> replies
    std::optional<double> temperature; // role default when set
    std::filesystem::path record_to;   // remote: dump replies as a transcript after the run

    void validate() const;

    // Relative paths resolve against base_dir.
    static BackendConfig from_json(const json& j, const std::filesystem::path& base_dir = {});
};

// sha256 over (model_id, canonical messages, temperature, seed).
std::string request_fingerprint(std::string_view model_id, const CompletionRequest& req);

// Recorded replies keyed by request fingerprint. Safe for concurrent use.
class Transcript {
public:
    static Transcript load(const std::filesystem::path& path);
    static Transcript from_json(const json& j);

    json to_json() const;
    void save(const std::filesystem::path& path) const;

    void set(const std::string& fingerprint, std::vector<std::string> replies);
    // Keeps the longest reply list seen for a fingerprint.
    void merge(const std::string& fingerprint, const std::vector<std::string>& replies);
    std::optional<std::vector<std::string>> find(const std::string& fingerprint) const;
    std::size_t size() const;

    Transcript() = default;
    Transcript(const Transcript& other);
    Transcript& operator=(const Transcript& other);

private:
    mutable std::mutex mutex_;
    std::map<std::string, std::vector<std::string>> entries_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    // n completions for one request, in order.
    virtual std::vector<std::string> generate(const CompletionRequest& req, std::size_t n) = 0;
};

// Replays a transcript; a fingerprint without enough replies is a miss.
class ScriptedBackend : public ChatBackend {
public:
    ScriptedBackend(std::shared_ptr<const Transcript> transcript, std::string model_id);
    std::vector<std::string> generate(const CompletionRequest& req, std::size_t n) override;

private:
    std::shared_ptr<const Transcript> transcript_;
    std::string model_id_;
};

// Deterministic in-process responder (fixtures, record runs).
class FunctionBackend : public ChatBackend {
public:
    using Fn = std::function<std::vector<std::string>(const CompletionRequest&, std::size_t)>;
    explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
    std::vector<std::string> generate(const CompletionRequest& req, std::size_t n) override {
        return fn_(req, n);
    }

private:
    Fn fn_;
};

// OpenAI-style chat-completions over HTTP(S) with retry and exponential backoff.
class RemoteBackend : public ChatBackend {
public:
    explicit RemoteBackend(BackendConfig cfg);
    std::vector<std::string> generate(const CompletionRequest& req, std::size_t n) override;

private:
    BackendConfig cfg_;
};

// Caps the number of requests in flight across every gateway in the process.
class InflightLimiter {
public:
    explicit InflightLimiter(std::size_t limit) : limit_(limit) {}
    static InflightLimiter& global();

    void set_limit(std::size_t limit);
    std::size_t limit() const;
    void acquire();
    void release();

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t limit_;
    std::size_t in_flight_ = 0;
};

// One named LLM role (user-proxy, assistant, voter, judge, ...).
class Gateway {
public:
    explicit Gateway(const BackendConfig& cfg);
    Gateway(std::shared_ptr<ChatBackend> backend, std::string model_id);

    const std::string& model_id() const { return model_id_; }
    std::optional<double> default_temperature() const { return temperature_; }

    std::string complete(const CompletionRequest& req) const;
    std::vector<std::string> sample_n(const CompletionRequest& req, std::size_t n) const;

    // Every reply from now on is also written into `sink`.
    void record_into(std::shared_ptr<Transcript> sink) { recorder_ = std::move(sink); }
    std::shared_ptr<Transcript> recorder() const { return recorder_; }

    void set_limiter(InflightLimiter* limiter) { limiter_ = limiter; }

private:
    std::shared_ptr<ChatBackend> backend_;
    std::string model_id_;
    std::optional<double> temperature_;
    std::shared_ptr<Transcript> recorder_;
    InflightLimiter* limiter_ = &InflightLimiter::global();
};

std::string complete(const BackendConfig& cfg, const CompletionRequest& req);
std::vector<std::string> sample_n(const BackendConfig& cfg, const CompletionRequest& req, std::size_t n);

// POSTs {"model", "input"} to an OpenAI-style embeddings route.
std::vector<double> remote_embedding(const BackendConfig& cfg, std::string_view text);

} // namespace forge

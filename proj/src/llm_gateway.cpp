#include "forge/llm_gateway.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

#include "forge/catalogue.h"
#include "forge/error.h"
#include "forge/hashing.h"

namespace forge {

namespace {

struct Url {
    std::string origin; // scheme://host[:port]
    std::string path;
};

Url split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must be an absolute URL: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool is_transient_status(int status) { return status == 429 || status >= 500; }

// One JSON POST with the configured retry policy.
json post_json(const BackendConfig& cfg, const json& body) {
    const Url url = split_url(cfg.endpoint);
    httplib::Headers headers;
    if (!cfg.api_key_env.empty()) {
        if (const char* key = std::getenv(cfg.api_key_env.c_str())) {
            headers.emplace("Authorization", std::string("Bearer ") + key);
        }
    }
    const std::string payload = body.dump();
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);

    std::string last_error;
    bool last_was_timeout = false;
    for (int attempt = 0; attempt <= cfg.retry_limit; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(cfg.backoff_base * (1LL << (attempt - 1)));
        }
        httplib::Client client(url.origin);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(url.path, headers, payload, "application/json");
        if (!res) {
            const auto elapsed = std::chrono::steady_clock::now() - started;
            last_was_timeout = res.error() == httplib::Error::ConnectionTimeout ||
                               elapsed >= cfg.timeout;
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 200 && res->status < 300) {
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw GatewayError("malformed response body from " + cfg.endpoint + ": " + e.what());
            }
        }
        last_was_timeout = false;
        last_error = "HTTP " + std::to_string(res->status);
        if (!is_transient_status(res->status)) {
            throw GatewayError(cfg.endpoint + " rejected request: " + last_error + " " + res->body);
        }
    }
    const std::string msg = cfg.endpoint + ": gave up after " + std::to_string(cfg.retry_limit + 1) +
                            " attempts (" + last_error + ")";
    if (last_was_timeout) throw TimeoutError(msg);
    throw RetriesExhaustedError(msg);
}

std::shared_ptr<ChatBackend> make_backend(const BackendConfig& cfg) {
    cfg.validate();
    if (cfg.kind == BackendKind::Remote) return std::make_shared<RemoteBackend>(cfg);
    auto transcript = std::make_shared<Transcript>(Transcript::load(cfg.transcript));
    return std::make_shared<ScriptedBackend>(std::move(transcript), cfg.model_id);
}

} // namespace

std::string_view to_string(Role role) {
    switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw ParseError("unknown role '" + std::string(s) + "'");
}

void CompletionRequest::validate() const {
    if (messages.empty()) throw ConfigError("completion request without messages");
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const auto& m = messages[i];
        if (m.role == Role::System && i != 0) throw ConfigError("system message must come first");
        if (m.role != Role::Assistant && m.content.empty()) {
            throw ConfigError("empty " + std::string(to_string(m.role)) + " message");
        }
    }
    if (temperature < 0.0) throw ConfigError("negative temperature");
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
}

void BackendConfig::validate() const {
    if (kind == BackendKind::Remote && endpoint.empty()) throw ConfigError("remote backend needs an endpoint");
    if (kind == BackendKind::Scripted && transcript.empty()) {
        throw ConfigError("scripted backend needs a transcript path");
    }
    if (retry_limit < 0 || retry_limit > 10) throw ConfigError("retry_limit must be within [0, 10]");
    if (model_id.empty()) throw ConfigError("backend needs a model_id");
}

BackendConfig BackendConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigError("backend config must be an object");
    BackendConfig cfg;
    const auto kind = j.value("kind", std::string("scripted"));
    if (kind == "remote") {
        cfg.kind = BackendKind::Remote;
    } else if (kind == "scripted") {
        cfg.kind = BackendKind::Scripted;
    } else {
        throw ConfigError("unknown backend kind '" + kind + "'");
    }
    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        if (p.empty()) return {};
        std::filesystem::path path(p);
        return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
    };
    cfg.endpoint = j.value("endpoint", std::string());
    cfg.model_id = j.value("model_id", std::string());
    cfg.retry_limit = j.value("retry_limit", 3);
    cfg.timeout = std::chrono::milliseconds(j.value("timeout_ms", 60000));
    cfg.backoff_base = std::chrono::milliseconds(j.value("backoff_ms", 250));
    cfg.api_key_env = j.value("api_key_env", std::string());
    cfg.transcript = resolve(j.value("transcript", std::string()));
    cfg.record_to = resolve(j.value("record_to", std::string()));
    if (j.contains("temperature")) cfg.temperature = j.at("temperature").get<double>();
    if (j.contains("api_key")) throw ConfigError("credentials belong in the environment, not in config files");
    cfg.validate();
    return cfg;
}

std::string request_fingerprint(std::string_view model_id, const CompletionRequest& req) {
    json msgs = json::array();
    for (const auto& m : req.messages) msgs.push_back({to_string(m.role), m.content});
    const json canon = {std::string(model_id), msgs, req.temperature,
                        req.seed ? json(*req.seed) : json(nullptr)};
    return sha256_hex(canon.dump());
}

Transcript::Transcript(const Transcript& other) {
    std::lock_guard lock(other.mutex_);
    entries_ = other.entries_;
}

Transcript& Transcript::operator=(const Transcript& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    entries_ = other.entries_;
    return *this;
}

Transcript Transcript::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("transcript " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

Transcript Transcript::from_json(const json& j) {
    if (!j.is_object()) throw ParseError("transcript must be an object of fingerprint -> replies");
    Transcript t;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!it.value().is_array()) throw ParseError("transcript entry must be a list of replies");
        t.entries_[it.key()] = it.value().get<std::vector<std::string>>();
    }
    return t;
}

json Transcript::to_json() const {
    std::lock_guard lock(mutex_);
    json j = json::object();
    for (const auto& [k, v] : entries_) j[k] = v;
    return j;
}

void Transcript::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

void Transcript::set(const std::string& fingerprint, std::vector<std::string> replies) {
    std::lock_guard lock(mutex_);
    entries_[fingerprint] = std::move(replies);
}

void Transcript::merge(const std::string& fingerprint, const std::vector<std::string>& replies) {
    std::lock_guard lock(mutex_);
    auto& slot = entries_[fingerprint];
    if (replies.size() > slot.size()) slot = replies;
}

std::optional<std::vector<std::string>> Transcript::find(const std::string& fingerprint) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(fingerprint);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

ScriptedBackend::ScriptedBackend(std::shared_ptr<const Transcript> transcript, std::string model_id)
    : transcript_(std::move(transcript)), model_id_(std::move(model_id)) {}

std::vector<std::string> ScriptedBackend::generate(const CompletionRequest& req, std::size_t n) {
    const auto fp = request_fingerprint(model_id_, req);
    auto replies = transcript_->find(fp);
    if (!replies) throw TranscriptMissError("no scripted reply for request " + fp + " (model " + model_id_ + ")");
    if (replies->size() < n) {
        throw TranscriptMissError("request " + fp + " has " + std::to_string(replies->size()) +
                                  " scripted replies, " + std::to_string(n) + " requested");
    }
    replies->resize(n);
    return *replies;
}

RemoteBackend::RemoteBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {}

std::vector<std::string> RemoteBackend::generate(const CompletionRequest& req, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        json msgs = json::array();
        for (const auto& m : req.messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
        json body = {{"model", cfg_.model_id},
                     {"messages", msgs},
                     {"temperature", req.temperature},
                     {"max_tokens", req.max_tokens}};
        if (req.seed) body["seed"] = *req.seed + static_cast<std::int64_t>(i);
        const json res = post_json(cfg_, body);
        try {
            out.push_back(res.at("choices").at(0).at("message").at("content").get<std::string>());
        } catch (const json::exception& e) {
            throw GatewayError("unexpected completion payload from " + cfg_.endpoint + ": " + e.what());
        }
    }
    return out;
}

InflightLimiter& InflightLimiter::global() {
    static InflightLimiter limiter(8);
    return limiter;
}

void InflightLimiter::set_limit(std::size_t limit) {
    {
        std::lock_guard lock(mutex_);
        limit_ = limit == 0 ? 1 : limit;
    }
    cv_.notify_all();
}

std::size_t InflightLimiter::limit() const {
    std::lock_guard lock(mutex_);
    return limit_;
}

void InflightLimiter::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
}

void InflightLimiter::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

Gateway::Gateway(const BackendConfig& cfg)
    : backend_(make_backend(cfg)), model_id_(cfg.model_id), temperature_(cfg.temperature) {
    if (!cfg.record_to.empty()) recorder_ = std::make_shared<Transcript>();
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, std::string model_id)
    : backend_(std::move(backend)), model_id_(std::move(model_id)) {}

std::string Gateway::complete(const CompletionRequest& req) const { return sample_n(req, 1).front(); }

std::vector<std::string> Gateway::sample_n(const CompletionRequest& req, std::size_t n) const {
    if (n == 0) throw ConfigError("sample_n needs n >= 1");
    req.validate();
    struct Slot {
        InflightLimiter* l;
        explicit Slot(InflightLimiter* lim) : l(lim) { if (l) l->acquire(); }
        ~Slot() { if (l) l->release(); }
    } slot(limiter_);
    auto replies = backend_->generate(req, n);
    if (replies.size() != n) throw GatewayError("backend returned a wrong number of completions");
    if (recorder_) recorder_->merge(request_fingerprint(model_id_, req), replies);
    return replies;
}

std::string complete(const BackendConfig& cfg, const CompletionRequest& req) { return Gateway(cfg).complete(req); }

std::vector<std::string> sample_n(const BackendConfig& cfg, const CompletionRequest& req, std::size_t n) {
    return Gateway(cfg).sample_n(req, n);
}

std::vector<double> remote_embedding(const BackendConfig& cfg, std::string_view text) {
    if (cfg.kind != BackendKind::Remote) throw ConfigError("remote_embedding needs a remote backend");
    const json res = post_json(cfg, {{"model", cfg.model_id}, {"input", std::string(text)}});
    try {
        return res.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw GatewayError("unexpected embedding payload from " + cfg.endpoint + ": " + e.what());
    }
}

} // namespace forge

#include "forge/embedding.h"

#include <cctype>
#include <cmath>
#include <fstream>

#include "forge/catalogue.h"
#include "forge/error.h"
#include "forge/hashing.h"
#include "forge/log.h"

namespace forge {

namespace {
constexpr int kCacheFormatVersion = 1;
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<std::string> hash_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c >= 0x80) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw Error("dimension mismatch in inner product");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void l2_normalize(Vector& v) {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    if (n > 0.0) {
        for (double& x : v) x /= n;
    }
}

HashEmbedder::HashEmbedder(std::size_t dimension) : dim_(dimension) {
    if (dim_ == 0) throw ConfigError("embedding dimension must be positive");
}

Vector HashEmbedder::embed(std::string_view text) const {
    Vector v(dim_, 0.0);
    for (const auto& tok : hash_tokens(text)) v[fnv1a64(tok) % dim_] += 1.0;
    l2_normalize(v);
    return v;
}

std::string HashEmbedder::id() const { return "hash-bow-fnv1a-" + std::to_string(dim_); }

RemoteEmbedder::RemoteEmbedder(BackendConfig cfg, std::size_t dimension)
    : cfg_(std::move(cfg)), dim_(dimension) {
    if (cfg_.kind != BackendKind::Remote) throw ConfigError("remote embedder needs a remote backend config");
}

Vector RemoteEmbedder::embed(std::string_view text) const {
    Vector v = remote_embedding(cfg_, text);
    if (v.size() != dim_) {
        throw GatewayError("embedding endpoint returned dimension " + std::to_string(v.size()) +
                           ", expected " + std::to_string(dim_));
    }
    l2_normalize(v);
    return v;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<const Embedder> inner) : inner_(std::move(inner)) {}

Vector CachingEmbedder::embed(std::string_view text) const {
    const auto key = sha256_hex(text);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    Vector v = inner_->embed(text);
    std::lock_guard lock(mutex_);
    // Concurrent misses on one key compute identical vectors; first insert wins.
    return cache_.emplace(key, std::move(v)).first->second;
}

std::size_t CachingEmbedder::cached() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
}

std::size_t CachingEmbedder::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("embedding cache " + path.string() + ": " + e.what());
    }
    if (j.value("embedder_id", std::string()) != inner_->id() || j.value("version", 0) != kCacheFormatVersion) {
        log_warn("ignoring embedding cache " + path.string() + " written by another embedder");
        return 0;
    }
    std::size_t loaded = 0;
    std::lock_guard lock(mutex_);
    for (auto it = j.at("entries").begin(); it != j.at("entries").end(); ++it) {
        auto v = it.value().get<Vector>();
        if (v.size() != inner_->dimension()) continue;
        cache_.emplace(it.key(), std::move(v));
        ++loaded;
    }
    return loaded;
}

void CachingEmbedder::save(const std::filesystem::path& path) const {
    json entries = json::object();
    {
        std::lock_guard lock(mutex_);
        for (const auto& [k, v] : cache_) entries[k] = v;
    }
    const json j = {{"version", kCacheFormatVersion},
                    {"embedder_id", inner_->id()},
                    {"dimension", inner_->dimension()},
                    {"entries", entries}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump() << '\n';
}

} // namespace forge

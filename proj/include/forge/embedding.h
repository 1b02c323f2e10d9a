#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/llm_gateway.h"

namespace forge {

using Vector = std::vector<double>;

// Frozen text encoder: the same text always maps to the same vector.
// Implementations must tolerate concurrent embed() calls.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Vector embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
    virtual std::string id() const = 0;
};

// Lowercased alphanumeric tokens, each hashed (FNV-1a) into one of `dimension`
// buckets, counted, then L2-normalized. Bytes >= 0x80 count as word characters.
class HashEmbedder : public Embedder {
public:
    explicit HashEmbedder(std::size_t dimension = 256);
    Vector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dim_; }
    std::string id() const override;

private:
    std::size_t dim_;
};

std::vector<std::string> hash_tokens(std::string_view text);
std::uint64_t fnv1a64(std::string_view s);

// Embeddings served by an OpenAI-style endpoint through the gateway.
class RemoteEmbedder : public Embedder {
public:
    RemoteEmbedder(BackendConfig cfg, std::size_t dimension);
    Vector embed(std::string_view text) const override;
    std::size_t dimension() const override { return dim_; }
    std::string id() const override { return "remote:" + cfg_.model_id; }

private:
    BackendConfig cfg_;
    std::size_t dim_;
};

// Memoizes another embedder keyed by sha256(text); optional on-disk cache
// tagged with the wrapped embedder's id.
class CachingEmbedder : public Embedder {
public:
    explicit CachingEmbedder(std::shared_ptr<const Embedder> inner);

    Vector embed(std::string_view text) const override;
    std::size_t dimension() const override { return inner_->dimension(); }
    std::string id() const override { return inner_->id(); }

    std::size_t cached() const;
    // Entries from a cache written by a different embedder are ignored; returns
    // the number of entries loaded.
    std::size_t load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

private:
    std::shared_ptr<const Embedder> inner_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::string, Vector> cache_;
};

double dot(const Vector& a, const Vector& b);
void l2_normalize(Vector& v);

} // namespace forge

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "forge/catalogue.h"
#include "forge/embedding.h"

namespace forge {

inline constexpr std::size_t kDefaultDistractors = 5;

struct ScoredTool {
    std::string name;
    double score = 0.0;

    bool operator==(const ScoredTool&) const = default;
};

struct DistractorSet {
    std::string seed;
    std::vector<ScoredTool> members; // descending score, ties by ascending name

    std::vector<std::string> names() const;
};

// "name\ndescription\np1: desc1\np2: desc2..." in catalogue order.
std::string tool_text(const Tool& tool);

// Indices of the k highest scores, ties broken by ascending index.
std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k);

// Exact inner-product index over every tool of a catalogue.
class ToolIndex {
public:
    ToolIndex(const Catalogue& catalogue, const Embedder& embedder);

    const Catalogue& catalogue() const { return *catalogue_; }

    // Top-k over all tools except `exclude` (may be empty).
    std::vector<ScoredTool> search(const Vector& query, std::size_t k, std::string_view exclude = {}) const;
    std::vector<ScoredTool> search_text(std::string_view text, std::size_t k) const;

    DistractorSet nearest_distractors(std::string_view seed, std::size_t k) const;

    const Vector& vector_of(std::size_t position) const { return vectors_[position]; }

private:
    const Catalogue* catalogue_;
    const Embedder* embedder_;
    std::vector<Vector> vectors_;
};

DistractorSet nearest_distractors(const Catalogue& catalogue, std::string_view seed, std::size_t k,
                                  const Embedder& embedder);

// {seed} ∪ members in a seeded random order, so the seed's slot is uniform.
std::vector<std::string> candidate_pool(std::string_view seed, const DistractorSet& distractors,
                                        std::uint64_t rng_seed);

} // namespace forge

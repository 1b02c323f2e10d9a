#include "forge/retrieval.h"

#include <algorithm>
#include <numeric>

#include "forge/error.h"
#include "forge/rng.h"

namespace forge {

std::vector<std::string> DistractorSet::names() const {
    std::vector<std::string> out;
    out.reserve(members.size());
    for (const auto& m : members) out.push_back(m.name);
    return out;
}

std::string tool_text(const Tool& tool) {
    std::string text = tool.name + "\n" + tool.description;
    for (const auto& [name, spec] : tool.params) text += "\n" + name + ": " + spec.description;
    return text;
}

std::vector<std::size_t> top_k_indices(const std::vector<double>& scores, std::size_t k) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b]) return scores[a] > scores[b];
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

ToolIndex::ToolIndex(const Catalogue& catalogue, const Embedder& embedder)
    : catalogue_(&catalogue), embedder_(&embedder) {
    vectors_.reserve(catalogue.size());
    for (const auto& tool : catalogue.tools()) vectors_.push_back(embedder.embed(tool_text(tool)));
}

std::vector<ScoredTool> ToolIndex::search(const Vector& query, std::size_t k, std::string_view exclude) const {
    std::vector<ScoredTool> scored;
    scored.reserve(vectors_.size());
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
        const auto& name = (*catalogue_)[i].name;
        if (!exclude.empty() && name == exclude) continue;
        scored.push_back({name, dot(query, vectors_[i])});
    }
    const auto by_rank = [](const ScoredTool& a, const ScoredTool& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.name < b.name;
    };
    k = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), by_rank);
    scored.resize(k);
    return scored;
}

std::vector<ScoredTool> ToolIndex::search_text(std::string_view text, std::size_t k) const {
    return search(embedder_->embed(text), k);
}

DistractorSet ToolIndex::nearest_distractors(std::string_view seed, std::size_t k) const {
    if (k == 0) throw ConfigError("k must be positive");
    const auto pos = catalogue_->position(seed);
    if (!pos) throw UnknownToolError("unknown seed tool '" + std::string(seed) + "'");
    return {std::string(seed), search(vectors_[*pos], k, seed)};
}

DistractorSet nearest_distractors(const Catalogue& catalogue, std::string_view seed, std::size_t k,
                                  const Embedder& embedder) {
    if (!catalogue.find(seed)) throw UnknownToolError("unknown seed tool '" + std::string(seed) + "'");
    return ToolIndex(catalogue, embedder).nearest_distractors(seed, k);
}

std::vector<std::string> candidate_pool(std::string_view seed, const DistractorSet& distractors,
                                        std::uint64_t rng_seed) {
    if (distractors.seed != seed) throw Error("distractor set belongs to another seed tool");
    std::vector<std::string> pool{std::string(seed)};
    for (const auto& m : distractors.members) pool.push_back(m.name);
    Rng rng(rng_seed);
    rng.shuffle(pool);
    return pool;
}

} // namespace forge

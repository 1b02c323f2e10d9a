#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forge/catalogue.h"
#include "forge/embedding.h"
#include "forge/llm_gateway.h"
#include "forge/retrieval.h"

namespace forge {

inline constexpr std::size_t kDefaultPersonaK = 10;
inline constexpr int kGenerationAttempts = 3;

// Persona texts with their embeddings precomputed.
class PersonaStore {
public:
    PersonaStore(std::vector<std::string> personas, const Embedder& embedder);

    const std::vector<std::string>& personas() const { return personas_; }
    std::size_t size() const { return personas_.size(); }
    // Indices of the k personas most similar to `query`.
    std::vector<std::size_t> top_k(const Vector& query, std::size_t k) const;
    const Embedder& embedder() const { return *embedder_; }

private:
    std::vector<std::string> personas_;
    const Embedder* embedder_;
    std::vector<Vector> vectors_;
};

std::vector<std::string> load_personas(const std::filesystem::path& path);
const std::vector<std::string>& bundled_personas();

struct Scenario {
    std::string id;
    std::string seed_tool;
    std::string persona;
    std::string goal;
    DistractorSet distractors;
    std::vector<std::string> pool; // presentation order
    json gold_args = json::object();
    std::uint64_t rng_seed = 0;
};

json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const json& j);
std::vector<Scenario> read_scenarios(const std::filesystem::path& path);

// Top-k personas by similarity to tool_text(seed_tool), one picked uniformly.
std::string sample_persona(const PersonaStore& store, const Tool& seed_tool, std::size_t k, std::uint64_t rng_seed);

// Whole-word occurrences of the tool name or any parameter name.
std::vector<std::string> leaked_identifiers(std::string_view text, const Tool& tool);

// One-sentence goal; regenerates on identifier leaks (GoalLeakError after
// kGenerationAttempts).
std::string sample_goal(const Gateway& gw, const Tool& seed_tool, std::string_view persona, std::uint64_t seed = 0);

// Exactly one value per required argument, each of its declared type.
// Integer/number parameters also accept numeric strings, normalized to numbers.
json sample_gold_args(const Gateway& gw, const Tool& seed_tool, std::string_view persona, std::uint64_t seed = 0);

// Returns an empty string when `args` is acceptable for the tool's required
// set, otherwise a description of the first problem. Normalizes numeric strings.
std::string check_gold_args(const Tool& tool, json& args);

struct ScenarioSources {
    const Catalogue& catalogue;
    const ToolIndex& index;
    const PersonaStore& personas;
    const Gateway& goal_generator;
    const Gateway& slot_generator;
    std::size_t k = kDefaultDistractors;
    std::size_t persona_k = kDefaultPersonaK;
};

Scenario build_scenario(const ScenarioSources& src, std::string_view seed_tool, std::uint64_t rng_seed);

// Request seeds are kept in 31 bits for remote APIs.
std::int64_t request_seed(std::uint64_t seed);

} // namespace forge

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/catalogue.h"
#include "forge/embedding.h"
#include "forge/engine.h"
#include "forge/eval.h"
#include "forge/llm_gateway.h"
#include "forge/scenario.h"
#include "forge/validator.h"

namespace forge {

// Backend roles used by generation.
namespace roles {
inline constexpr const char* kUser = "user";
inline constexpr const char* kAssistant = "assistant";
inline constexpr const char* kGoal = "goal_generator";
inline constexpr const char* kSlots = "slot_generator";
inline constexpr const char* kRelevancy = "relevancy_judge";
inline constexpr const char* kCritique = "critique_judge";
inline constexpr const char* kVoter = "voter";
inline constexpr const char* kJudge = "judge";
inline constexpr const char* kDefault = "default";
} // namespace roles

struct EmbedderConfig {
    std::string kind = "hash"; // hash | remote
    std::size_t dimension = 256;
    std::optional<BackendConfig> backend;
    std::filesystem::path cache;
};

struct PipelineConfig {
    std::filesystem::path catalogue;
    std::filesystem::path personas; // empty: bundled personas
    std::map<std::string, BackendConfig> backends;
    EmbedderConfig embedder;
    std::size_t k = kDefaultDistractors;
    std::size_t persona_k = kDefaultPersonaK;
    EngineConfig engine;
    std::filesystem::path output_dir = "out";
    std::uint64_t rng_seed = 0;
    std::size_t workers = 1;
    std::size_t max_inflight = 8;
    std::vector<std::string> seed_tools; // empty: every catalogue tool
    bool llm_validation = true;
    bool record_timings = true;

    // Relative paths resolve against the config file's directory. Throws ConfigError.
    static PipelineConfig load(const std::filesystem::path& path);
    static PipelineConfig from_json(const json& j, const std::filesystem::path& base_dir);

    // Falls back to the "default" backend. Throws ConfigError.
    const BackendConfig& backend(const std::string& role) const;
};

// Gateways by role. Tests inject in-process backends through `set`.
class GatewaySet {
public:
    GatewaySet() = default;
    // One gateway per configured backend; roles without their own entry share
    // the default gateway.
    static GatewaySet from_config(const std::map<std::string, BackendConfig>& backends);

    void set(const std::string& role, std::shared_ptr<Gateway> gw);
    bool has(const std::string& role) const;
    const Gateway& get(const std::string& role) const; // throws ConfigError
    // Writes every recorder transcript to its configured record_to path.
    void save_recordings() const;

private:
    std::map<std::string, std::shared_ptr<Gateway>> by_role_;
    std::map<std::string, std::filesystem::path> record_paths_;
};

std::shared_ptr<const Embedder> make_embedder(const EmbedderConfig& cfg);

enum class DialogueStatus { Accepted, Rejected, Failed };

struct DialogueOutcome {
    std::string seed_tool;
    DialogueStatus status = DialogueStatus::Failed;
    std::optional<Scenario> scenario;
    std::optional<DialogueTrace> trace;
    std::optional<ValidationReport> report;
    std::optional<Rejection> rejection; // synthesis-stage rejection
    std::string error;
};

struct GenerateSummary {
    std::size_t seeds = 0, accepted = 0, rejected = 0, failed = 0;
    std::vector<DialogueOutcome> outcomes; // seed order

    ordered_json to_json() const; // counts only
};

// Per-seed scenario -> synthesis -> cascade. Results come back in seed order
// whatever the worker count.
GenerateSummary generate(const PipelineConfig& cfg, const Catalogue& catalogue, const GatewaySet& gateways,
                         const std::vector<std::string>& seed_tools);

// corpus.jsonl, rejected.jsonl, reports.jsonl, scenarios.jsonl, errors.jsonl, summary.json
void write_generate_outputs(const GenerateSummary& summary, const std::filesystem::path& dir, bool with_timings);

std::uint64_t dialogue_seed(std::uint64_t run_seed, std::string_view seed_tool);

struct BenchConfig {
    std::filesystem::path catalogue;
    std::filesystem::path scenarios;
    std::filesystem::path gold_corpus; // static mode
    EvalMode mode = EvalMode::Dynamic;
    std::map<std::string, BackendConfig> backends; // assistant, user, voter, judge
    VotingConfig voting;
    std::size_t t_max = 12;
    std::size_t workers = 1;
    double assistant_temperature = 0.0;
    std::set<std::string> exclude;
    std::filesystem::path output_dir = "bench";
    std::string label = "assistant";

    static BenchConfig load(const std::filesystem::path& path);
    static BenchConfig from_json(const json& j, const std::filesystem::path& base_dir);
};

// traces.jsonl, report.json, report.csv and audit/<n>.json per dialogue.
BenchResult bench_run(const BenchConfig& cfg, const GatewaySet& gateways);
void write_bench_outputs(const BenchResult& res, const BenchConfig& cfg);

} // namespace forge

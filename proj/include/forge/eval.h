#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/catalogue.h"
#include "forge/dialogue.h"
#include "forge/llm_gateway.h"
#include "forge/metrics.h"
#include "forge/scenario.h"

namespace forge {

enum class EvalMode { Static, Dynamic };
std::string_view to_string(EvalMode m);
EvalMode parse_eval_mode(std::string_view s);

struct EvalTask {
    Scenario scenario;
    std::optional<DialogueTrace> gold; // static mode only
    EvalMode mode = EvalMode::Dynamic;

    void validate() const; // throws ConfigError
};

struct VotingConfig {
    std::size_t n_samples = 3;
    std::size_t m_voters = 3;
    std::string pool_fn = "mode";
    double generator_temperature = 0.7;
    std::uint64_t rng_seed = 0;

    void validate() const; // throws ConfigError
};

struct VotingAgents {
    const Gateway& generator; // user-proxy
    const Gateway& voter;
};

// order[q] is the original candidate index shown at position q. A vote is the
// 1-based position a voter picked, or nullopt if unusable.
struct Ballot {
    std::vector<std::size_t> order;
    std::optional<std::size_t> position;
};

struct PoolResult {
    std::size_t chosen = 0;                   // 0-based original index
    std::vector<std::size_t> votes;           // original indices of counted votes
    bool fallback = false;                    // every vote discarded
};

// Maps each usable ballot back to an original index and takes the mode,
// ties going to the lowest index. Out-of-range positions are discarded.
PoolResult pool_votes(std::size_t n_candidates, const std::vector<Ballot>& ballots);

// Permutation shown to voter j for a given utterance seed.
std::vector<std::size_t> voter_order(std::uint64_t utterance_seed, std::size_t voter, std::size_t n);

// First integer in a voter reply, if any.
std::optional<std::size_t> parse_vote(std::string_view reply);

struct VoteOutcome {
    std::string text;
    std::vector<std::string> candidates;
    std::vector<Ballot> ballots;
    PoolResult pooled;
};

struct UserContext {
    std::string system_prompt; // user-proxy prompt for this scenario
    std::string persona;
    std::string goal;
};

// n candidates from the generator, m permuted ballots, mode pooling.
VoteOutcome vote_utterance(const UserContext& uctx, const std::vector<TraceMessage>& history,
                           const VotingAgents& agents, const VotingConfig& vcfg, std::uint64_t utterance_seed);

struct AssistantUnderTest {
    const Gateway& gateway;
    double temperature = 0.0;
};

// Decodes one assistant turn per gold user turn, keeping the gold user side
// and the assistant's own earlier replies. Unparseable output is recorded as
// a malformed turn.
DialogueTrace eval_static(const EvalTask& task, const Catalogue& catalogue, const AssistantUnderTest& assistant);

// On-policy rollout of at most t_max pairs; stops at the first tool call.
DialogueTrace eval_dynamic(const Scenario& scn, const Catalogue& catalogue, const AssistantUnderTest& assistant,
                           const VotingAgents& agents, const VotingConfig& vcfg, std::size_t t_max = 12);

struct BenchOptions {
    std::size_t t_max = 12;
    std::size_t workers = 1;
    std::set<std::string> exclude; // dialogue ids left out of scoring
    const Gateway* judge = nullptr;
};

struct BenchResult {
    std::vector<DialogueTrace> traces; // every task, excluded ones included
    std::vector<Reference> refs;
    MetricReport report;
    std::size_t excluded = 0;
};

// Throws Error on an empty task list, and ConfigError when a dynamic task is
// run without voting agents.
BenchResult run_benchmark(const std::vector<EvalTask>& tasks, const Catalogue& catalogue,
                          const AssistantUnderTest& assistant, const VotingAgents* agents, const VotingConfig& vcfg,
                          const BenchOptions& opts);

} // namespace forge

#include "forge/eval.h"

#include <cctype>

#include "forge/engine.h"
#include "forge/error.h"
#include "forge/log.h"
#include "forge/parallel.h"
#include "forge/prompts.h"
#include "forge/rng.h"

namespace forge {

namespace {

AssistantTurn decode(const AssistantUnderTest& a, const std::vector<ChatMessage>& messages, std::uint64_t seed) {
    CompletionRequest req;
    req.messages = messages;
    req.temperature = a.temperature;
    req.seed = request_seed(seed);
    const auto raw = a.gateway.complete(req);
    try {
        return parse_assistant_output(raw);
    } catch (const FormatError&) {
        AssistantTurn bad;
        bad.malformed = true;
        bad.content = raw;
        return bad;
    }
}

std::string voter_history(const std::vector<TraceMessage>& history) {
    std::string out;
    for (const auto& m : history) {
        out += m.role == Role::User ? "User: " + m.text : "Assistant: " + public_payload(m.assistant);
        out += '\n';
    }
    return out.empty() ? "(no messages yet)\n" : out;
}

} // namespace

std::string_view to_string(EvalMode m) { return m == EvalMode::Static ? "static" : "dynamic"; }

EvalMode parse_eval_mode(std::string_view s) {
    if (s == "static") return EvalMode::Static;
    if (s == "dynamic") return EvalMode::Dynamic;
    throw ConfigError("mode must be static or dynamic, got '" + std::string(s) + "'");
}

void EvalTask::validate() const {
    if (mode == EvalMode::Static && !gold) throw ConfigError("static task " + scenario.id + " has no gold dialogue");
}

void VotingConfig::validate() const {
    if (n_samples < 1) throw ConfigError("n_samples must be at least 1");
    if (m_voters < 1) throw ConfigError("m_voters must be at least 1");
    if (pool_fn != "mode") throw ConfigError("unsupported pooling function '" + pool_fn + "'");
}

PoolResult pool_votes(std::size_t n_candidates, const std::vector<Ballot>& ballots) {
    PoolResult res;
    std::vector<std::size_t> counts(n_candidates, 0);
    for (const auto& b : ballots) {
        if (!b.position || *b.position < 1 || *b.position > b.order.size()) continue;
        const auto original = b.order[*b.position - 1];
        if (original >= n_candidates) continue;
        ++counts[original];
        res.votes.push_back(original);
    }
    if (res.votes.empty()) {
        res.fallback = true;
        return res;
    }
    for (std::size_t i = 1; i < n_candidates; ++i) {
        if (counts[i] > counts[res.chosen]) res.chosen = i;
    }
    return res;
}

std::vector<std::size_t> voter_order(std::uint64_t utterance_seed, std::size_t voter, std::size_t n) {
    return Rng(derive_seed(derive_seed(utterance_seed, "voter"), voter)).permutation(n);
}

std::optional<std::size_t> parse_vote(std::string_view reply) {
    std::size_t i = 0;
    while (i < reply.size() && !std::isdigit(static_cast<unsigned char>(reply[i]))) ++i;
    if (i == reply.size()) return std::nullopt;
    std::size_t v = 0;
    for (; i < reply.size() && std::isdigit(static_cast<unsigned char>(reply[i])); ++i) {
        v = v * 10 + static_cast<std::size_t>(reply[i] - '0');
        if (v > 1'000'000) return std::nullopt;
    }
    return v;
}

VoteOutcome vote_utterance(const UserContext& uctx, const std::vector<TraceMessage>& history,
                           const VotingAgents& agents, const VotingConfig& vcfg, std::uint64_t utterance_seed) {
    vcfg.validate();
    VoteOutcome out;
    CompletionRequest req;
    req.messages = user_view(uctx.system_prompt, history);
    req.temperature = vcfg.generator_temperature;
    req.seed = request_seed(derive_seed(utterance_seed, "candidates"));
    out.candidates = agents.generator.sample_n(req, vcfg.n_samples);
    if (out.candidates.size() != vcfg.n_samples) throw GatewayError("generator returned the wrong number of samples");
    for (auto& c : out.candidates) c = std::string(trim(c));

    if (vcfg.n_samples == 1) {
        out.text = out.candidates.front();
        out.pooled.votes = {0};
        return out;
    }
    const auto hist = voter_history(history);
    for (std::size_t j = 0; j < vcfg.m_voters; ++j) {
        Ballot b;
        b.order = voter_order(utterance_seed, j, vcfg.n_samples);
        std::string listing;
        for (std::size_t q = 0; q < b.order.size(); ++q) {
            listing += std::to_string(q + 1) + ". " + out.candidates[b.order[q]] + "\n";
        }
        CompletionRequest vreq;
        vreq.messages = {{Role::User, prompts::render(prompts::kVoter, {{"user_persona", uctx.persona},
                                                                          {"goal", uctx.goal},
                                                                          {"history", hist},
                                                                          {"candidates", listing}})}};
        vreq.temperature = 0.0;
        vreq.seed = request_seed(derive_seed(utterance_seed, 1000 + j));
        b.position = parse_vote(agents.voter.complete(vreq));
        if (!b.position || *b.position < 1 || *b.position > vcfg.n_samples) {
            log_warn("voter " + std::to_string(j + 1) + " gave an unusable vote; discarded");
        }
        out.ballots.push_back(std::move(b));
    }
    out.pooled = pool_votes(vcfg.n_samples, out.ballots);
    if (out.pooled.fallback) log_warn("every vote discarded; using candidate 1");
    out.text = out.candidates[out.pooled.chosen];
    return out;
}

DialogueTrace eval_static(const EvalTask& task, const Catalogue& catalogue, const AssistantUnderTest& assistant) {
    task.validate();
    const auto& gold = *task.gold;
    const auto system = assistant_system_prompt(catalogue, task.scenario.pool);
    DialogueTrace out;
    out.dialogue_id = gold.dialogue_id;
    out.scenario_id = task.scenario.id;
    out.seed_tool = task.scenario.seed_tool;
    const auto seed = derive_seed(task.scenario.rng_seed, "static");
    std::size_t t = 0;
    for (const auto& m : gold.messages) {
        if (m.role != Role::User) continue;
        ++t;
        out.messages.push_back(TraceMessage::user(m.text));
        auto turn = decode(assistant, assistant_view(system, out.messages), derive_seed(seed, t));
        if (turn.has_tool_calls()) out.terminated_by = Termination::ToolCall;
        out.messages.push_back(TraceMessage::from_assistant(std::move(turn)));
    }
    return out;
}

DialogueTrace eval_dynamic(const Scenario& scn, const Catalogue& catalogue, const AssistantUnderTest& assistant,
                           const VotingAgents& agents, const VotingConfig& vcfg, std::size_t t_max) {
    if (t_max < 1) throw ConfigError("t_max must be positive");
    const auto system = assistant_system_prompt(catalogue, scn.pool);
    const UserContext uctx{user_proxy_system_prompt(catalogue, scn), scn.persona, scn.goal};
    const auto seed = derive_seed(derive_seed(vcfg.rng_seed, scn.id), "dynamic");

    DialogueTrace out;
    out.dialogue_id = scn.id;
    out.scenario_id = scn.id;
    out.seed_tool = scn.seed_tool;
    out.terminated_by = Termination::TurnCap;
    for (std::size_t t = 1; t <= t_max; ++t) {
        auto vote = vote_utterance(uctx, out.messages, agents, vcfg, derive_seed(seed, "u" + std::to_string(t)));
        out.messages.push_back(TraceMessage::user(std::move(vote.text)));
        auto turn = decode(assistant, assistant_view(system, out.messages), derive_seed(seed, "a" + std::to_string(t)));
        const bool called = turn.has_tool_calls();
        out.messages.push_back(TraceMessage::from_assistant(std::move(turn)));
        if (called) {
            out.terminated_by = Termination::ToolCall;
            break;
        }
    }
    return out;
}

BenchResult run_benchmark(const std::vector<EvalTask>& tasks, const Catalogue& catalogue,
                          const AssistantUnderTest& assistant, const VotingAgents* agents, const VotingConfig& vcfg,
                          const BenchOptions& opts) {
    if (tasks.empty()) throw Error("benchmark has no tasks");
    for (const auto& t : tasks) {
        t.validate();
        if (t.mode == EvalMode::Dynamic && !agents) throw ConfigError("dynamic evaluation needs a user-proxy and voter");
    }
    vcfg.validate();

    BenchResult res;
    res.traces.resize(tasks.size());
    parallel_for(tasks.size(), opts.workers, [&](std::size_t i) {
        const auto& task = tasks[i];
        res.traces[i] = task.mode == EvalMode::Static
                            ? eval_static(task, catalogue, assistant)
                            : eval_dynamic(task.scenario, catalogue, assistant, *agents, vcfg, opts.t_max);
    });

    std::vector<DialogueTrace> kept;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (opts.exclude.contains(res.traces[i].dialogue_id)) {
            ++res.excluded;
            continue;
        }
        kept.push_back(res.traces[i]);
        res.refs.push_back(Reference::from(tasks[i].scenario));
    }
    if (kept.empty()) throw Error("every benchmark dialogue was excluded");
    res.report = score_corpus(kept, res.refs, {opts.judge, opts.workers});
    return res;
}

} // namespace forge

#include "forge/engine.h"

#include <algorithm>

#include "forge/error.h"
#include "forge/log.h"
#include "forge/prompts.h"
#include "forge/rng.h"

namespace forge {

namespace {

std::string strip_decoration(std::string_view s) {
    s = trim(s);
    while (!s.empty() && (s.front() == '`' || s.front() == '"' || s.front() == '\'')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '`' || s.back() == '"' || s.back() == '\'' || s.back() == '.')) {
        s.remove_suffix(1);
    }
    return std::string(trim(s));
}

std::size_t count_role(const std::vector<TraceMessage>& msgs, Role role) {
    return static_cast<std::size_t>(
        std::count_if(msgs.begin(), msgs.end(), [&](const TraceMessage& m) { return m.role == role; }));
}

std::string user_turn(const Gateway& gw, const std::string& system, const std::vector<TraceMessage>& msgs,
                      double temperature, std::uint64_t seed) {
    CompletionRequest req;
    req.messages = user_view(system, msgs);
    req.temperature = temperature;
    req.seed = request_seed(seed);
    return std::string(trim(gw.complete(req)));
}

AssistantTurn assistant_turn(const Gateway& gw, const std::string& system, const std::vector<TraceMessage>& msgs,
                             double temperature, std::uint64_t seed) {
    CompletionRequest req;
    req.messages = assistant_view(system, msgs);
    req.temperature = temperature;
    req.seed = request_seed(seed);
    return parse_assistant_output(gw.complete(req));
}

} // namespace

void EngineConfig::validate() const {
    if (t_max < 2) throw ConfigError("t_max must be at least 2");
    if (regen_attempts < 1) throw ConfigError("regen_attempts must be at least 1");
}

StopStatus check_stopping(const AssistantTurn& turn, const Scenario& scn, std::size_t turn_index, std::size_t t_max) {
    if (turn.tool_calls && turn.tool_calls->size() == 1) {
        const auto& call = turn.tool_calls->front();
        if (call.name == scn.seed_tool && args_equal(call.args, scn.gold_args)) return StopStatus::Success;
    }
    if (t_max > 0 && turn_index >= t_max) return StopStatus::CapPending;
    return StopStatus::Continue;
}

std::optional<std::string> committed_tool(const AssistantTurn& turn) {
    if (turn.has_tool_calls()) return turn.tool_calls->front().name;
    std::string_view content = turn.content;
    std::size_t start = 0;
    while (start <= content.size()) {
        auto end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        const auto line = trim(content.substr(start, end - start));
        if (line.substr(0, prompts::kSelectionMarker.size()) == prompts::kSelectionMarker) {
            auto name = strip_decoration(line.substr(prompts::kSelectionMarker.size()));
            if (!name.empty()) return name;
        }
        start = end + 1;
    }
    return std::nullopt;
}

std::string render_tools(const Catalogue& catalogue, const std::vector<std::string>& names) {
    ordered_json arr = ordered_json::array();
    for (const auto& n : names) arr.push_back(tool_prompt_json(catalogue.at(n)));
    return arr.dump(2);
}

std::string assistant_system_prompt(const Catalogue& catalogue, const std::vector<std::string>& pool) {
    return prompts::render(prompts::kAssistantReference, {{"tools", render_tools(catalogue, pool)}});
}

std::string user_proxy_system_prompt(const Catalogue& catalogue, const Scenario& scn) {
    std::string prompt = prompts::render(
        prompts::kUserProxy, {{"user_persona", scn.persona},
                              {"gold_tool", tool_prompt_json(catalogue.at(scn.seed_tool)).dump(2)},
                              {"parameter_values", scn.gold_args.dump(2)},
                              {"distractor_tools", render_tools(catalogue, scn.distractors.names())}});
    if (!scn.goal.empty()) prompt += prompts::render(prompts::kUserGoalNote, {{"goal", scn.goal}});
    return prompt;
}

std::vector<ChatMessage> assistant_view(const std::string& system, const std::vector<TraceMessage>& messages) {
    std::vector<ChatMessage> out{{Role::System, system}};
    for (const auto& m : messages) {
        if (m.role == Role::User) {
            out.push_back({Role::User, m.text});
        } else {
            out.push_back({Role::Assistant, serialize_assistant(m.assistant)});
        }
    }
    return out;
}

std::vector<ChatMessage> user_view(const std::string& system, const std::vector<TraceMessage>& messages) {
    std::vector<ChatMessage> out{{Role::System, system}, {Role::User, std::string(prompts::kUserKickoff)}};
    for (const auto& m : messages) {
        if (m.role == Role::User) {
            out.push_back({Role::Assistant, m.text});
        } else {
            out.push_back({Role::User, public_payload(m.assistant)});
        }
    }
    return out;
}

SelectionResult run_tool_selection(const Scenario& scn, const EngineContext& ctx) {
    ctx.config.validate();
    const auto& cfg = ctx.config;
    const std::size_t live_k = cfg.live_k > 0 ? cfg.live_k : std::max<std::size_t>(scn.pool.size(), 1);
    const std::string user_system = user_proxy_system_prompt(ctx.catalogue, scn);

    SelectionResult result;
    for (int attempt = 1; attempt <= cfg.regen_attempts; ++attempt) {
        result.attempts = attempt;
        const auto attempt_seed = derive_seed(scn.rng_seed, "attempt-" + std::to_string(attempt));
        std::vector<TraceMessage> msgs;

        const auto opening = user_turn(ctx.user, user_system, msgs, cfg.user_temperature, derive_seed(attempt_seed, "u1"));
        if (opening.empty()) {
            result.rejection = Rejection{"empty_user", "user-proxy produced an empty opening"};
            return result;
        }
        std::vector<std::string> live;
        for (const auto& hit : ctx.retriever.search_text(opening, live_k)) live.push_back(hit.name);
        if (std::find(live.begin(), live.end(), scn.seed_tool) == live.end()) {
            log(LogLevel::Debug, scn.id + ": live retriever missed the seed tool, attempt " + std::to_string(attempt));
            continue;
        }
        Rng(derive_seed(attempt_seed, "live-pool")).shuffle(live);
        result.live_pool = live;
        const std::string asst_system =
            assistant_system_prompt(ctx.catalogue, live) + std::string(prompts::kSelectionStageNote);

        msgs.push_back(TraceMessage::user(opening));
        for (std::size_t t = 1;; ++t) {
            AssistantTurn turn;
            try {
                turn = assistant_turn(ctx.assistant, asst_system, msgs, cfg.assistant_temperature,
                                      derive_seed(attempt_seed, "a" + std::to_string(t)));
            } catch (const FormatError& e) {
                result.rejection = Rejection{"malformed_assistant", e.what()};
                return result;
            }
            const auto chosen = committed_tool(turn);
            msgs.push_back(TraceMessage::from_assistant(std::move(turn)));
            if (chosen) {
                result.committed_tool = *chosen;
                if (*chosen != scn.seed_tool) {
                    result.rejection = Rejection{"wrong_tool", "assistant selected '" + *chosen + "'"};
                    return result;
                }
                msgs.pop_back();
                result.removed_messages = 1;
                DialogueTrace prefix;
                prefix.dialogue_id = scn.id;
                prefix.scenario_id = scn.id;
                prefix.seed_tool = scn.seed_tool;
                prefix.phase_boundary = count_role(msgs, Role::User);
                prefix.messages = std::move(msgs);
                result.prefix = std::move(prefix);
                return result;
            }
            if (t >= cfg.t_max) {
                result.rejection = Rejection{"selection_turn_cap", "no tool selected within t_max turns"};
                return result;
            }
            const auto reply = user_turn(ctx.user, user_system, msgs, cfg.user_temperature,
                                         derive_seed(attempt_seed, "u" + std::to_string(t + 1)));
            if (reply.empty()) {
                result.rejection = Rejection{"empty_user", "user-proxy produced an empty reply"};
                return result;
            }
            msgs.push_back(TraceMessage::user(reply));
        }
    }
    result.rejection = Rejection{"retriever_miss", "seed tool absent from the live candidate set in " +
                                                       std::to_string(cfg.regen_attempts) + " attempts"};
    return result;
}

DialogueTrace run_param_filling(const SelectionResult& selection, const Scenario& scn, const EngineContext& ctx) {
    if (!selection.prefix) throw Error("parameter filling needs a successful tool selection");
    const auto& cfg = ctx.config;
    DialogueTrace trace = *selection.prefix;
    const std::string user_system = user_proxy_system_prompt(ctx.catalogue, scn);
    const std::string asst_system =
        assistant_system_prompt(ctx.catalogue, selection.live_pool) +
        prompts::render(prompts::kParameterStageNote, {{"selected_tool", scn.seed_tool}});
    const auto stage_seed = derive_seed(scn.rng_seed, "fill-" + std::to_string(selection.attempts));

    for (;;) {
        const std::size_t t = count_role(trace.messages, Role::User);
        auto turn = assistant_turn(ctx.assistant, asst_system, trace.messages, cfg.assistant_temperature,
                                   derive_seed(stage_seed, "a" + std::to_string(t)));
        const auto status = check_stopping(turn, scn, t, cfg.t_max);
        trace.messages.push_back(TraceMessage::from_assistant(std::move(turn)));
        if (status == StopStatus::Success) {
            trace.terminated_by = Termination::ToolCall;
            return trace;
        }
        if (status == StopStatus::CapPending) {
            trace.terminated_by = Termination::TurnCap;
            return trace;
        }
        trace.messages.push_back(TraceMessage::user(user_turn(ctx.user, user_system, trace.messages,
                                                              cfg.user_temperature,
                                                              derive_seed(stage_seed, "u" + std::to_string(t + 1)))));
    }
}

SynthesisResult synthesize(const Scenario& scn, const EngineContext& ctx) {
    SynthesisResult out;
    auto selection = run_tool_selection(scn, ctx);
    out.attempts = selection.attempts;
    if (!selection.ok()) {
        out.rejection = selection.rejection;
        return out;
    }
    try {
        out.trace = run_param_filling(selection, scn, ctx);
    } catch (const FormatError& e) {
        out.rejection = Rejection{"malformed_assistant", e.what()};
    }
    return out;
}

} // namespace forge

#include "forge/validator.h"

#include <cctype>
#include <chrono>
#include <future>

#include "forge/error.h"
#include "forge/log.h"
#include "forge/prompts.h"

namespace forge {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const AssistantTurn* final_assistant(const DialogueTrace& d) {
    if (d.messages.empty() || d.messages.back().role != Role::Assistant) return nullptr;
    return &d.messages.back().assistant;
}

Check ask_judge(const Gateway& gw, std::string_view tmpl, const std::string& gold, const std::string& dialogue) {
    CompletionRequest req;
    req.messages = {{Role::User, prompts::render(tmpl, {{"gold_tool", gold}, {"dialogue", dialogue}})}};
    req.temperature = 0.0;
    req.seed = 0;
    std::string reply;
    try {
        reply = gw.complete(req);
    } catch (const GatewayError& e) {
        throw InfrastructureError(std::string("judge unavailable: ") + e.what());
    }
    try {
        return parse_judge_reply(reply);
    } catch (const JudgeFormatError& e) {
        throw InfrastructureError(std::string("judge reply unreadable: ") + e.what());
    }
}

} // namespace

std::string_view to_string(Verdict v) { return v == Verdict::Accept ? "accept" : "reject"; }

bool ValidationReport::has_timing(std::string_view stage) const {
    for (const auto& [name, _] : stage_timings) {
        if (name == stage) return true;
    }
    return false;
}

ordered_json report_to_json(const ValidationReport& r, bool with_timings) {
    ordered_json j;
    j["dialogue_id"] = r.dialogue_id;
    j["verdict"] = std::string(to_string(r.verdict));
    j["failures"] = ordered_json::array();
    for (const auto& [v, why] : r.failures) j["failures"].push_back({{"validator", v}, {"reason", why}});
    j["stage_timings"] = ordered_json::object();
    for (const auto& [stage, ms] : r.stage_timings) j["stage_timings"][stage] = with_timings ? ms : 0.0;
    j["llm_requeues"] = r.llm_requeues;
    return j;
}

ValidationReport report_from_json(const json& j) {
    ValidationReport r;
    try {
        r.dialogue_id = j.at("dialogue_id").get<std::string>();
        const auto v = j.at("verdict").get<std::string>();
        if (v != "accept" && v != "reject") throw ParseError("verdict must be accept or reject");
        r.verdict = v == "accept" ? Verdict::Accept : Verdict::Reject;
        for (const auto& f : j.at("failures")) {
            r.failures.emplace_back(f.at("validator").get<std::string>(), f.at("reason").get<std::string>());
        }
        for (const auto& [k, ms] : j.at("stage_timings").items()) r.stage_timings.emplace_back(k, ms.get<double>());
        r.llm_requeues = j.value("llm_requeues", 0);
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad validation report: ") + e.what());
    }
    return r;
}

Check validate_format(const DialogueTrace& d) {
    if (d.messages.empty()) return Check::fail("alternation: empty dialogue");
    for (std::size_t i = 0; i < d.messages.size(); ++i) {
        const auto expected = i % 2 == 0 ? Role::User : Role::Assistant;
        if (d.messages[i].role != expected) {
            return Check::fail("alternation: message " + std::to_string(i + 1) + " should be " +
                               std::string(to_string(expected)));
        }
    }
    if (d.messages.back().role != Role::Assistant) return Check::fail("alternation: dialogue ends with a user turn");

    std::size_t t = 0;
    for (const auto& m : d.messages) {
        if (m.role == Role::User) {
            if (trim(m.text).empty()) return Check::fail("user: empty utterance");
            continue;
        }
        ++t;
        const auto& a = m.assistant;
        const auto at = " (assistant turn " + std::to_string(t) + ")";
        if (a.malformed) return Check::fail("schema: unparseable output" + at);
        if (trim(a.thought).empty()) return Check::fail("thought: missing reasoning trace" + at);
        if (a.tool_calls && a.tool_calls->empty()) return Check::fail("schema: empty tool_calls list" + at);
        if (!a.has_tool_calls() && trim(a.content).empty()) return Check::fail("schema: empty public content" + at);
    }
    return Check::pass();
}

Check validate_toolcall(const DialogueTrace& d, const Scenario& scn) {
    const auto* last = final_assistant(d);
    if (!last || !last->has_tool_calls()) return Check::fail("no tool call in the final assistant turn");
    if (last->tool_calls->size() != 1) {
        return Check::fail("final turn carries " + std::to_string(last->tool_calls->size()) + " tool calls");
    }
    const auto& name = last->tool_calls->front().name;
    if (name != scn.seed_tool) return Check::fail("final call names '" + name + "', expected '" + scn.seed_tool + "'");
    for (std::size_t i = 0; i + 1 < d.messages.size(); ++i) {
        const auto& m = d.messages[i];
        if (m.role == Role::Assistant && m.assistant.tool_calls) {
            return Check::fail("tool call before the final turn");
        }
    }
    return Check::pass();
}

Check validate_toolargs(const DialogueTrace& d, const Scenario& scn) {
    const auto* last = final_assistant(d);
    if (!last || !last->has_tool_calls()) return Check::fail("no tool call to check");
    const auto& args = last->tool_calls->front().args;
    for (const auto& [key, _] : scn.gold_args.items()) {
        if (!args.contains(key)) return Check::fail("missing argument '" + key + "'");
    }
    for (const auto& [key, _] : args.items()) {
        if (!scn.gold_args.contains(key)) return Check::fail("superfluous argument '" + key + "'");
    }
    for (const auto& [key, gold] : scn.gold_args.items()) {
        if (!canonical_equal(args.at(key), gold)) {
            return Check::fail("argument '" + key + "' is " + args.at(key).dump() + ", expected " + gold.dump());
        }
    }
    return Check::pass();
}

Check parse_judge_reply(std::string_view reply) {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw JudgeFormatError("no JSON object in judge reply");
    }
    json j;
    try {
        j = json::parse(reply.substr(open, close - open + 1));
    } catch (const json::parse_error& e) {
        throw JudgeFormatError(e.what());
    }
    if (!j.contains("verdict") || !j.at("verdict").is_string()) throw JudgeFormatError("missing verdict");
    const auto verdict = lower(trim(j.at("verdict").get<std::string>()));
    std::string reason;
    if (j.contains("reason") && j.at("reason").is_string()) reason = j.at("reason").get<std::string>();
    if (verdict == "pass") return Check::pass();
    if (verdict == "fail") return Check::fail(reason.empty() ? "judge failed the dialogue" : reason);
    throw JudgeFormatError("verdict must be pass or fail, got '" + verdict + "'");
}

std::string render_dialogue(const DialogueTrace& d, bool with_thoughts) {
    std::string out;
    for (const auto& m : d.messages) {
        if (m.role == Role::User) {
            out += "User: " + m.text + "\n";
        } else if (with_thoughts) {
            out += "Assistant: " + serialize_assistant(m.assistant) + "\n";
        } else {
            out += "Assistant: " + public_payload(m.assistant) + "\n";
        }
    }
    return out;
}

JudgeOutcome validate_llm(const DialogueTrace& d, const Tool& gold_tool, const Judges& judges) {
    const auto gold = tool_prompt_json(gold_tool).dump(2);
    const auto public_view = render_dialogue(d, false);
    const auto full_view = render_dialogue(d, true);

    auto timed = [](const Gateway& gw, std::string_view tmpl, const std::string& g, const std::string& dialogue) {
        const auto start = Clock::now();
        auto check = ask_judge(gw, tmpl, g, dialogue);
        return std::pair{std::move(check), elapsed_ms(start)};
    };
    auto rel = std::async(std::launch::async, timed, std::cref(judges.relevancy), prompts::kRelevancyJudge,
                          std::cref(gold), std::cref(public_view));
    auto crit = std::async(std::launch::async, timed, std::cref(judges.critique), prompts::kCritiqueJudge,
                           std::cref(gold), std::cref(full_view));
    // Both futures are drained before any exception escapes.
    std::exception_ptr failure;
    JudgeOutcome out;
    try {
        std::tie(out.relevancy, out.relevancy_ms) = rel.get();
    } catch (...) {
        failure = std::current_exception();
    }
    try {
        std::tie(out.critique, out.critique_ms) = crit.get();
    } catch (...) {
        if (!failure) failure = std::current_exception();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

ValidationReport run_cascade(const DialogueTrace& d, const Scenario& scn, const Catalogue& catalogue,
                             const Judges* judges) {
    ValidationReport report;
    report.dialogue_id = d.dialogue_id;

    using Stage = Check (*)(const DialogueTrace&, const Scenario&);
    const std::pair<const char*, Stage> functional[] = {
        {"format", [](const DialogueTrace& t, const Scenario&) { return validate_format(t); }},
        {"toolcall", validate_toolcall},
        {"toolargs", validate_toolargs},
    };
    for (const auto& [name, stage] : functional) {
        const auto start = Clock::now();
        const auto check = stage(d, scn);
        report.stage_timings.emplace_back(name, elapsed_ms(start));
        if (!check) {
            report.failures.emplace_back(name, check.reason);
            report.verdict = Verdict::Reject;
            return report;
        }
    }
    if (!judges) return report;

    const auto& gold_tool = catalogue.at(scn.seed_tool);
    JudgeOutcome judged;
    try {
        judged = validate_llm(d, gold_tool, *judges);
    } catch (const InfrastructureError& e) {
        log_warn(d.dialogue_id + ": " + e.what() + "; re-queueing LLM validation");
        report.llm_requeues = 1;
        judged = validate_llm(d, gold_tool, *judges);
    }
    report.stage_timings.emplace_back("relevancy", judged.relevancy_ms);
    report.stage_timings.emplace_back("critique", judged.critique_ms);
    if (!judged.relevancy) report.failures.emplace_back("relevancy", judged.relevancy.reason);
    if (!judged.critique) report.failures.emplace_back("critique", judged.critique.reason);
    report.verdict = report.failures.empty() ? Verdict::Accept : Verdict::Reject;
    return report;
}

} // namespace forge

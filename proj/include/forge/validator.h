#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "forge/catalogue.h"
#include "forge/dialogue.h"
#include "forge/llm_gateway.h"
#include "forge/scenario.h"

namespace forge {

enum class Verdict { Accept, Reject };
std::string_view to_string(Verdict v);

struct Check {
    bool passed = true;
    std::string reason;

    static Check pass() { return {}; }
    static Check fail(std::string why) { return {false, std::move(why)}; }
    explicit operator bool() const { return passed; }
};

struct ValidationReport {
    std::string dialogue_id;
    Verdict verdict = Verdict::Accept;
    std::vector<std::pair<std::string, std::string>> failures; // (validator, reason)
    std::vector<std::pair<std::string, double>> stage_timings; // validator -> ms, in execution order
    int llm_requeues = 0;

    bool has_timing(std::string_view stage) const;
};

// with_timings=false writes every executed stage with a 0 duration, which
// keeps the key set (and thus the execution order) but makes output replayable.
ordered_json report_to_json(const ValidationReport& r, bool with_timings = true);
ValidationReport report_from_json(const json& j);

Check validate_format(const DialogueTrace& d);
Check validate_toolcall(const DialogueTrace& d, const Scenario& scn);
Check validate_toolargs(const DialogueTrace& d, const Scenario& scn);

struct Judges {
    const Gateway& relevancy;
    const Gateway& critique;
};

struct JudgeOutcome {
    Check relevancy;
    Check critique;
    double relevancy_ms = 0.0;
    double critique_ms = 0.0;
};

// {"verdict": "pass"|"fail", "reason": ...}, optionally wrapped in prose or a
// code fence. Throws JudgeFormatError.
Check parse_judge_reply(std::string_view reply);

std::string render_dialogue(const DialogueTrace& d, bool with_thoughts);

// Both judges run concurrently at temperature 0. Gateway failures and
// unreadable judge replies throw InfrastructureError.
JudgeOutcome validate_llm(const DialogueTrace& d, const Tool& gold_tool, const Judges& judges);

// Format -> Toolcall -> Toolargs with short-circuit, then the LLM judges
// (re-run once on InfrastructureError, which propagates on the second failure).
// Without judges the LLM stage is skipped.
ValidationReport run_cascade(const DialogueTrace& d, const Scenario& scn, const Catalogue& catalogue,
                             const Judges* judges);

} // namespace forge

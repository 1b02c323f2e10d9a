#pragma once

#include <map>
#include <string>
#include <string_view>

namespace forge::prompts {

// Bumped whenever any asset below changes; recorded in manifests and scenario dumps.
inline constexpr std::string_view kVersion = "prompts-v1";

// Assistant system prompt with a {{tools}} slot.
extern const std::string_view kAssistantReference;
// Appended during synthesis, tool-selection stage: how to signal a commitment.
extern const std::string_view kSelectionStageNote;
// Appended during synthesis, parameter-filling stage; slot {{selected_tool}}.
extern const std::string_view kParameterStageNote;
// The line prefix an assistant uses to commit to a tool during selection.
inline constexpr std::string_view kSelectionMarker = "SELECTED_TOOL:";

// User-proxy system prompt; slots {{user_persona}}, {{gold_tool}},
// {{parameter_values}}, {{distractor_tools}}.
extern const std::string_view kUserProxy;
// Appended to the user-proxy prompt when a goal is known; slot {{goal}}.
extern const std::string_view kUserGoalNote;
// First user-side message when the history is empty.
extern const std::string_view kUserKickoff;

extern const std::string_view kGoalGenerator;     // {{tool}}, {{persona}}
extern const std::string_view kSlotGenerator;     // {{tool}}, {{required_params}}, {{persona}}
extern const std::string_view kRegenerationNote;  // {{problem}}

extern const std::string_view kRelevancyJudge;    // {{gold_tool}}, {{dialogue}}
extern const std::string_view kCritiqueJudge;     // {{gold_tool}}, {{dialogue}}
extern const std::string_view kRubricJudge;       // {{history}}, {{reply}}
extern const std::string_view kVoter;             // {{user_persona}}, {{goal}}, {{history}}, {{candidates}}

// Replaces every {{key}} with its value; unknown slots are left as-is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& slots);

} // namespace forge::prompts

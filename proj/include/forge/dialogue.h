#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/llm_gateway.h"
#include "forge/values.h"

namespace forge {

struct ToolCall {
    std::string name;
    json args = json::object();

    bool operator==(const ToolCall& o) const { return name == o.name && args == o.args; }
};

// One assistant message: private thought plus exactly one public payload,
// either natural-language content or a list of tool calls.
struct AssistantTurn {
    std::string thought;
    std::optional<std::vector<ToolCall>> tool_calls;
    std::string content;
    bool malformed = false; // raw model output kept in `content`

    bool has_tool_calls() const { return tool_calls.has_value() && !tool_calls->empty(); }
    bool operator==(const AssistantTurn&) const = default;
};

// Splits "<think>...</think> payload". A payload starting with '[' (optionally
// inside a ``` fence) must be a JSON list of {"name", "args"} objects.
// Throws FormatError.
AssistantTurn parse_assistant_output(std::string_view raw);

// Inverse of parse_assistant_output for well-formed turns; malformed turns
// serialize to their raw text.
std::string serialize_assistant(const AssistantTurn& turn);

// The user-visible part: content, or the tool-call list as JSON.
std::string public_payload(const AssistantTurn& turn);

json tool_calls_to_json(const std::vector<ToolCall>& calls);

enum class Termination { ToolCall, TurnCap };

std::string_view to_string(Termination t);

struct TraceMessage {
    Role role = Role::User;
    std::string text;        // user messages
    AssistantTurn assistant; // assistant messages

    static TraceMessage user(std::string text) { return {Role::User, std::move(text), {}}; }
    static TraceMessage from_assistant(AssistantTurn turn) { return {Role::Assistant, {}, std::move(turn)}; }

    bool operator==(const TraceMessage&) const = default;
};

struct DialogueTrace {
    std::string dialogue_id;
    std::string scenario_id;
    std::string seed_tool;
    std::vector<TraceMessage> messages; // u_1, a_1, u_2, a_2, ...
    // 1-based turn whose assistant reply was the first parameter-filling message.
    std::optional<std::size_t> phase_boundary;
    Termination terminated_by = Termination::TurnCap;

    std::size_t assistant_turns() const;
    std::size_t user_turns() const;
    // 1-based accessors over the alternating layout; throw std::out_of_range.
    const AssistantTurn& assistant_at(std::size_t t) const;
    const std::string& user_at(std::size_t t) const;

    bool operator==(const DialogueTrace&) const = default;
};

json trace_to_json(const DialogueTrace& d);
DialogueTrace trace_from_json(const json& j);

// Corpus interchange: one dialogue per line.
std::vector<DialogueTrace> read_traces(const std::filesystem::path& path);
void write_traces(const std::filesystem::path& path, const std::vector<DialogueTrace>& traces);

std::vector<json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);
void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& rows);

} // namespace forge

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "forge/catalogue.h"
#include "forge/dialogue.h"
#include "forge/llm_gateway.h"
#include "forge/retrieval.h"
#include "forge/scenario.h"

namespace forge {

struct EngineConfig {
    std::size_t t_max = 12;        // user/assistant pairs
    int regen_attempts = 5;        // fresh restarts when the live retriever misses the seed tool
    std::size_t live_k = 0;        // live retriever depth; 0 means |scenario pool|
    double user_temperature = 0.7;
    double assistant_temperature = 0.7;

    void validate() const;
};

struct EngineContext {
    const Catalogue& catalogue;
    const ToolIndex& retriever;
    const Gateway& user;
    const Gateway& assistant;
    EngineConfig config;
};

struct Rejection {
    std::string reason; // retriever_miss, wrong_tool, selection_turn_cap, malformed_assistant, empty_user
    std::string detail;
};

struct SelectionResult {
    std::optional<DialogueTrace> prefix; // ends with the pending user message
    std::optional<Rejection> rejection;
    std::vector<std::string> live_pool;  // tools shown to the assistant
    std::string committed_tool;
    int attempts = 0;
    std::size_t removed_messages = 0;    // always 1 on success

    bool ok() const { return prefix.has_value(); }
};

struct SynthesisResult {
    std::optional<DialogueTrace> trace;
    std::optional<Rejection> rejection;
    int attempts = 0;

    bool ok() const { return trace.has_value(); }
};

enum class StopStatus { Continue, Success, CapPending };

// Success iff the turn is a single call to the seed tool whose arguments
// equal the gold map (same keys, canonically equal values). Otherwise
// CapPending once turn_index reaches t_max.
StopStatus check_stopping(const AssistantTurn& turn, const Scenario& scn, std::size_t turn_index = 0,
                          std::size_t t_max = 0);

// Tool name committed to during the selection stage: the first tool call, or
// a SELECTED_TOOL: line in the content.
std::optional<std::string> committed_tool(const AssistantTurn& turn);

std::string render_tools(const Catalogue& catalogue, const std::vector<std::string>& names);
std::string assistant_system_prompt(const Catalogue& catalogue, const std::vector<std::string>& pool);
std::string user_proxy_system_prompt(const Catalogue& catalogue, const Scenario& scn);

// h^a_t: system prompt then u_1, a_1, ..., u_t with assistant thoughts included.
std::vector<ChatMessage> assistant_view(const std::string& system, const std::vector<TraceMessage>& messages);
// h^u_t from the user-proxy's side: roles flipped, assistant thoughts hidden,
// preceded by a fixed kickoff message.
std::vector<ChatMessage> user_view(const std::string& system, const std::vector<TraceMessage>& messages);

SelectionResult run_tool_selection(const Scenario& scn, const EngineContext& ctx);
DialogueTrace run_param_filling(const SelectionResult& selection, const Scenario& scn, const EngineContext& ctx);

// Both stages; format errors in assistant output become rejections.
SynthesisResult synthesize(const Scenario& scn, const EngineContext& ctx);

} // namespace forge

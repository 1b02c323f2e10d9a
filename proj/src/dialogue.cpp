#include "forge/dialogue.h"

#include <fstream>

#include "forge/error.h"

namespace forge {

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";

// Drops a surrounding ``` / ```json fence, if any.
std::string_view strip_fence(std::string_view s) {
    s = trim(s);
    if (s.substr(0, 3) != "```") return s;
    const auto first_nl = s.find('\n');
    const auto last = s.rfind("```");
    if (first_nl == std::string_view::npos || last == 0 || last <= first_nl) return s;
    return trim(s.substr(first_nl + 1, last - first_nl - 1));
}

std::vector<ToolCall> parse_tool_calls(std::string_view text) {
    json arr;
    try {
        arr = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("unparseable tool-call list: ") + e.what());
    }
    if (!arr.is_array()) throw FormatError("tool-call payload is not a list");
    std::vector<ToolCall> calls;
    for (const auto& entry : arr) {
        if (!entry.is_object() || !entry.contains("name") || !entry.at("name").is_string()) {
            throw FormatError("tool call without a string \"name\"");
        }
        ToolCall c;
        c.name = entry.at("name").get<std::string>();
        if (c.name.empty()) throw FormatError("tool call with an empty name");
        if (entry.contains("args")) {
            if (!entry.at("args").is_object()) throw FormatError("tool call \"args\" must be an object");
            c.args = entry.at("args");
        }
        calls.push_back(std::move(c));
    }
    return calls;
}

json assistant_to_json(const AssistantTurn& a) {
    json j = {{"role", "assistant"}, {"thought", a.thought}, {"content", a.content}};
    if (a.tool_calls) j["tool_calls"] = tool_calls_to_json(*a.tool_calls);
    if (a.malformed) j["malformed"] = true;
    return j;
}

} // namespace

AssistantTurn parse_assistant_output(std::string_view raw) {
    const auto open = raw.find(kThinkOpen);
    if (open == std::string_view::npos) throw FormatError("missing <think> block");
    const auto close = raw.find(kThinkClose, open + kThinkOpen.size());
    if (close == std::string_view::npos) throw FormatError("unterminated <think> block");

    AssistantTurn turn;
    turn.thought = std::string(trim(raw.substr(open + kThinkOpen.size(), close - open - kThinkOpen.size())));
    const auto rest = trim(raw.substr(close + kThinkClose.size()));
    const auto unfenced = strip_fence(rest);
    if (!unfenced.empty() && unfenced.front() == '[') {
        turn.tool_calls = parse_tool_calls(unfenced);
    } else {
        turn.content = std::string(rest);
    }
    return turn;
}

json tool_calls_to_json(const std::vector<ToolCall>& calls) {
    json arr = json::array();
    for (const auto& c : calls) arr.push_back({{"name", c.name}, {"args", c.args}});
    return arr;
}

std::string public_payload(const AssistantTurn& turn) {
    if (turn.tool_calls) return tool_calls_to_json(*turn.tool_calls).dump();
    return turn.content;
}

std::string serialize_assistant(const AssistantTurn& turn) {
    if (turn.malformed) return turn.content;
    return std::string(kThinkOpen) + turn.thought + std::string(kThinkClose) + " " + public_payload(turn);
}

std::string_view to_string(Termination t) { return t == Termination::ToolCall ? "tool_call" : "turn_cap"; }

std::size_t DialogueTrace::assistant_turns() const {
    std::size_t n = 0;
    for (const auto& m : messages) n += m.role == Role::Assistant;
    return n;
}

std::size_t DialogueTrace::user_turns() const {
    std::size_t n = 0;
    for (const auto& m : messages) n += m.role == Role::User;
    return n;
}

const AssistantTurn& DialogueTrace::assistant_at(std::size_t t) const {
    std::size_t seen = 0;
    for (const auto& m : messages) {
        if (m.role == Role::Assistant && ++seen == t) return m.assistant;
    }
    throw std::out_of_range("assistant turn " + std::to_string(t) + " out of range");
}

const std::string& DialogueTrace::user_at(std::size_t t) const {
    std::size_t seen = 0;
    for (const auto& m : messages) {
        if (m.role == Role::User && ++seen == t) return m.text;
    }
    throw std::out_of_range("user turn " + std::to_string(t) + " out of range");
}

json trace_to_json(const DialogueTrace& d) {
    json msgs = json::array();
    for (const auto& m : d.messages) {
        if (m.role == Role::Assistant) {
            msgs.push_back(assistant_to_json(m.assistant));
        } else {
            msgs.push_back({{"role", to_string(m.role)}, {"content", m.text}});
        }
    }
    return {{"dialogue_id", d.dialogue_id},
            {"scenario_id", d.scenario_id},
            {"seed_tool", d.seed_tool},
            {"phase_boundary", d.phase_boundary ? json(*d.phase_boundary) : json(nullptr)},
            {"terminated_by", to_string(d.terminated_by)},
            {"messages", msgs}};
}

DialogueTrace trace_from_json(const json& j) {
    try {
        DialogueTrace d;
        d.dialogue_id = j.at("dialogue_id").get<std::string>();
        d.scenario_id = j.value("scenario_id", std::string());
        d.seed_tool = j.value("seed_tool", std::string());
        if (j.contains("phase_boundary") && !j.at("phase_boundary").is_null()) {
            d.phase_boundary = j.at("phase_boundary").get<std::size_t>();
        }
        const auto term = j.value("terminated_by", std::string("turn_cap"));
        if (term == "tool_call") {
            d.terminated_by = Termination::ToolCall;
        } else if (term == "turn_cap") {
            d.terminated_by = Termination::TurnCap;
        } else {
            throw ParseError("unknown termination '" + term + "'");
        }
        for (const auto& m : j.at("messages")) {
            const Role role = parse_role(m.at("role").get<std::string>());
            if (role == Role::Assistant) {
                AssistantTurn a;
                a.thought = m.value("thought", std::string());
                a.content = m.value("content", std::string());
                a.malformed = m.value("malformed", false);
                if (m.contains("tool_calls") && !m.at("tool_calls").is_null()) {
                    std::vector<ToolCall> calls;
                    for (const auto& c : m.at("tool_calls")) {
                        calls.push_back({c.at("name").get<std::string>(), c.value("args", json::object())});
                    }
                    a.tool_calls = std::move(calls);
                }
                d.messages.push_back(TraceMessage::from_assistant(std::move(a)));
            } else {
                d.messages.push_back({role, m.value("content", std::string()), {}});
            }
        }
        return d;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed dialogue trace: ") + e.what());
    }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::vector<json> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            rows.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& r : rows) out << r.dump() << '\n';
}

void write_jsonl(const std::filesystem::path& path, const std::vector<ordered_json>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& r : rows) out << r.dump() << '\n';
}

std::vector<DialogueTrace> read_traces(const std::filesystem::path& path) {
    std::vector<DialogueTrace> out;
    for (const auto& row : read_jsonl(path)) out.push_back(trace_from_json(row));
    return out;
}

void write_traces(const std::filesystem::path& path, const std::vector<DialogueTrace>& traces) {
    std::vector<json> rows;
    rows.reserve(traces.size());
    for (const auto& t : traces) rows.push_back(trace_to_json(t));
    write_jsonl(path, rows);
}

} // namespace forge

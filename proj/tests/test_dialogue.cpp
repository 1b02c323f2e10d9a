#include "doctest.h"

#include <fstream>

#include "a1_fixture.h"
#include "forge/dialogue.h"
#include "forge/error.h"

using namespace forge;

TEST_CASE("parse plain content") {
    const auto t = parse_assistant_output("<think>ask for the node</think> Could you share the node ID?");
    CHECK(t.thought == "ask for the node");
    CHECK(t.content == "Could you share the node ID?");
    CHECK_FALSE(t.tool_calls.has_value());
    CHECK_FALSE(t.has_tool_calls());
}

TEST_CASE("parse a tool-call list, fenced or not") {
    const char* bare = R"(<think>all set</think>
[{"name": "fn_1126_cloud_transport_management", "args": {"nodeId": 437292, "transportRequestId": 957841}}])";
    const auto a = parse_assistant_output(bare);
    REQUIRE(a.has_tool_calls());
    CHECK(a.tool_calls->size() == 1);
    CHECK(a.tool_calls->front().name == fixture::kSeedTool);
    CHECK(a.tool_calls->front().args == fixture::gold_args());
    CHECK(a.content.empty());

    const char* fenced = "<think>x</think>\n```json\n[{\"name\": \"t\", \"args\": {}}]\n```";
    const auto b = parse_assistant_output(fenced);
    REQUIRE(b.has_tool_calls());
    CHECK(b.tool_calls->front() == ToolCall{"t", json::object()});

    const auto no_args = parse_assistant_output(R"(<think>x</think> [{"name": "t"}])");
    CHECK(no_args.tool_calls->front().args == json::object());
}

TEST_CASE("format errors") {
    CHECK_THROWS_AS(parse_assistant_output("no thought here"), FormatError);
    CHECK_THROWS_AS(parse_assistant_output("<think>open"), FormatError);
    CHECK_THROWS_AS(parse_assistant_output("<think>x</think> [not json"), FormatError);
    CHECK_THROWS_AS(parse_assistant_output(R"(<think>x</think> [{"args": {}}])"), FormatError);
    CHECK_THROWS_AS(parse_assistant_output(R"(<think>x</think> [{"name": ""}])"), FormatError);
    CHECK_THROWS_AS(parse_assistant_output(R"(<think>x</think> [{"name": "t", "args": [1]}])"), FormatError);
}

TEST_CASE("serialize is the inverse of parse for well-formed turns") {
    for (const char* raw : {"<think>a</think> hello there",
                            R"(<think>b</think> [{"name":"t","args":{"x":1}}])"}) {
        const auto t = parse_assistant_output(raw);
        CHECK(parse_assistant_output(serialize_assistant(t)) == t);
    }
    AssistantTurn bad;
    bad.malformed = true;
    bad.content = "raw garbage";
    CHECK(serialize_assistant(bad) == "raw garbage");
    CHECK(public_payload(parse_assistant_output(R"(<think>b</think> [{"name":"t","args":{}}])")) ==
          R"([{"args":{},"name":"t"}])");
}

TEST_CASE("trace accessors and JSON round trip") {
    const auto d = fixture::a1_trace();
    CHECK(d.user_turns() == 3);
    CHECK(d.assistant_turns() == 3);
    CHECK(d.user_at(1) == fixture::kUser1);
    CHECK(d.assistant_at(3).has_tool_calls());
    CHECK_THROWS_AS(d.assistant_at(4), std::out_of_range);
    CHECK(d.phase_boundary == std::optional<std::size_t>(2));
    CHECK(d.terminated_by == Termination::ToolCall);

    const auto back = trace_from_json(trace_to_json(d));
    CHECK(back == d);

    const auto dir = fixture::temp_dir("dialogue-jsonl");
    auto second = d;
    second.dialogue_id = "a1-b";
    second.phase_boundary.reset();
    second.terminated_by = Termination::TurnCap;
    write_traces(dir / "c.jsonl", {d, second});
    const auto rows = read_traces(dir / "c.jsonl");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == d);
    CHECK(rows[1] == second);
    CHECK(trace_to_json(second).at("phase_boundary").is_null());
}

TEST_CASE("trace parse errors") {
    CHECK_THROWS_AS(trace_from_json(json::object()), ParseError);
    auto j = trace_to_json(fixture::a1_trace());
    j["terminated_by"] = "boredom";
    CHECK_THROWS_AS(trace_from_json(j), ParseError);
    j = trace_to_json(fixture::a1_trace());
    j["messages"][0]["role"] = "narrator";
    CHECK_THROWS_AS(trace_from_json(j), ParseError);

    const auto dir = fixture::temp_dir("dialogue-bad");
    {
        std::ofstream out(dir / "bad.jsonl");
        out << "{\"dialogue_id\": \"x\", \"messages\": []}\n\n{oops\n";
    }
    CHECK_THROWS_AS(read_jsonl(dir / "bad.jsonl"), ParseError);
    CHECK_THROWS(read_jsonl(dir / "missing.jsonl"));
}

#include "doctest.h"

#include <algorithm>
#include <atomic>

#include "a1_fixture.h"
#include "forge/error.h"
#include "forge/retrieval.h"
#include "forge/scenario.h"
#include "oracles.h"

using namespace forge;
namespace fx = forge::fixture;

namespace {

// Replies from a fixed list, one per request, recording every request.
struct Sequence {
    std::shared_ptr<std::vector<CompletionRequest>> seen = std::make_shared<std::vector<CompletionRequest>>();
    Gateway gateway;

    explicit Sequence(std::vector<std::string> replies)
        : gateway(std::make_shared<FunctionBackend>(
                      [r = std::move(replies), i = std::make_shared<std::size_t>(0),
                       s = seen](const CompletionRequest& req, std::size_t n) {
                          s->push_back(req);
                          std::vector<std::string> out;
                          for (std::size_t k = 0; k < n; ++k) out.push_back(r.at(std::min((*i)++, r.size() - 1)));
                          return out;
                      }),
                  "seq") {}
};

std::vector<std::string> ten_personas() {
    return {"A pastry chef experimenting with sourdough",
            "A high school chemistry teacher",
            "A logistics operations manager tracking freight transport and carrier nodes",
            "A jazz pianist touring small venues",
            "A pediatric nurse on night shifts",
            "A retired marathon runner",
            "A museum curator of medieval manuscripts",
            "A hobbyist beekeeper",
            "A video game speedrunner",
            "A landscape photographer"};
}

} // namespace

TEST_CASE("a singleton persona store always yields its persona") {
    const HashEmbedder e;
    PersonaStore store({"only one"}, e);
    const auto cat = fx::catalogue();
    for (std::uint64_t s = 0; s < 20; ++s) {
        CHECK(sample_persona(store, cat.at(fx::kSeedTool), 10, s) == "only one");
    }
    CHECK_THROWS(PersonaStore({}, e));
}

TEST_CASE("persona sampling picks uniformly from the brute-force top-k") {
    const HashEmbedder e;
    const auto personas = ten_personas();
    PersonaStore store(personas, e);
    const auto cat = fx::catalogue();
    const auto& tool = cat.at(fx::kSeedTool);

    const auto q = oracle::bow(tool_text(tool), 256);
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < personas.size(); ++i) {
        const auto v = oracle::bow(personas[i], 256);
        double s = 0;
        for (std::size_t d = 0; d < 256; ++d) s += q[d] * v[d];
        ranked.emplace_back(-s, i);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::string> top3;
    for (int i = 0; i < 3; ++i) top3.push_back(personas[ranked[i].second]);

    CHECK(std::find(top3.begin(), top3.end(), personas[2]) != top3.end());
    const auto picked = sample_persona(store, tool, 3, 42);
    CHECK(picked == sample_persona(store, tool, 3, 42));
    // the same index the seeded RNG draws over the brute-force list
    Rng rng(42);
    CHECK(picked == top3[rng.uniform_index(3)]);
    for (std::uint64_t s = 0; s < 50; ++s) {
        const auto p = sample_persona(store, tool, 3, s);
        CHECK(std::find(top3.begin(), top3.end(), p) != top3.end());
    }
    CHECK(sample_persona(store, tool, 100, 1).size() > 0);
}

TEST_CASE("bundled personas are non-empty") {
    CHECK(bundled_personas().size() >= 50);
    for (const auto& p : bundled_personas()) CHECK_FALSE(p.empty());
}

TEST_CASE("goal generation") {
    const auto cat = fx::catalogue();
    const auto& tool = cat.at(fx::kSeedTool);

    Sequence ok({fx::kGoal});
    CHECK(sample_goal(ok.gateway, tool, fx::kPersona) == fx::kGoal);
    CHECK(ok.seen->size() == 1);

    Sequence leak_then_ok({"Call fn_1126_cloud_transport_management for me.", fx::kGoal});
    CHECK(sample_goal(leak_then_ok.gateway, tool, fx::kPersona) == fx::kGoal);
    REQUIRE(leak_then_ok.seen->size() == 2);
    CHECK(leak_then_ok.seen->at(1).messages.size() == 3);

    Sequence param_leak({"Look up my nodeId please."});
    CHECK_THROWS_AS(sample_goal(param_leak.gateway, tool, fx::kPersona), GoalLeakError);
    CHECK(param_leak.seen->size() == 3);

    Sequence blank({"   "});
    CHECK_THROWS_AS(sample_goal(blank.gateway, tool, fx::kPersona), GoalLeakError);
}

TEST_CASE("leaked identifiers match whole words only") {
    const auto cat = fx::catalogue();
    const auto& tool = cat.at(fx::kSeedTool);
    CHECK(leaked_identifiers("check nodeId now", tool) == std::vector<std::string>{"nodeId"});
    CHECK(leaked_identifiers("check the node id now", tool).empty());
    CHECK(leaked_identifiers("mynodeIdx", tool).empty());
}

TEST_CASE("gold argument generation") {
    const auto cat = fx::catalogue();
    const auto& tool = cat.at(fx::kSeedTool);

    Sequence a1({R"({"nodeId": 437292, "transportRequestId": 957841})"});
    CHECK(sample_gold_args(a1.gateway, tool, fx::kPersona) == fx::gold_args());

    Sequence strings({R"(Here you go: {"nodeId": "437292", "transportRequestId": "957841"})"});
    CHECK(sample_gold_args(strings.gateway, tool, fx::kPersona) == fx::gold_args());

    Sequence missing_then_ok({R"({"nodeId": 1})", R"({"nodeId": 1, "transportRequestId": 2})"});
    CHECK(sample_gold_args(missing_then_ok.gateway, tool, fx::kPersona) ==
          json{{"nodeId", 1}, {"transportRequestId", 2}});
    CHECK(missing_then_ok.seen->size() == 2);

    Sequence never({"no json at all"});
    CHECK_THROWS_AS(sample_gold_args(never.gateway, tool, fx::kPersona), TypeMismatchError);
    CHECK(never.seen->size() == 3);

    Sequence param_free({"should not be asked"});
    CHECK(sample_gold_args(param_free.gateway, cat.at("fn_0007_list_cost_centers"), fx::kPersona) == json::object());
    CHECK(param_free.seen->empty());
}

TEST_CASE("a string parameter given a number triggers regeneration") {
    const auto cat = parse_catalogue(R"([{"name": "t", "description": "d", "parameters": {
        "region": {"type": "string", "description": "Region code", "required": true},
        "note": {"type": "string", "description": "Optional note", "required": false}}}])");
    Sequence number_then_string({R"({"region": 12})", R"({"region": "EU"})"});
    CHECK(sample_gold_args(number_then_string.gateway, cat.at("t"), "p") == json{{"region", "EU"}});
    CHECK(number_then_string.seen->size() == 2);

    Sequence always_number({R"({"region": 12})"});
    CHECK_THROWS_AS(sample_gold_args(always_number.gateway, cat.at("t"), "p"), TypeMismatchError);

    Sequence superset({R"({"region": "EU", "note": "x"})"});
    CHECK_THROWS_AS(sample_gold_args(superset.gateway, cat.at("t"), "p"), TypeMismatchError);
}

TEST_CASE("check_gold_args normalizes numbers") {
    const auto cat = fx::catalogue();
    json args = {{"nodeId", 437292.0}, {"transportRequestId", "957841"}};
    CHECK(check_gold_args(cat.at(fx::kSeedTool), args).empty());
    CHECK(args == fx::gold_args());
    CHECK(args.at("nodeId").is_number_integer());
    json frac = {{"nodeId", 1.5}, {"transportRequestId", 2}};
    CHECK_FALSE(check_gold_args(cat.at(fx::kSeedTool), frac).empty());
}

TEST_CASE("build_scenario") {
    const auto cat = fx::catalogue();
    const HashEmbedder e;
    ToolIndex index(cat, e);
    PersonaStore store(bundled_personas(), e);

    auto make = [&](const Catalogue& c, const ToolIndex& idx, std::uint64_t seed) {
        Sequence goal({fx::kGoal});
        Sequence slots({R"({"nodeId": 437292, "transportRequestId": 957841})"});
        ScenarioSources src{c, idx, store, goal.gateway, slots.gateway};
        return build_scenario(src, fx::kSeedTool, seed);
    };
    const auto s = make(cat, index, fx::kRunSeed);
    CHECK(s.pool.size() == 6);
    CHECK(s.distractors.members.size() == 5);
    CHECK(std::count(s.pool.begin(), s.pool.end(), fx::kSeedTool) == 1);
    CHECK(s.goal == fx::kGoal);
    CHECK(s.gold_args == fx::gold_args());
    CHECK(s.rng_seed == fx::kRunSeed);

    const auto again = make(cat, index, fx::kRunSeed);
    CHECK(scenario_to_json(again) == scenario_to_json(s));
    CHECK(scenario_from_json(scenario_to_json(s)).pool == s.pool);
    CHECK(scenario_to_json(scenario_from_json(scenario_to_json(s))) == scenario_to_json(s));

    const auto two = parse_catalogue(R"([
      {"name": "fn_1126_cloud_transport_management", "description": "Retrieve transport logs", "parameters": {
        "nodeId": {"type": "integer", "description": "Node", "required": true},
        "transportRequestId": {"type": "integer", "description": "Request", "required": true}}},
      {"name": "other", "description": "Something else", "parameters": {}}])");
    ToolIndex two_index(two, e);
    CHECK(make(two, two_index, 5).pool.size() == 2);
}

#include "doctest.h"

#include <map>
#include <set>

#include "a1_fixture.h"
#include "forge/error.h"
#include "forge/retrieval.h"
#include "oracles.h"

using namespace forge;

namespace {

Catalogue three_tools() {
    return parse_catalogue(R"([
      {"name": "track_shipment", "description": "Track a freight shipment by id", "parameters": {}},
      {"name": "track_parcel", "description": "Track a parcel shipment", "parameters": {}},
      {"name": "approve_leave", "description": "Approve employee leave request", "parameters": {}}
    ])");
}

std::vector<oracle::Named> named(const Catalogue& c) {
    std::vector<oracle::Named> out;
    for (const auto& t : c.tools()) out.push_back({t.name, tool_text(t)});
    return out;
}

} // namespace

TEST_CASE("tool_text") {
    const auto c = parse_catalogue(R"([
      {"name": "A", "description": "B", "parameters": {"p": {"type": "string", "description": "C", "required": true}}},
      {"name": "Z", "description": "B", "parameters": {}}])");
    CHECK(tool_text(c.at("A")) == "A\nB\np: C");
    CHECK(tool_text(c.at("Z")) == "Z\nB");
    const auto fx = fixture::catalogue();
    const auto text = tool_text(fx.at(fixture::kSeedTool));
    CHECK(text.find("\nnodeId: ") != std::string::npos);
    CHECK(text.find("\ntransportRequestId: ") != std::string::npos);
}

TEST_CASE("three-tool catalogue matches hand-ordered dot products") {
    const auto c = three_tools();
    const HashEmbedder e(256);
    const auto d = nearest_distractors(c, "track_shipment", 5, e);
    REQUIRE(d.members.size() == 2);
    CHECK(d.members[0].name == "track_parcel");
    CHECK(d.members[1].name == "approve_leave");
    const auto want = oracle::brute_force_neighbours(named(c), "track_shipment", 5, 256);
    for (std::size_t i = 0; i < 2; ++i) CHECK(d.members[i].score == doctest::Approx(want[i].second));
}

TEST_CASE("truncation, errors and seed exclusion") {
    const auto c = three_tools();
    const HashEmbedder e(256);
    CHECK(nearest_distractors(c, "approve_leave", 1, e).members.size() == 1);
    CHECK(nearest_distractors(c, "approve_leave", 100, e).members.size() == 2);
    CHECK_THROWS_AS(nearest_distractors(c, "nope", 5, e), UnknownToolError);
    CHECK_THROWS_AS(nearest_distractors(c, "approve_leave", 0, e), ConfigError);
    for (const auto& t : c.tools()) {
        for (const auto& m : nearest_distractors(c, t.name, 5, e).members) CHECK(m.name != t.name);
    }
}

TEST_CASE("a textual twin ranks first") {
    // same description under another name; the name line is the only difference
    const auto c = parse_catalogue(R"([
      {"name": "route", "description": "Plan transport routes", "parameters": {}},
      {"name": "carrier_rates", "description": "Plan transport routes for carriers", "parameters": {}},
      {"name": "route2", "description": "Plan transport routes", "parameters": {}}])");
    const HashEmbedder e(256);
    const auto d = nearest_distractors(c, "route", 2, e);
    CHECK(d.members.front().name == "route2");

    // exact duplicate text: tie at the top goes to the smaller name
    ToolIndex idx(c, e);
    const auto hits = idx.search(e.embed("Plan transport routes"), 3);
    CHECK(hits[0].score == doctest::Approx(hits[1].score));
    CHECK(hits[0].score > hits[2].score);
}

TEST_CASE("scores are non-increasing and agree with brute force on random catalogues") {
    Rng r(99);
    for (int round = 0; round < 20; ++round) {
        const std::size_t n = 2 + r.uniform_index(60);
        json arr = json::array();
        static const char* vocab[] = {"track", "freight", "order", "leave", "approve", "invoice", "carrier",
                                      "rate", "route", "plan", "node", "warehouse", "resource", "cost"};
        for (std::size_t i = 0; i < n; ++i) {
            std::string desc;
            const auto len = 1 + r.uniform_index(6);
            for (std::size_t w = 0; w < len; ++w) desc += std::string(w ? " " : "") + vocab[r.uniform_index(14)];
            arr.push_back({{"name", "t" + std::to_string(i)}, {"description", desc}, {"parameters", json::object()}});
        }
        const auto c = parse_catalogue(arr.dump());
        const HashEmbedder e(32);
        ToolIndex idx(c, e);
        for (const auto& t : c.tools()) {
            const auto got = idx.nearest_distractors(t.name, 5).members;
            const auto want = oracle::brute_force_neighbours(named(c), t.name, 5, 32);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].name == want[i].first);
                CHECK(std::abs(got[i].score - want[i].second) < 1e-12);
                if (i) CHECK(got[i].score <= got[i - 1].score);
            }
        }
    }
}

TEST_CASE("candidate pool") {
    DistractorSet d{"s", {{"a", 0.9}, {"b", 0.5}}};
    const auto pool = candidate_pool("s", d, 7);
    CHECK(pool.size() == 3);
    CHECK(std::set<std::string>(pool.begin(), pool.end()) == std::set<std::string>{"s", "a", "b"});
    CHECK(candidate_pool("s", d, 7) == pool);
    CHECK_THROWS(candidate_pool("t", d, 7));
}

TEST_CASE("gold position in the pool is roughly uniform") {
    DistractorSet d{"s", {{"a", 0.9}, {"b", 0.5}}};
    std::map<std::size_t, int> counts;
    const int n = 1000;
    for (std::uint64_t seed = 0; seed < n; ++seed) {
        const auto pool = candidate_pool("s", d, seed);
        counts[static_cast<std::size_t>(std::find(pool.begin(), pool.end(), "s") - pool.begin())]++;
    }
    double chi2 = 0;
    for (std::size_t slot = 0; slot < 3; ++slot) {
        const double expected = n / 3.0;
        chi2 += (counts[slot] - expected) * (counts[slot] - expected) / expected;
    }
    // 2 degrees of freedom, p = 0.001
    CHECK(chi2 < 13.82);
}

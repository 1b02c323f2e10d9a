#include "forge/scenario.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "forge/dialogue.h"
#include "forge/error.h"
#include "forge/prompts.h"
#include "forge/rng.h"

namespace forge {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool contains_word(std::string_view text, std::string_view word) {
    if (word.empty()) return false;
    for (auto pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
        const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
        const auto end = pos + word.size();
        const bool right_ok = end >= text.size() || !is_word_char(text[end]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

std::string required_param_lines(const Tool& tool) {
    std::string out;
    for (const auto& [name, spec] : tool.params) {
        if (!spec.required) continue;
        out += "- " + name + " (" + std::string(to_string(spec.type)) + "): " + spec.description + "\n";
    }
    return out;
}

// First {...} span of a reply, tolerating prose or code fences around it.
std::optional<json> extract_object(std::string_view reply) {
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    try {
        auto j = json::parse(reply.substr(open, close - open + 1));
        if (j.is_object()) return j;
    } catch (const json::parse_error&) {
    }
    return std::nullopt;
}

double temperature_for(const Gateway& gw, double fallback) { return gw.default_temperature().value_or(fallback); }

} // namespace

std::int64_t request_seed(std::uint64_t seed) { return static_cast<std::int64_t>(seed & 0x7fffffffULL); }

PersonaStore::PersonaStore(std::vector<std::string> personas, const Embedder& embedder)
    : personas_(std::move(personas)), embedder_(&embedder) {
    if (personas_.empty()) throw ConfigError("persona store is empty");
    vectors_.reserve(personas_.size());
    for (const auto& p : personas_) {
        if (trim(p).empty()) throw ConfigError("persona store contains an empty entry");
        vectors_.push_back(embedder.embed(p));
    }
}

std::vector<std::size_t> PersonaStore::top_k(const Vector& query, std::size_t k) const {
    std::vector<double> scores;
    scores.reserve(vectors_.size());
    for (const auto& v : vectors_) scores.push_back(dot(query, v));
    return top_k_indices(scores, k);
}

std::vector<std::string> load_personas(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError("persona file " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw SchemaError("persona file must be a JSON array of strings");
    std::vector<std::string> out;
    for (const auto& p : j) {
        if (!p.is_string()) throw SchemaError("persona entries must be strings");
        out.push_back(p.get<std::string>());
    }
    return out;
}

json scenario_to_json(const Scenario& s) {
    json members = json::array();
    for (const auto& m : s.distractors.members) members.push_back({{"name", m.name}, {"score", m.score}});
    return {{"id", s.id},
            {"seed_tool", s.seed_tool},
            {"persona", s.persona},
            {"goal", s.goal},
            {"distractors", members},
            {"pool", s.pool},
            {"gold_args", s.gold_args},
            {"rng_seed", s.rng_seed},
            {"prompt_version", prompts::kVersion}};
}

Scenario scenario_from_json(const json& j) {
    try {
        Scenario s;
        s.id = j.at("id").get<std::string>();
        s.seed_tool = j.at("seed_tool").get<std::string>();
        s.persona = j.value("persona", std::string());
        s.goal = j.value("goal", std::string());
        s.distractors.seed = s.seed_tool;
        for (const auto& m : j.value("distractors", json::array())) {
            s.distractors.members.push_back({m.at("name").get<std::string>(), m.value("score", 0.0)});
        }
        s.pool = j.value("pool", std::vector<std::string>{});
        s.gold_args = j.value("gold_args", json::object());
        s.rng_seed = j.value("rng_seed", std::uint64_t{0});
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed scenario: ") + e.what());
    }
}

std::vector<Scenario> read_scenarios(const std::filesystem::path& path) {
    std::vector<Scenario> out;
    for (const auto& row : read_jsonl(path)) out.push_back(scenario_from_json(row));
    return out;
}

std::string sample_persona(const PersonaStore& store, const Tool& seed_tool, std::size_t k, std::uint64_t rng_seed) {
    if (k == 0) throw ConfigError("persona k must be positive");
    const auto top = store.top_k(store.embedder().embed(tool_text(seed_tool)), k);
    Rng rng(rng_seed);
    return store.personas()[top[rng.uniform_index(top.size())]];
}

std::vector<std::string> leaked_identifiers(std::string_view text, const Tool& tool) {
    std::vector<std::string> out;
    if (contains_word(text, tool.name)) out.push_back(tool.name);
    for (const auto& [name, spec] : tool.params) {
        if (contains_word(text, name)) out.push_back(name);
    }
    return out;
}

std::string sample_goal(const Gateway& gw, const Tool& seed_tool, std::string_view persona, std::uint64_t seed) {
    CompletionRequest req;
    req.temperature = temperature_for(gw, 0.7);
    req.seed = request_seed(seed);
    req.messages.push_back({Role::User, prompts::render(prompts::kGoalGenerator,
                                                        {{"tool", tool_prompt_json(seed_tool).dump(2)},
                                                         {"persona", std::string(persona)}})});
    std::string problem;
    for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
        const std::string reply(trim(gw.complete(req)));
        const auto leaks = leaked_identifiers(reply, seed_tool);
        if (reply.empty()) {
            problem = "the goal was empty.";
        } else if (!leaks.empty()) {
            problem = "the goal mentions the identifier '" + leaks.front() + "'.";
        } else {
            return reply;
        }
        req.messages.push_back({Role::Assistant, reply});
        req.messages.push_back({Role::User, prompts::render(prompts::kRegenerationNote, {{"problem", problem}})});
    }
    throw GoalLeakError("goal for '" + seed_tool.name + "' rejected " + std::to_string(kGenerationAttempts) +
                        " times: " + problem);
}

std::string check_gold_args(const Tool& tool, json& args) {
    if (!args.is_object()) return "the reply is not a JSON object.";
    const auto required = required_args(tool);
    for (const auto& name : required) {
        if (!args.contains(name)) return "the value for '" + name + "' is missing.";
    }
    for (auto it = args.begin(); it != args.end(); ++it) {
        if (std::find(required.begin(), required.end(), it.key()) == required.end()) {
            return "'" + it.key() + "' is not a required parameter.";
        }
    }
    for (const auto& name : required) {
        const auto& spec = *tool.find_param(name);
        auto& value = args[name];
        if (spec.type == TypeTag::Integer || spec.type == TypeTag::Number) {
            std::optional<double> num;
            if (value.is_string()) num = parse_number(value.get<std::string>());
            if (value.is_number_float()) num = value.get<double>();
            if (num && spec.type == TypeTag::Integer && std::floor(*num) == *num && std::abs(*num) < 9.0e15) {
                value = static_cast<std::int64_t>(*num);
            } else if (num && spec.type == TypeTag::Number && value.is_string()) {
                value = *num;
            }
        }
        if (!value_matches(spec.type, value)) {
            return "the value for '" + name + "' must be of type " + std::string(to_string(spec.type)) + ".";
        }
    }
    return {};
}

json sample_gold_args(const Gateway& gw, const Tool& seed_tool, std::string_view persona, std::uint64_t seed) {
    if (required_args(seed_tool).empty()) return json::object();
    CompletionRequest req;
    req.temperature = temperature_for(gw, 0.7);
    req.seed = request_seed(seed);
    req.messages.push_back({Role::User, prompts::render(prompts::kSlotGenerator,
                                                        {{"tool", tool_prompt_json(seed_tool).dump(2)},
                                                         {"required_params", required_param_lines(seed_tool)},
                                                         {"persona", std::string(persona)}})});
    std::string problem;
    for (int attempt = 0; attempt < kGenerationAttempts; ++attempt) {
        const std::string reply = gw.complete(req);
        if (auto args = extract_object(reply)) {
            problem = check_gold_args(seed_tool, *args);
            if (problem.empty()) return *args;
        } else {
            problem = "the reply did not contain a JSON object.";
        }
        req.messages.push_back({Role::Assistant, reply});
        req.messages.push_back({Role::User, prompts::render(prompts::kRegenerationNote, {{"problem", problem}})});
    }
    throw TypeMismatchError("argument values for '" + seed_tool.name + "' rejected " +
                            std::to_string(kGenerationAttempts) + " times: " + problem);
}

Scenario build_scenario(const ScenarioSources& src, std::string_view seed_tool, std::uint64_t rng_seed) {
    const Tool& tool = src.catalogue.at(seed_tool);
    Scenario s;
    s.seed_tool = tool.name;
    s.rng_seed = rng_seed;
    s.id = tool.name + "#" + std::to_string(rng_seed);
    s.distractors = src.index.nearest_distractors(tool.name, src.k);
    s.pool = candidate_pool(tool.name, s.distractors, derive_seed(rng_seed, "pool"));
    s.persona = sample_persona(src.personas, tool, src.persona_k, derive_seed(rng_seed, "persona"));
    s.goal = sample_goal(src.goal_generator, tool, s.persona, derive_seed(rng_seed, "goal"));
    s.gold_args = sample_gold_args(src.slot_generator, tool, s.persona, derive_seed(rng_seed, "slots"));
    return s;
}

} // namespace forge

#include "forge/pipeline.h"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "forge/error.h"
#include "forge/log.h"
#include "forge/parallel.h"
#include "forge/retrieval.h"
#include "forge/rng.h"
#include "forge/sft.h"

namespace forge {

namespace fs = std::filesystem;

namespace {

json load_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

fs::path existing(const fs::path& base, const json& j, const char* key, bool required) {
    if (!j.contains(key)) {
        if (required) throw ConfigError(std::string("missing \"") + key + "\"");
        return {};
    }
    auto p = resolve(base, j.at(key).get<std::string>());
    if (!fs::exists(p)) throw ConfigError(std::string(key) + " not found: " + p.string());
    return p;
}

std::map<std::string, BackendConfig> parse_backends(const json& j, const fs::path& base) {
    std::map<std::string, BackendConfig> out;
    if (!j.is_object()) throw ConfigError("\"backends\" must map role names to backend configs");
    for (const auto& [role, b] : j.items()) {
        auto cfg = BackendConfig::from_json(b, base);
        if (cfg.kind == BackendKind::Scripted && !fs::exists(cfg.transcript)) {
            throw ConfigError("transcript for role '" + role + "' not found: " + cfg.transcript.string());
        }
        out.emplace(role, std::move(cfg));
    }
    return out;
}

std::uint64_t require_seed(const json& j) {
    if (!j.contains("rng_seed")) throw ConfigError("\"rng_seed\" is mandatory");
    const auto& s = j.at("rng_seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
        throw ConfigError("\"rng_seed\" must be a non-negative integer");
    }
    return s.get<std::uint64_t>();
}

template <typename T>
T positive(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) throw ConfigError(std::string(key) + " must be a positive integer");
    return v.get<T>();
}

std::string sanitize(std::string_view id) {
    std::string out;
    for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

} // namespace

PipelineConfig PipelineConfig::load(const fs::path& path) {
    return from_json(load_json_file(path), path.parent_path());
}

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw ConfigError("pipeline config must be an object");
    PipelineConfig c;
    try {
        c.rng_seed = require_seed(j);
        c.catalogue = existing(base, j, "catalogue", true);
        c.personas = existing(base, j, "personas", false);
        c.backends = parse_backends(j.value("backends", json::object()), base);
        if (j.contains("embedder")) {
            const auto& e = j.at("embedder");
            c.embedder.kind = e.value("kind", std::string("hash"));
            c.embedder.dimension = positive<std::size_t>(e, "dimension", 256);
            if (c.embedder.kind == "remote") {
                c.embedder.backend = BackendConfig::from_json(e.at("backend"), base);
            } else if (c.embedder.kind != "hash") {
                throw ConfigError("embedder kind must be hash or remote");
            }
            c.embedder.cache = resolve(base, e.value("cache", std::string()));
        }
        c.k = positive<std::size_t>(j, "k", kDefaultDistractors);
        c.persona_k = positive<std::size_t>(j, "persona_k", kDefaultPersonaK);
        c.engine.t_max = positive<std::size_t>(j, "t_max", 12);
        c.engine.regen_attempts = positive<int>(j, "regen_attempts", 5);
        c.engine.validate();
        c.output_dir = resolve(base, j.value("output_dir", std::string("out")));
        c.workers = positive<std::size_t>(j, "workers", 1);
        c.max_inflight = positive<std::size_t>(j, "max_inflight", 8);
        c.seed_tools = j.value("seed_tools", std::vector<std::string>{});
        c.llm_validation = j.value("llm_validation", true);
        c.record_timings = j.value("record_timings", true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad pipeline config: ") + e.what());
    }
    for (const char* role : {roles::kUser, roles::kAssistant, roles::kGoal, roles::kSlots}) c.backend(role);
    if (c.llm_validation) {
        c.backend(roles::kRelevancy);
        c.backend(roles::kCritique);
    }
    return c;
}

const BackendConfig& PipelineConfig::backend(const std::string& role) const {
    if (auto it = backends.find(role); it != backends.end()) return it->second;
    if (auto it = backends.find(roles::kDefault); it != backends.end()) return it->second;
    throw ConfigError("no backend for role '" + role + "' and no default backend");
}

GatewaySet GatewaySet::from_config(const std::map<std::string, BackendConfig>& backends) {
    GatewaySet set;
    for (const auto& [role, cfg] : backends) {
        set.by_role_[role] = std::make_shared<Gateway>(cfg);
        if (!cfg.record_to.empty()) set.record_paths_[role] = cfg.record_to;
    }
    return set;
}

void GatewaySet::set(const std::string& role, std::shared_ptr<Gateway> gw) { by_role_[role] = std::move(gw); }

bool GatewaySet::has(const std::string& role) const {
    return by_role_.contains(role) || by_role_.contains(roles::kDefault);
}

const Gateway& GatewaySet::get(const std::string& role) const {
    if (auto it = by_role_.find(role); it != by_role_.end()) return *it->second;
    if (auto it = by_role_.find(roles::kDefault); it != by_role_.end()) return *it->second;
    throw ConfigError("no gateway for role '" + role + "'");
}

void GatewaySet::save_recordings() const {
    for (const auto& [role, path] : record_paths_) {
        const auto& gw = by_role_.at(role);
        if (gw->recorder()) {
            gw->recorder()->save(path);
            log_info("recorded " + std::to_string(gw->recorder()->size()) + " " + role + " replies to " + path.string());
        }
    }
}

std::shared_ptr<const Embedder> make_embedder(const EmbedderConfig& cfg) {
    std::shared_ptr<const Embedder> inner;
    if (cfg.kind == "remote") {
        if (!cfg.backend) throw ConfigError("remote embedder needs a backend");
        inner = std::make_shared<RemoteEmbedder>(*cfg.backend, cfg.dimension);
    } else {
        inner = std::make_shared<HashEmbedder>(cfg.dimension);
    }
    auto caching = std::make_shared<CachingEmbedder>(inner);
    if (!cfg.cache.empty() && fs::exists(cfg.cache)) caching->load(cfg.cache);
    return caching;
}

std::uint64_t dialogue_seed(std::uint64_t run_seed, std::string_view seed_tool) {
    return derive_seed(derive_seed(run_seed, "dialogue"), seed_tool);
}

ordered_json GenerateSummary::to_json() const {
    ordered_json j;
    j["seeds"] = seeds;
    j["accepted"] = accepted;
    j["rejected"] = rejected;
    j["failed"] = failed;
    return j;
}

GenerateSummary generate(const PipelineConfig& cfg, const Catalogue& catalogue, const GatewaySet& gateways,
                         const std::vector<std::string>& seed_tools) {
    for (const auto& s : seed_tools) {
        if (!catalogue.find(s)) throw ConfigError("seed tool '" + s + "' is not in the catalogue");
    }
    InflightLimiter::global().set_limit(cfg.max_inflight);

    const auto embedder = make_embedder(cfg.embedder);
    const ToolIndex index(catalogue, *embedder);
    const PersonaStore personas(cfg.personas.empty() ? bundled_personas() : load_personas(cfg.personas), *embedder);
    const ScenarioSources sources{catalogue, index, personas, gateways.get(roles::kGoal),
                                  gateways.get(roles::kSlots), cfg.k, cfg.persona_k};

    EngineConfig ecfg = cfg.engine;
    if (auto t = gateways.get(roles::kUser).default_temperature()) ecfg.user_temperature = *t;
    if (auto t = gateways.get(roles::kAssistant).default_temperature()) ecfg.assistant_temperature = *t;
    const EngineContext ctx{catalogue, index, gateways.get(roles::kUser), gateways.get(roles::kAssistant), ecfg};

    std::optional<Judges> judges;
    if (cfg.llm_validation) judges.emplace(Judges{gateways.get(roles::kRelevancy), gateways.get(roles::kCritique)});

    GenerateSummary summary;
    summary.seeds = seed_tools.size();
    summary.outcomes.resize(seed_tools.size());
    parallel_for(seed_tools.size(), cfg.workers, [&](std::size_t i) {
        auto& out = summary.outcomes[i];
        out.seed_tool = seed_tools[i];
        try {
            out.scenario = build_scenario(sources, seed_tools[i], dialogue_seed(cfg.rng_seed, seed_tools[i]));
            auto syn = synthesize(*out.scenario, ctx);
            if (!syn.ok()) {
                out.status = DialogueStatus::Rejected;
                out.rejection = syn.rejection;
                return;
            }
            out.trace = std::move(syn.trace);
            out.report = run_cascade(*out.trace, *out.scenario, catalogue, judges ? &*judges : nullptr);
            out.status = out.report->verdict == Verdict::Accept ? DialogueStatus::Accepted : DialogueStatus::Rejected;
        } catch (const std::exception& e) {
            out.status = DialogueStatus::Failed;
            out.error = e.what();
            log_warn(seed_tools[i] + ": " + e.what());
        }
    });
    for (const auto& o : summary.outcomes) {
        summary.accepted += o.status == DialogueStatus::Accepted;
        summary.rejected += o.status == DialogueStatus::Rejected;
        summary.failed += o.status == DialogueStatus::Failed;
    }
    if (!cfg.embedder.cache.empty()) {
        if (auto caching = std::dynamic_pointer_cast<const CachingEmbedder>(embedder)) caching->save(cfg.embedder.cache);
    }
    return summary;
}

void write_generate_outputs(const GenerateSummary& summary, const fs::path& dir, bool with_timings) {
    fs::create_directories(dir);
    std::vector<json> corpus, scenarios;
    std::vector<ordered_json> rejected, reports, errors;
    for (const auto& o : summary.outcomes) {
        if (o.scenario) scenarios.push_back(scenario_to_json(*o.scenario));
        if (o.report) reports.push_back(report_to_json(*o.report, with_timings));
        switch (o.status) {
        case DialogueStatus::Accepted:
            corpus.push_back(trace_to_json(*o.trace));
            break;
        case DialogueStatus::Rejected: {
            ordered_json r;
            r["scenario_id"] = o.scenario ? o.scenario->id : "";
            r["seed_tool"] = o.seed_tool;
            if (o.rejection) {
                r["stage"] = "synthesis";
                r["reason"] = o.rejection->reason;
                r["detail"] = o.rejection->detail;
            } else {
                r["stage"] = "cascade";
                r["report"] = report_to_json(*o.report, with_timings);
            }
            if (o.trace) r["trace"] = trace_to_json(*o.trace);
            rejected.push_back(std::move(r));
            break;
        }
        case DialogueStatus::Failed: {
            ordered_json e;
            e["seed_tool"] = o.seed_tool;
            e["error"] = o.error;
            errors.push_back(std::move(e));
            break;
        }
        }
    }
    write_jsonl(dir / "corpus.jsonl", corpus);
    write_jsonl(dir / "scenarios.jsonl", scenarios);
    write_jsonl(dir / "rejected.jsonl", rejected);
    write_jsonl(dir / "reports.jsonl", reports);
    write_jsonl(dir / "errors.jsonl", errors);
    write_text(dir / "summary.json", summary.to_json().dump(2) + "\n");
}

BenchConfig BenchConfig::load(const fs::path& path) { return from_json(load_json_file(path), path.parent_path()); }

BenchConfig BenchConfig::from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw ConfigError("bench config must be an object");
    BenchConfig c;
    try {
        c.voting.rng_seed = require_seed(j);
        c.catalogue = existing(base, j, "catalogue", true);
        c.scenarios = existing(base, j, "scenarios", true);
        c.mode = parse_eval_mode(j.value("mode", std::string("dynamic")));
        if (c.mode == EvalMode::Static) c.gold_corpus = existing(base, j, "gold_corpus", true);
        c.backends = parse_backends(j.value("backends", json::object()), base);
        if (j.contains("voting")) {
            const auto& v = j.at("voting");
            c.voting.n_samples = positive<std::size_t>(v, "n", 3);
            c.voting.m_voters = positive<std::size_t>(v, "m", 3);
            c.voting.pool_fn = v.value("pool", std::string("mode"));
            c.voting.generator_temperature = v.value("temperature", 0.7);
        }
        c.voting.validate();
        c.t_max = positive<std::size_t>(j, "t_max", 12);
        c.workers = positive<std::size_t>(j, "workers", 1);
        c.assistant_temperature = j.value("assistant_temperature", 0.0);
        for (const auto& id : j.value("exclude", std::vector<std::string>{})) c.exclude.insert(id);
        if (j.contains("exclude_file")) {
            for (const auto& line : read_jsonl(existing(base, j, "exclude_file", true))) {
                c.exclude.insert(line.get<std::string>());
            }
        }
        c.output_dir = resolve(base, j.value("output_dir", std::string("bench")));
        c.label = j.value("label", std::string("assistant"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad bench config: ") + e.what());
    }
    auto need = [&](const char* role) {
        if (!c.backends.contains(role) && !c.backends.contains(roles::kDefault)) {
            throw ConfigError(std::string("bench config needs a '") + role + "' backend");
        }
    };
    need(roles::kAssistant);
    if (c.mode == EvalMode::Dynamic) {
        need(roles::kUser);
        if (c.voting.n_samples > 1) need(roles::kVoter);
    }
    return c;
}

BenchResult bench_run(const BenchConfig& cfg, const GatewaySet& gateways) {
    const auto catalogue = load_catalogue(cfg.catalogue);
    const auto scenarios = read_scenarios(cfg.scenarios);
    std::vector<EvalTask> tasks;
    if (cfg.mode == EvalMode::Static) {
        std::map<std::string, const Scenario*> by_id;
        for (const auto& s : scenarios) by_id.emplace(s.id, &s);
        for (auto& gold : read_traces(cfg.gold_corpus)) {
            const auto it = by_id.find(gold.scenario_id);
            if (it == by_id.end()) throw ConfigError("gold dialogue " + gold.dialogue_id + " has no scenario");
            tasks.push_back({*it->second, std::move(gold), EvalMode::Static});
        }
    } else {
        for (const auto& s : scenarios) tasks.push_back({s, std::nullopt, EvalMode::Dynamic});
    }
    const AssistantUnderTest assistant{gateways.get(roles::kAssistant), cfg.assistant_temperature};
    std::optional<VotingAgents> agents;
    if (cfg.mode == EvalMode::Dynamic) {
        const auto& user = gateways.get(roles::kUser);
        agents.emplace(VotingAgents{user, gateways.has(roles::kVoter) ? gateways.get(roles::kVoter) : user});
    }
    BenchOptions opts;
    opts.t_max = cfg.t_max;
    opts.workers = cfg.workers;
    opts.exclude = cfg.exclude;
    if (gateways.has(roles::kJudge) && cfg.backends.contains(roles::kJudge)) opts.judge = &gateways.get(roles::kJudge);
    return run_benchmark(tasks, catalogue, assistant, agents ? &*agents : nullptr, cfg.voting, opts);
}

void write_bench_outputs(const BenchResult& res, const BenchConfig& cfg) {
    const auto& dir = cfg.output_dir;
    fs::create_directories(dir / "audit");
    write_traces(dir / "traces.jsonl", res.traces);
    auto report = res.report.to_json();
    report["label"] = cfg.label;
    report["mode"] = std::string(to_string(cfg.mode));
    report["excluded"] = res.excluded;
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "report.csv", MetricReport::csv_header() + "\n" + res.report.csv_row(cfg.label) + "\n");
    std::map<std::string, const DialogueRow*> rows;
    for (const auto& r : res.report.per_dialogue) rows.emplace(r.dialogue_id, &r);
    for (std::size_t i = 0; i < res.traces.size(); ++i) {
        const auto& t = res.traces[i];
        ordered_json audit;
        audit["dialogue_id"] = t.dialogue_id;
        audit["excluded"] = cfg.exclude.contains(t.dialogue_id);
        const auto call = extract_call(t);
        audit["t_dagger"] = call.t_dagger ? ordered_json(*call.t_dagger) : ordered_json(nullptr);
        if (auto it = rows.find(t.dialogue_id); it != rows.end()) {
            audit["acc"] = it->second->ind.acc;
            audit["ftr"] = it->second->ind.ftr;
            audit["tar"] = it->second->ind.tar;
        }
        audit["trace"] = trace_to_json(t);
        char prefix[16];
        std::snprintf(prefix, sizeof prefix, "%05zu_", i);
        write_text(dir / "audit" / (prefix + sanitize(t.dialogue_id) + ".json"), audit.dump(2) + "\n");
    }
}

} // namespace forge

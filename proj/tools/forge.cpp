#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "forge/catalogue.h"
#include "forge/error.h"
#include "forge/eval.h"
#include "forge/log.h"
#include "forge/metrics.h"
#include "forge/pipeline.h"
#include "forge/retrieval.h"
#include "forge/sft.h"
#include "forge/validator.h"

namespace fs = std::filesystem;
using namespace forge;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

Catalogue catalogue_from(const std::string& catalogue_flag, const std::string& config_flag) {
    if (!catalogue_flag.empty()) return load_catalogue(catalogue_flag);
    if (!config_flag.empty()) return load_catalogue(PipelineConfig::load(config_flag).catalogue);
    throw ConfigError("pass --catalogue or --config");
}

struct GenerateArgs {
    std::string config;
    std::vector<std::string> seeds;
    std::size_t limit = 0;
    std::size_t workers = 0;
    std::string out;
};

int cmd_generate(const GenerateArgs& a) {
    auto cfg = PipelineConfig::load(a.config);
    if (a.workers > 0) cfg.workers = a.workers;
    if (!a.out.empty()) cfg.output_dir = a.out;
    const auto catalogue = load_catalogue(cfg.catalogue);
    std::vector<std::string> seeds = !a.seeds.empty() ? a.seeds : cfg.seed_tools;
    if (seeds.empty()) {
        for (const auto& t : catalogue.tools()) seeds.push_back(t.name);
    }
    if (a.limit > 0 && seeds.size() > a.limit) seeds.resize(a.limit);

    auto gateways = GatewaySet::from_config(cfg.backends);
    const auto summary = generate(cfg, catalogue, gateways, seeds);
    write_generate_outputs(summary, cfg.output_dir, cfg.record_timings);
    gateways.save_recordings();
    std::cout << summary.to_json().dump() << "\n";
    return kOk;
}

struct ValidateArgs {
    std::string corpus, scenarios, out, catalogue, config;
    bool no_llm = false;
};

int cmd_validate(const ValidateArgs& a) {
    const auto traces = read_traces(a.corpus);
    const auto scenarios = read_scenarios(a.scenarios);
    const auto catalogue = catalogue_from(a.catalogue, a.config);
    std::optional<GatewaySet> gateways;
    std::optional<Judges> judges;
    if (!a.no_llm) {
        if (a.config.empty()) throw ConfigError("LLM validation needs --config (or pass --no-llm)");
        const auto cfg = PipelineConfig::load(a.config);
        std::map<std::string, BackendConfig> jb{{roles::kRelevancy, cfg.backend(roles::kRelevancy)},
                                                {roles::kCritique, cfg.backend(roles::kCritique)}};
        gateways = GatewaySet::from_config(jb);
        judges.emplace(Judges{gateways->get(roles::kRelevancy), gateways->get(roles::kCritique)});
    }
    std::map<std::string, const Scenario*> by_id;
    for (const auto& s : scenarios) by_id.emplace(s.id, &s);
    std::vector<ordered_json> rows;
    std::size_t rejected = 0;
    for (const auto& t : traces) {
        const auto it = by_id.find(t.scenario_id);
        if (it == by_id.end()) throw ConfigError("no scenario for dialogue " + t.dialogue_id);
        const auto report = run_cascade(t, *it->second, catalogue, judges ? &*judges : nullptr);
        rejected += report.verdict == Verdict::Reject;
        rows.push_back(report_to_json(report));
    }
    if (!a.out.empty()) write_jsonl(a.out, rows);
    if (gateways) gateways->save_recordings();
    std::cout << "validated " << traces.size() << " dialogues, " << rejected << " rejected\n";
    return rejected == 0 ? kOk : kValidationFailure;
}

struct ExportArgs {
    std::string corpus, scenarios, out, catalogue, config;
};

int cmd_export(const ExportArgs& a) {
    const auto catalogue = catalogue_from(a.catalogue, a.config);
    const auto samples = slice_corpus(read_traces(a.corpus), read_scenarios(a.scenarios), catalogue);
    if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
    const auto manifest = export_samples(samples, a.out);
    std::cout << manifest.to_json().dump() << "\n";
    return kOk;
}

struct StatsArgs {
    std::string corpus, catalogue, out, csv;
};

int cmd_stats(const StatsArgs& a) {
    std::optional<Catalogue> catalogue;
    if (!a.catalogue.empty()) catalogue = load_catalogue(a.catalogue);
    const auto stats = compute_stats(read_traces(a.corpus), catalogue ? &*catalogue : nullptr);
    const auto text = stats.to_json().dump(2) + "\n";
    if (!a.out.empty()) write_file(a.out, text);
    if (!a.csv.empty()) write_file(a.csv, stats.to_csv());
    std::cout << text;
    return kOk;
}

struct ScoreArgs {
    std::string corpus, refs, judge, out, csv, label = "assistant";
    std::size_t workers = 1;
};

int cmd_score(const ScoreArgs& a) {
    const auto traces = read_traces(a.corpus);
    const auto refs = references_for(traces, read_scenarios(a.refs));
    std::optional<Gateway> judge;
    if (!a.judge.empty()) {
        std::ifstream in(a.judge);
        if (!in) throw ConfigError("cannot read judge config " + a.judge);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(a.judge + ": " + e.what());
        }
        judge.emplace(BackendConfig::from_json(j, fs::path(a.judge).parent_path()));
    }
    const auto report = score_corpus(traces, refs, {judge ? &*judge : nullptr, a.workers});
    const auto text = report.to_json().dump(2) + "\n";
    if (!a.out.empty()) write_file(a.out, text);
    if (!a.csv.empty()) write_file(a.csv, MetricReport::csv_header() + "\n" + report.csv_row(a.label) + "\n");
    std::cout << MetricReport::csv_header() << "\n" << report.csv_row(a.label) << "\n";
    return kOk;
}

int cmd_bench_run(const std::string& config) {
    const auto cfg = BenchConfig::load(config);
    auto gateways = GatewaySet::from_config(cfg.backends);
    const auto res = bench_run(cfg, gateways);
    write_bench_outputs(res, cfg);
    gateways.save_recordings();
    std::cout << MetricReport::csv_header() << "\n" << res.report.csv_row(cfg.label) << "\n";
    return kOk;
}

int cmd_bench_report(const std::string& dir) {
    const fs::path path = fs::path(dir) / "report.json";
    std::ifstream in(path);
    if (!in) throw ConfigError("no report.json in " + dir);
    json r;
    try {
        r = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    auto show = [](const json& v) { return v.is_null() ? std::string("NA") : v.dump(); };
    std::cout << "label     " << r.value("label", std::string("?")) << "\n"
              << "mode      " << r.value("mode", std::string("?")) << "\n"
              << "dialogues " << r.at("dialogues") << " (" << r.value("excluded", 0) << " excluded)\n";
    for (const char* k : {"acc", "ftr", "tar", "tcp", "tcr", "pkp", "pkr", "conv_rel", "ttr"}) {
        std::cout << k << std::string(10 - std::string(k).size(), ' ') << show(r.at(k)) << "\n";
    }
    for (const auto& [n, v] : r.at("ngd").items()) std::cout << "ngd" << n << "      " << show(v) << "\n";
    return kOk;
}

int cmd_lint(const std::string& path) {
    try {
        const auto c = load_catalogue(path);
        std::size_t params = 0, required = 0;
        for (const auto& t : c.tools()) {
            params += t.params.size();
            required += required_args(t).size();
        }
        std::cout << path << ": " << c.size() << " tools, " << params << " parameters (" << required
                  << " required)\n";
        return kOk;
    } catch (const ParseError& e) {
        std::cerr << path << ": " << e.what() << "\n";
    } catch (const SchemaError& e) {
        std::cerr << path << ": " << e.what() << "\n";
    }
    return kValidationFailure;
}

struct DistractorArgs {
    std::string catalogue, tool;
    std::size_t k = kDefaultDistractors;
    std::uint64_t seed = 0;
};

int cmd_distractors(const DistractorArgs& a) {
    const auto catalogue = load_catalogue(a.catalogue);
    const HashEmbedder embedder;
    const auto set = nearest_distractors(catalogue, a.tool, a.k, embedder);
    ordered_json j;
    j["seed"] = set.seed;
    j["distractors"] = ordered_json::array();
    for (const auto& m : set.members) j["distractors"].push_back({{"name", m.name}, {"score", m.score}});
    j["pool"] = candidate_pool(a.tool, set, a.seed);
    std::cout << j.dump(2) << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge: tool-calling dialogue synthesis, validation, export and evaluation"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log debug messages");

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Synthesize and validate dialogues");
    generate_cmd->add_option("-c,--config", gen.config, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
    generate_cmd->add_option("-s,--seed-tool", gen.seeds, "Seed tool (repeatable; default: config list or all)");
    generate_cmd->add_option("--limit", gen.limit, "Use at most this many seed tools");
    generate_cmd->add_option("-j,--workers", gen.workers, "Worker threads (overrides config)");
    generate_cmd->add_option("-o,--out", gen.out, "Output directory (overrides config)");

    ValidateArgs val;
    auto* validate_cmd = app.add_subcommand("validate", "Run the validator cascade over a corpus");
    validate_cmd->add_option("corpus", val.corpus, "Dialogue corpus (JSONL)")->required()->check(CLI::ExistingFile);
    validate_cmd->add_option("--scenarios", val.scenarios, "Scenarios (JSONL)")->required()->check(CLI::ExistingFile);
    validate_cmd->add_option("-o,--out", val.out, "Reports output (JSONL)");
    validate_cmd->add_option("--catalogue", val.catalogue, "Tool catalogue");
    validate_cmd->add_option("-c,--config", val.config, "Pipeline config for catalogue and judges");
    validate_cmd->add_flag("--no-llm", val.no_llm, "Skip the LLM judges");

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export", "Turn-slice a corpus into chat-jsonl training samples");
    export_cmd->add_option("corpus", exp.corpus, "Accepted dialogues (JSONL)")->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--scenarios", exp.scenarios, "Scenarios (JSONL)")->required()->check(CLI::ExistingFile);
    export_cmd->add_option("-o,--out", exp.out, "Samples output (JSONL)")->required();
    export_cmd->add_option("--catalogue", exp.catalogue, "Tool catalogue");
    export_cmd->add_option("-c,--config", exp.config, "Pipeline config (for the catalogue)");

    StatsArgs st;
    auto* stats_cmd = app.add_subcommand("stats", "Corpus histograms");
    stats_cmd->add_option("corpus", st.corpus, "Dialogue corpus (JSONL)")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--catalogue", st.catalogue, "Tool catalogue (parameter counts)");
    stats_cmd->add_option("-o,--out", st.out, "JSON output");
    stats_cmd->add_option("--csv", st.csv, "CSV output");

    ScoreArgs sc;
    auto* score_cmd = app.add_subcommand("score", "Compute metrics for a corpus against its scenarios");
    score_cmd->add_option("corpus", sc.corpus, "Dialogue corpus (JSONL)")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--refs", sc.refs, "Scenarios (JSONL)")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--judge", sc.judge, "Rubric judge backend config (JSON)");
    score_cmd->add_option("-o,--out", sc.out, "Report output (JSON)");
    score_cmd->add_option("--csv", sc.csv, "Table row output (CSV)");
    score_cmd->add_option("--label", sc.label, "Row label");
    score_cmd->add_option("-j,--workers", sc.workers, "Worker threads");

    auto* bench_cmd = app.add_subcommand("bench", "Benchmark an assistant backend");
    bench_cmd->require_subcommand(1);
    std::string bench_config, bench_dir;
    auto* bench_run_cmd = bench_cmd->add_subcommand("run", "Run a benchmark config");
    bench_run_cmd->add_option("config", bench_config, "Bench config (JSON)")->required()->check(CLI::ExistingFile);
    auto* bench_report_cmd = bench_cmd->add_subcommand("report", "Summarize a results directory");
    bench_report_cmd->add_option("dir", bench_dir, "Results directory")->required();

    auto* catalogue_cmd = app.add_subcommand("catalogue", "Catalogue utilities");
    catalogue_cmd->require_subcommand(1);
    std::string lint_path;
    auto* lint_cmd = catalogue_cmd->add_subcommand("lint", "Check a catalogue file");
    lint_cmd->add_option("file", lint_path, "Catalogue (JSON)")->required()->check(CLI::ExistingFile);

    DistractorArgs dis;
    auto* distractors_cmd = app.add_subcommand("distractors", "Nearest distractors and candidate pool for a tool");
    distractors_cmd->add_option("catalogue", dis.catalogue, "Catalogue (JSON)")->required()->check(CLI::ExistingFile);
    distractors_cmd->add_option("-t,--tool", dis.tool, "Seed tool")->required();
    distractors_cmd->add_option("-k", dis.k, "Number of distractors");
    distractors_cmd->add_option("--seed", dis.seed, "Pool shuffle seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }
    if (verbose) {
        set_log_sink([](LogLevel, std::string_view m) { std::cerr << "[forge] " << m << "\n"; });
    }

    try {
        if (*generate_cmd) return cmd_generate(gen);
        if (*validate_cmd) return cmd_validate(val);
        if (*export_cmd) return cmd_export(exp);
        if (*stats_cmd) return cmd_stats(st);
        if (*score_cmd) return cmd_score(sc);
        if (*bench_run_cmd) return cmd_bench_run(bench_config);
        if (*bench_report_cmd) return cmd_bench_report(bench_dir);
        if (*lint_cmd) return cmd_lint(lint_path);
        if (*distractors_cmd) return cmd_distractors(dis);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kConfigError;
    } catch (const SchemaError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationFailure;
    }
    return kOk;
}

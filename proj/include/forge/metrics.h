#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "forge/dialogue.h"
#include "forge/llm_gateway.h"
#include "forge/scenario.h"

namespace forge {

// The scored call c(d): tools and arguments of the first tool-bearing turn.
struct CallRecord {
    std::set<std::string> tnames;
    std::map<std::string, json> args_by_tool;
    std::optional<std::size_t> t_dagger; // 1-based

    bool empty() const { return tnames.empty(); }
};

struct Reference {
    std::string gold_tool;
    json gold_args = json::object();

    static Reference from(const Scenario& scn) { return {scn.seed_tool, scn.gold_args}; }
};

struct Indicators {
    int acc = 0;
    std::size_t ftr = 0;
    int tar = 0;

    bool operator==(const Indicators&) const = default;
};

// Malformed turns carry no calls; a repeated tool name within one turn keeps
// the first argument map.
CallRecord extract_call(const DialogueTrace& d);
Indicators dialogue_indicators(const CallRecord& c, const Reference& g);

// nullopt marks a zero denominator.
struct PrecisionRecall {
    std::optional<double> tcp, tcr, pkp, pkr;
};

// Argument keys of a call, unioned over every called tool.
std::set<std::string> call_keys(const CallRecord& c);

// Throws Error on an empty corpus or mismatched lengths.
PrecisionRecall corpus_prf(const std::vector<CallRecord>& calls, const std::vector<Reference>& refs);

// 1 -> 0, 2 -> 0.5, 3 -> 1.
double grade_similarity(int grade);
// Mean mapped grade; nullopt for a dialogue without assistant turns.
std::optional<double> conv_relevancy_from_grades(const std::vector<int>& grades);
// First digit 1..3 in the reply. Throws JudgeFormatError.
int parse_grade(std::string_view reply);
// One rubric call per assistant turn against h^a_t, thoughts removed from
// both the history and the judged reply. Judge temperature 0.
std::vector<int> rubric_grades(const DialogueTrace& d, const Gateway& judge);
std::optional<double> conv_relevancy(const DialogueTrace& d, const Gateway& judge);

// Lowercased runs of ASCII letters/digits and non-ASCII bytes.
std::vector<std::string> tokenize(std::string_view text);
// Natural-language content of every well-formed assistant turn; thoughts and
// tool-call payloads are not user-visible prose.
std::vector<std::vector<std::string>> assistant_segments(const std::vector<DialogueTrace>& corpus);

struct LexicalMetrics {
    std::optional<double> ttr;
    std::map<int, std::optional<double>> ngd; // n -> value; n-grams never span two turns
};

LexicalMetrics lexical_metrics(const std::vector<std::vector<std::string>>& segments, std::vector<int> ns = {2, 3, 4});
LexicalMetrics lexical_metrics(const std::vector<DialogueTrace>& corpus);

struct DialogueRow {
    std::string dialogue_id;
    Indicators ind;
    std::optional<std::size_t> t_dagger;
    std::optional<double> conv_rel;
};

struct MetricReport {
    std::size_t dialogues = 0;
    double acc = 0.0, ftr = 0.0, tar = 0.0;
    PrecisionRecall prf;
    std::optional<double> conv_rel; // only with a rubric judge
    LexicalMetrics lexical;
    std::vector<DialogueRow> per_dialogue;

    ordered_json to_json() const;
    static std::string csv_header();
    std::string csv_row(const std::string& label) const;
};

struct ScoreOptions {
    const Gateway* judge = nullptr;
    std::size_t workers = 1;
};

// traces[i] is scored against refs[i].
MetricReport score_corpus(const std::vector<DialogueTrace>& traces, const std::vector<Reference>& refs,
                          const ScoreOptions& opts = {});

// Pairs each trace with the scenario named by its scenario_id.
std::vector<Reference> references_for(const std::vector<DialogueTrace>& traces, const std::vector<Scenario>& scenarios);

} // namespace forge

#include "forge/metrics.h"

#include <cctype>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "forge/error.h"
#include "forge/parallel.h"
#include "forge/prompts.h"

namespace forge {

namespace {

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return buf;
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<double> ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

} // namespace

CallRecord extract_call(const DialogueTrace& d) {
    CallRecord rec;
    std::size_t t = 0;
    for (const auto& m : d.messages) {
        if (m.role != Role::Assistant) continue;
        ++t;
        if (m.assistant.malformed || !m.assistant.has_tool_calls()) continue;
        for (const auto& call : *m.assistant.tool_calls) {
            rec.tnames.insert(call.name);
            rec.args_by_tool.emplace(call.name, call.args);
        }
        rec.t_dagger = t;
        break;
    }
    return rec;
}

Indicators dialogue_indicators(const CallRecord& c, const Reference& g) {
    Indicators ind;
    if (c.empty()) {
        ind.tar = 1;
        return ind;
    }
    for (const auto& name : c.tnames) ind.ftr += name != g.gold_tool;
    if (c.tnames.size() == 1 && *c.tnames.begin() == g.gold_tool) {
        ind.acc = args_equal(c.args_by_tool.at(g.gold_tool), g.gold_args) ? 1 : 0;
    }
    return ind;
}

std::set<std::string> call_keys(const CallRecord& c) {
    std::set<std::string> keys;
    for (const auto& [_, args] : c.args_by_tool) {
        if (!args.is_object()) continue;
        for (const auto& [k, __] : args.items()) keys.insert(k);
    }
    return keys;
}

PrecisionRecall corpus_prf(const std::vector<CallRecord>& calls, const std::vector<Reference>& refs) {
    if (calls.empty()) throw Error("precision/recall over an empty corpus");
    if (calls.size() != refs.size()) throw Error("calls and references differ in length");
    double tool_hits = 0, key_hits = 0, pred_tools = 0, pred_keys = 0, ref_tools = 0, ref_keys = 0;
    for (std::size_t i = 0; i < calls.size(); ++i) {
        const auto& c = calls[i];
        const auto& g = refs[i];
        const auto ckeys = call_keys(c);
        pred_tools += static_cast<double>(c.tnames.size());
        pred_keys += static_cast<double>(ckeys.size());
        ref_tools += 1;
        ref_keys += static_cast<double>(g.gold_args.size());
        if (c.empty() || !c.tnames.contains(g.gold_tool)) continue;
        tool_hits += 1;
        for (const auto& [k, _] : g.gold_args.items()) key_hits += ckeys.contains(k);
    }
    return {ratio(tool_hits, pred_tools), ratio(tool_hits, ref_tools), ratio(key_hits, pred_keys),
            ratio(key_hits, ref_keys)};
}

double grade_similarity(int grade) {
    switch (grade) {
    case 1: return 0.0;
    case 2: return 0.5;
    case 3: return 1.0;
    }
    throw Error("rubric grade must be 1, 2 or 3");
}

std::optional<double> conv_relevancy_from_grades(const std::vector<int>& grades) {
    if (grades.empty()) return std::nullopt;
    double sum = 0;
    for (int g : grades) sum += grade_similarity(g);
    return sum / static_cast<double>(grades.size());
}

int parse_grade(std::string_view reply) {
    for (char c : reply) {
        if (c >= '1' && c <= '3') return c - '0';
        if (std::isdigit(static_cast<unsigned char>(c))) break;
    }
    throw JudgeFormatError("no 1-3 grade in rubric reply '" + std::string(reply.substr(0, 80)) + "'");
}

std::vector<int> rubric_grades(const DialogueTrace& d, const Gateway& judge) {
    std::vector<int> grades;
    std::string history;
    for (const auto& m : d.messages) {
        if (m.role == Role::User) {
            history += "User: " + m.text + "\n";
            continue;
        }
        const auto reply = public_payload(m.assistant);
        CompletionRequest req;
        req.messages = {{Role::User, prompts::render(prompts::kRubricJudge, {{"history", history}, {"reply", reply}})}};
        req.temperature = 0.0;
        req.seed = 0;
        grades.push_back(parse_grade(judge.complete(req)));
        history += "Assistant: " + reply + "\n";
    }
    return grades;
}

std::optional<double> conv_relevancy(const DialogueTrace& d, const Gateway& judge) {
    return conv_relevancy_from_grades(rubric_grades(d, judge));
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_word_byte(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::vector<std::string>> assistant_segments(const std::vector<DialogueTrace>& corpus) {
    std::vector<std::vector<std::string>> segs;
    for (const auto& d : corpus) {
        for (const auto& m : d.messages) {
            if (m.role != Role::Assistant || m.assistant.malformed || m.assistant.tool_calls) continue;
            segs.push_back(tokenize(m.assistant.content));
        }
    }
    return segs;
}

LexicalMetrics lexical_metrics(const std::vector<std::vector<std::string>>& segments, std::vector<int> ns) {
    LexicalMetrics out;
    std::unordered_set<std::string> types;
    std::size_t tokens = 0;
    for (const auto& seg : segments) {
        tokens += seg.size();
        types.insert(seg.begin(), seg.end());
    }
    out.ttr = ratio(static_cast<double>(types.size()), static_cast<double>(tokens));
    for (int n : ns) {
        if (n < 1) throw Error("n-gram order must be positive");
        const auto un = static_cast<std::size_t>(n);
        std::unordered_set<std::string> unique;
        std::size_t total = 0;
        for (const auto& seg : segments) {
            for (std::size_t i = 0; i + un <= seg.size(); ++i) {
                std::string key;
                for (std::size_t j = 0; j < un; ++j) {
                    key += seg[i + j];
                    key += '\x1f';
                }
                unique.insert(std::move(key));
                ++total;
            }
        }
        out.ngd[n] = ratio(static_cast<double>(unique.size()), static_cast<double>(total));
    }
    return out;
}

LexicalMetrics lexical_metrics(const std::vector<DialogueTrace>& corpus) {
    return lexical_metrics(assistant_segments(corpus));
}

ordered_json MetricReport::to_json() const {
    ordered_json j;
    j["dialogues"] = dialogues;
    j["acc"] = acc;
    j["ftr"] = ftr;
    j["tar"] = tar;
    j["tcp"] = opt_json(prf.tcp);
    j["tcr"] = opt_json(prf.tcr);
    j["pkp"] = opt_json(prf.pkp);
    j["pkr"] = opt_json(prf.pkr);
    j["conv_rel"] = opt_json(conv_rel);
    j["ttr"] = opt_json(lexical.ttr);
    j["ngd"] = ordered_json::object();
    for (const auto& [n, v] : lexical.ngd) j["ngd"][std::to_string(n)] = opt_json(v);
    j["per_dialogue"] = ordered_json::array();
    for (const auto& row : per_dialogue) {
        ordered_json r;
        r["dialogue_id"] = row.dialogue_id;
        r["acc"] = row.ind.acc;
        r["ftr"] = row.ind.ftr;
        r["tar"] = row.ind.tar;
        r["t_dagger"] = row.t_dagger ? ordered_json(*row.t_dagger) : ordered_json(nullptr);
        r["conv_rel"] = opt_json(row.conv_rel);
        j["per_dialogue"].push_back(std::move(r));
    }
    return j;
}

std::string MetricReport::csv_header() { return "model,tcp,tcr,pkp,pkr,acc,ftr,tar,conv_rel,ttr,ngd2,ngd3,ngd4"; }

std::string MetricReport::csv_row(const std::string& label) const {
    auto ngd_at = [&](int n) {
        const auto it = lexical.ngd.find(n);
        return it == lexical.ngd.end() ? std::string("NA") : fmt_opt(it->second);
    };
    std::string row = label;
    for (const auto& v : {prf.tcp, prf.tcr, prf.pkp, prf.pkr, std::optional<double>(acc), std::optional<double>(ftr),
                          std::optional<double>(tar), conv_rel, lexical.ttr}) {
        row += "," + fmt_opt(v);
    }
    row += "," + ngd_at(2) + "," + ngd_at(3) + "," + ngd_at(4);
    return row;
}

MetricReport score_corpus(const std::vector<DialogueTrace>& traces, const std::vector<Reference>& refs,
                          const ScoreOptions& opts) {
    if (traces.empty()) throw Error("cannot score an empty corpus");
    if (traces.size() != refs.size()) throw Error("traces and references differ in length");
    MetricReport rep;
    rep.dialogues = traces.size();
    std::vector<CallRecord> calls(traces.size());
    rep.per_dialogue.resize(traces.size());
    parallel_for(traces.size(), opts.workers, [&](std::size_t i) {
        calls[i] = extract_call(traces[i]);
        auto& row = rep.per_dialogue[i];
        row.dialogue_id = traces[i].dialogue_id;
        row.ind = dialogue_indicators(calls[i], refs[i]);
        row.t_dagger = calls[i].t_dagger;
        if (opts.judge) row.conv_rel = conv_relevancy(traces[i], *opts.judge);
    });
    double acc = 0, ftr = 0, tar = 0, rel = 0;
    std::size_t rel_n = 0;
    for (const auto& row : rep.per_dialogue) {
        acc += row.ind.acc;
        ftr += static_cast<double>(row.ind.ftr);
        tar += row.ind.tar;
        if (row.conv_rel) {
            rel += *row.conv_rel;
            ++rel_n;
        }
    }
    const auto n = static_cast<double>(traces.size());
    rep.acc = acc / n;
    rep.ftr = ftr / n;
    rep.tar = tar / n;
    if (opts.judge && rel_n > 0) rep.conv_rel = rel / static_cast<double>(rel_n);
    rep.prf = corpus_prf(calls, refs);
    rep.lexical = lexical_metrics(traces);
    return rep;
}

std::vector<Reference> references_for(const std::vector<DialogueTrace>& traces, const std::vector<Scenario>& scenarios) {
    std::unordered_map<std::string, const Scenario*> by_id;
    for (const auto& s : scenarios) by_id.emplace(s.id, &s);
    std::vector<Reference> refs;
    refs.reserve(traces.size());
    for (const auto& d : traces) {
        const auto it = by_id.find(d.scenario_id);
        if (it == by_id.end()) throw Error("no scenario '" + d.scenario_id + "' for dialogue " + d.dialogue_id);
        refs.push_back(Reference::from(*it->second));
    }
    return refs;
}

} // namespace forge

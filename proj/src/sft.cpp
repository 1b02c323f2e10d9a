#include "forge/sft.h"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "forge/engine.h"
#include "forge/error.h"
#include "forge/hashing.h"
#include "forge/prompts.h"

namespace forge {

std::vector<ChatMessage> SftSample::messages() const {
    auto all = context;
    all.push_back({Role::Assistant, target});
    return all;
}

std::string reference_system_prompt(const Catalogue& catalogue, const std::vector<std::string>& pool) {
    return assistant_system_prompt(catalogue, pool);
}

std::vector<SftSample> slice_dialogue(const DialogueTrace& d, const std::string& sys_prompt) {
    std::vector<SftSample> out;
    std::vector<ChatMessage> prefix{{Role::System, sys_prompt}};
    std::size_t t = 0;
    for (const auto& m : d.messages) {
        if (m.role == Role::User) {
            prefix.push_back({Role::User, m.text});
            continue;
        }
        ++t;
        SftSample s;
        s.dialogue_id = d.dialogue_id;
        s.turn_index = t;
        s.context = prefix;
        s.target = serialize_assistant(m.assistant);
        s.learn.assign(prefix.size() + 1, false);
        s.learn.back() = true;
        prefix.push_back({Role::Assistant, s.target});
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<SftSample> slice_corpus(const std::vector<DialogueTrace>& traces, const std::vector<Scenario>& scenarios,
                                    const Catalogue& catalogue) {
    std::unordered_map<std::string, const Scenario*> by_id;
    for (const auto& s : scenarios) by_id.emplace(s.id, &s);
    std::vector<SftSample> out;
    for (const auto& d : traces) {
        const auto it = by_id.find(d.scenario_id);
        if (it == by_id.end()) throw Error("no scenario '" + d.scenario_id + "' for dialogue " + d.dialogue_id);
        auto samples = slice_dialogue(d, reference_system_prompt(catalogue, it->second->pool));
        out.insert(out.end(), std::make_move_iterator(samples.begin()), std::make_move_iterator(samples.end()));
    }
    return out;
}

ordered_json documented_training_setup() {
    ordered_json j;
    j["executed"] = false;
    j["method"] = "LoRA";
    j["lora_rank"] = 16;
    j["lora_alpha"] = 16;
    j["optimizer"] = "AdamW";
    j["learning_rate"] = 1e-4;
    j["lr_schedule"] = "cosine";
    j["epochs"] = 1;
    j["batch_size"] = 1;
    j["quantization"] = "8-bit";
    j["loss_masking"] = "final assistant message only";
    return j;
}

ordered_json ExportManifest::to_json() const {
    ordered_json j;
    j["format"] = format;
    j["sample_count"] = sample_count;
    j["dialogue_count"] = dialogue_count;
    j["file_sha256"] = file_sha256;
    j["prompt_version"] = prompt_version;
    j["training"] = documented_training_setup();
    return j;
}

ordered_json sample_to_json(const SftSample& s) {
    ordered_json j;
    j["dialogue_id"] = s.dialogue_id;
    j["turn_index"] = s.turn_index;
    j["messages"] = ordered_json::array();
    const auto msgs = s.messages();
    for (std::size_t i = 0; i < msgs.size(); ++i) {
        ordered_json m;
        m["role"] = std::string(to_string(msgs[i].role));
        m["content"] = msgs[i].content;
        m["learn"] = i < s.learn.size() && s.learn[i];
        j["messages"].push_back(std::move(m));
    }
    return j;
}

SftSample sample_from_json(const json& j) {
    SftSample s;
    try {
        s.dialogue_id = j.at("dialogue_id").get<std::string>();
        s.turn_index = j.at("turn_index").get<std::size_t>();
        const auto& msgs = j.at("messages");
        if (!msgs.is_array() || msgs.size() < 2) throw ParseError("sample needs at least two messages");
        for (std::size_t i = 0; i < msgs.size(); ++i) {
            const auto& m = msgs[i];
            ChatMessage cm{parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()};
            s.learn.push_back(m.at("learn").get<bool>());
            if (i + 1 == msgs.size()) {
                if (cm.role != Role::Assistant) throw ParseError("sample target must be an assistant message");
                s.target = std::move(cm.content);
            } else {
                s.context.push_back(std::move(cm));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad sample: ") + e.what());
    }
    return s;
}

std::filesystem::path manifest_path(const std::filesystem::path& export_path) {
    auto p = export_path;
    p.replace_extension(".manifest.json");
    return p;
}

ExportManifest export_samples(const std::vector<SftSample>& samples, const std::filesystem::path& path,
                              ExportFormat format) {
    if (format != ExportFormat::ChatJsonl) throw ConfigError("unsupported export format");
    std::string body;
    std::size_t dialogues = 0;
    const std::string* last_id = nullptr;
    for (const auto& s : samples) {
        body += sample_to_json(s).dump();
        body += '\n';
        if (!last_id || *last_id != s.dialogue_id) ++dialogues;
        last_id = &s.dialogue_id;
    }
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out << body;
        if (!out) throw Error("write failed: " + path.string());
    }
    ExportManifest m;
    m.sample_count = samples.size();
    m.dialogue_count = dialogues;
    m.file_sha256 = sha256_hex(body);
    m.prompt_version = std::string(prompts::kVersion);
    std::ofstream mout(manifest_path(path), std::ios::binary | std::ios::trunc);
    if (!mout) throw Error("cannot write " + manifest_path(path).string());
    mout << m.to_json().dump(2) << '\n';
    return m;
}

std::vector<SftSample> read_export(const std::filesystem::path& path) {
    std::vector<SftSample> out;
    for (const auto& row : read_jsonl(path)) out.push_back(sample_from_json(row));
    return out;
}

namespace {

ordered_json histogram_json(const Histogram& h) {
    ordered_json j = ordered_json::object();
    for (const auto& [bucket, count] : h) j[std::to_string(bucket)] = count;
    return j;
}

std::size_t declared_params(const DialogueTrace& d, const Catalogue* catalogue) {
    if (catalogue) {
        if (const auto* tool = catalogue->find(d.seed_tool)) return tool->params.size();
    }
    for (auto it = d.messages.rbegin(); it != d.messages.rend(); ++it) {
        if (it->role == Role::Assistant && it->assistant.has_tool_calls()) {
            return it->assistant.tool_calls->front().args.size();
        }
    }
    return 0;
}

} // namespace

ordered_json CorpusStats::to_json() const {
    ordered_json j;
    j["dialogues"] = dialogues;
    j["turns_histogram"] = histogram_json(turns);
    j["params_histogram"] = histogram_json(params);
    j["disamb_turns_histogram"] = histogram_json(disamb);
    j["paramfill_turns_histogram"] = histogram_json(paramfill);
    j["missing_boundary"] = missing_boundary;
    return j;
}

std::string CorpusStats::to_csv() const {
    std::ostringstream out;
    out << "histogram,bucket,count\n";
    const std::pair<const char*, const Histogram*> all[] = {
        {"turns", &turns}, {"params", &params}, {"disamb_turns", &disamb}, {"paramfill_turns", &paramfill}};
    for (const auto& [name, h] : all) {
        for (const auto& [bucket, count] : *h) out << name << ',' << bucket << ',' << count << '\n';
    }
    return out.str();
}

CorpusStats compute_stats(const std::vector<DialogueTrace>& corpus, const Catalogue* catalogue) {
    CorpusStats s;
    s.dialogues = corpus.size();
    for (const auto& d : corpus) {
        const auto t = d.assistant_turns();
        ++s.turns[t];
        ++s.params[declared_params(d, catalogue)];
        if (!d.phase_boundary || *d.phase_boundary > t) {
            ++s.missing_boundary;
            continue;
        }
        ++s.disamb[*d.phase_boundary];
        ++s.paramfill[t - *d.phase_boundary];
    }
    return s;
}

std::size_t assistant_turn_count(const json& row) {
    if (!row.is_object()) throw ParseError("corpus row is not an object");
    for (const char* key : {"messages", "conversation", "conversations", "dialogue"}) {
        if (!row.contains(key) || !row.at(key).is_array()) continue;
        std::size_t n = 0;
        for (const auto& m : row.at(key)) {
            if (!m.is_object()) continue;
            std::string role;
            if (m.contains("role") && m.at("role").is_string()) role = m.at("role").get<std::string>();
            else if (m.contains("from") && m.at("from").is_string()) role = m.at("from").get<std::string>();
            n += role == "assistant" || role == "gpt";
        }
        return n;
    }
    throw ParseError("corpus row has no message list");
}

} // namespace forge

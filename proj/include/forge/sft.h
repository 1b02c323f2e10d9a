#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "forge/catalogue.h"
#include "forge/dialogue.h"
#include "forge/scenario.h"

namespace forge {

struct SftSample {
    std::string dialogue_id;
    std::size_t turn_index = 0;        // t, 1-based
    std::vector<ChatMessage> context;  // SYS, u_1, a_1, ..., u_t
    std::string target;                // serialized a_t
    std::vector<bool> learn;           // one flag per message of context + target

    std::vector<ChatMessage> messages() const; // context followed by the target
    bool operator==(const SftSample&) const = default;
};

// The assistant reference prompt with the pool tools in its {{tools}} slot.
std::string reference_system_prompt(const Catalogue& catalogue, const std::vector<std::string>& pool);

// One sample per assistant turn.
std::vector<SftSample> slice_dialogue(const DialogueTrace& d, const std::string& sys_prompt);

// Every trace is matched to its scenario by scenario_id for the tool pool.
std::vector<SftSample> slice_corpus(const std::vector<DialogueTrace>& traces, const std::vector<Scenario>& scenarios,
                                    const Catalogue& catalogue);

enum class ExportFormat { ChatJsonl };

struct ExportManifest {
    std::string format = "chat-jsonl";
    std::size_t sample_count = 0;
    std::size_t dialogue_count = 0;
    std::string file_sha256;
    std::string prompt_version;

    ordered_json to_json() const; // includes the documented training setup
};

ordered_json sample_to_json(const SftSample& s);
SftSample sample_from_json(const json& j);

// Writes the samples to `path` and the manifest to manifest_path(path).
ExportManifest export_samples(const std::vector<SftSample>& samples, const std::filesystem::path& path,
                              ExportFormat format = ExportFormat::ChatJsonl);
std::filesystem::path manifest_path(const std::filesystem::path& export_path);
std::vector<SftSample> read_export(const std::filesystem::path& path);

// Hyperparameters recorded in manifests for the downstream trainer; nothing here trains.
ordered_json documented_training_setup();

using Histogram = std::map<std::size_t, std::size_t>;

struct CorpusStats {
    std::size_t dialogues = 0;
    Histogram turns;      // assistant turns per dialogue
    Histogram params;     // declared parameters of the seed tool
    Histogram disamb;     // turns up to and including the phase boundary
    Histogram paramfill;  // turns after the phase boundary
    std::size_t missing_boundary = 0; // dialogues left out of disamb/paramfill

    ordered_json to_json() const;
    std::string to_csv() const; // histogram,bucket,count
};

// Without a catalogue (or for tools it lacks) the parameter count falls back
// to the key count of the final tool call.
CorpusStats compute_stats(const std::vector<DialogueTrace>& corpus, const Catalogue* catalogue = nullptr);

// Assistant-message count of one corpus row, accepting this tool's trace rows
// as well as generic chat rows ({"messages"|"conversation"|"conversations":
// [{"role"|"from": ...}]}). Throws ParseError on rows of neither shape.
std::size_t assistant_turn_count(const json& row);

} // namespace forge

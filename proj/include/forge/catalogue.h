#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "forge/values.h"

namespace forge {

enum class TypeTag { String, Integer, Number, Boolean, Array, Object };

std::string_view to_string(TypeTag tag);
std::optional<TypeTag> parse_type_tag(std::string_view s);

// Whether a JSON value is acceptable for a parameter of the given type.
bool value_matches(TypeTag tag, const json& value);

struct ParamSpec {
    TypeTag type = TypeTag::String;
    std::string description;
    bool required = false;
    ordered_json extra = ordered_json::object(); // vendor extensions, carried through untouched

    bool operator==(const ParamSpec&) const = default;
};

struct Tool {
    std::string name;
    std::string description;
    std::vector<std::pair<std::string, ParamSpec>> params; // file order
    ordered_json extra = ordered_json::object();

    const ParamSpec* find_param(std::string_view pname) const;
    bool operator==(const Tool&) const = default;
};

// Names of the required parameters, in declaration order.
std::vector<std::string> required_args(const Tool& tool);

// The tool as shown to agents: name, description, parameters{description, type, required}.
ordered_json tool_prompt_json(const Tool& tool);

// Full serialization including preserved extension fields.
ordered_json tool_to_json(const Tool& tool);
Tool tool_from_json(const ordered_json& j);

class Catalogue {
public:
    explicit Catalogue(std::vector<Tool> tools);

    std::size_t size() const { return tools_.size(); }
    const std::vector<Tool>& tools() const { return tools_; }
    const Tool& operator[](std::size_t i) const { return tools_[i]; }

    const Tool* find(std::string_view name) const;
    const Tool& at(std::string_view name) const; // throws UnknownToolError
    std::optional<std::size_t> position(std::string_view name) const;

    ordered_json to_json() const;

    bool operator==(const Catalogue& other) const { return tools_ == other.tools_; }

private:
    std::vector<Tool> tools_;
    std::unordered_map<std::string, std::size_t> index_;
};

Catalogue parse_catalogue(std::string_view text);
Catalogue load_catalogue(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

} // namespace forge

#include "forge/catalogue.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "forge/error.h"

namespace forge {

namespace {

constexpr std::pair<TypeTag, std::string_view> kTypeNames[] = {
    {TypeTag::String, "string"}, {TypeTag::Integer, "integer"}, {TypeTag::Number, "number"},
    {TypeTag::Boolean, "boolean"}, {TypeTag::Array, "array"}, {TypeTag::Object, "object"},
};

const ordered_json& require_key(const ordered_json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing key '" + key + "'");
    return *it;
}

std::string require_string(const ordered_json& obj, const char* key, const std::string& where) {
    const auto& v = require_key(obj, key, where);
    if (!v.is_string()) throw SchemaError(where + ": '" + key + "' must be a string");
    return v.get<std::string>();
}

ParamSpec param_from_json(const ordered_json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": parameter spec must be an object");
    ParamSpec p;
    const auto type_name = require_string(j, "type", where);
    const auto tag = parse_type_tag(type_name);
    if (!tag) throw SchemaError(where + ": unknown type tag '" + type_name + "'");
    p.type = *tag;
    p.description = require_string(j, "description", where);
    if (p.description.empty()) throw SchemaError(where + ": empty description");
    const auto& req = require_key(j, "required", where);
    if (!req.is_boolean()) throw SchemaError(where + ": 'required' must be a boolean");
    p.required = req.get<bool>();
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "type" && it.key() != "description" && it.key() != "required") {
            p.extra[it.key()] = it.value();
        }
    }
    return p;
}

} // namespace

std::string_view to_string(TypeTag tag) {
    for (const auto& [t, name] : kTypeNames) {
        if (t == tag) return name;
    }
    return "string";
}

std::optional<TypeTag> parse_type_tag(std::string_view s) {
    for (const auto& [t, name] : kTypeNames) {
        if (name == s) return t;
    }
    return std::nullopt;
}

bool value_matches(TypeTag tag, const json& value) {
    switch (tag) {
    case TypeTag::String: return value.is_string();
    case TypeTag::Integer:
        // 3.0 counts as an integer, same as JSON Schema
        if (value.is_number_float()) {
            const double d = value.get<double>();
            return std::isfinite(d) && std::floor(d) == d;
        }
        return value.is_number_integer();
    case TypeTag::Number: return value.is_number();
    case TypeTag::Boolean: return value.is_boolean();
    case TypeTag::Array: return value.is_array();
    case TypeTag::Object: return value.is_object();
    }
    return false;
}

const ParamSpec* Tool::find_param(std::string_view pname) const {
    for (const auto& [name, spec] : params) {
        if (name == pname) return &spec;
    }
    return nullptr;
}

std::vector<std::string> required_args(const Tool& tool) {
    std::vector<std::string> out;
    for (const auto& [name, spec] : tool.params) {
        if (spec.required) out.push_back(name);
    }
    return out;
}

ordered_json tool_prompt_json(const Tool& tool) {
    ordered_json params = ordered_json::object();
    for (const auto& [name, spec] : tool.params) {
        params[name] = ordered_json{{"description", spec.description},
                                    {"type", std::string(to_string(spec.type))},
                                    {"required", spec.required}};
    }
    return ordered_json{{"name", tool.name}, {"description", tool.description}, {"parameters", params}};
}

ordered_json tool_to_json(const Tool& tool) {
    ordered_json j;
    j["name"] = tool.name;
    j["description"] = tool.description;
    ordered_json params = ordered_json::object();
    for (const auto& [name, spec] : tool.params) {
        ordered_json p;
        p["type"] = std::string(to_string(spec.type));
        p["description"] = spec.description;
        p["required"] = spec.required;
        for (auto it = spec.extra.begin(); it != spec.extra.end(); ++it) p[it.key()] = it.value();
        params[name] = std::move(p);
    }
    j["parameters"] = std::move(params);
    for (auto it = tool.extra.begin(); it != tool.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

Tool tool_from_json(const ordered_json& j) {
    if (!j.is_object()) throw SchemaError("tool entry must be an object");
    Tool t;
    t.name = require_string(j, "name", "tool");
    const std::string where = "tool '" + t.name + "'";
    if (t.name.empty()) throw SchemaError("tool: empty name");
    t.description = require_string(j, "description", where);
    const auto& params = require_key(j, "parameters", where);
    if (!params.is_object()) throw SchemaError(where + ": 'parameters' must be an object");
    // ordered_json keeps duplicate keys out already; names are unique here.
    for (auto it = params.begin(); it != params.end(); ++it) {
        if (it.key().empty()) throw SchemaError(where + ": empty parameter name");
        t.params.emplace_back(it.key(), param_from_json(it.value(), where + " param '" + it.key() + "'"));
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "name" && it.key() != "description" && it.key() != "parameters") {
            t.extra[it.key()] = it.value();
        }
    }
    return t;
}

Catalogue::Catalogue(std::vector<Tool> tools) : tools_(std::move(tools)) {
    if (tools_.empty()) throw SchemaError("catalogue must contain at least one tool");
    for (std::size_t i = 0; i < tools_.size(); ++i) {
        if (!index_.emplace(tools_[i].name, i).second) {
            throw DuplicateNameError("duplicate tool name '" + tools_[i].name + "'");
        }
    }
}

const Tool* Catalogue::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? nullptr : &tools_[it->second];
}

const Tool& Catalogue::at(std::string_view name) const {
    if (const auto* t = find(name)) return *t;
    throw UnknownToolError("unknown tool '" + std::string(name) + "'");
}

std::optional<std::size_t> Catalogue::position(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

ordered_json Catalogue::to_json() const {
    ordered_json arr = ordered_json::array();
    for (const auto& t : tools_) arr.push_back(tool_to_json(t));
    return arr;
}

Catalogue parse_catalogue(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(std::string("catalogue: ") + e.what());
    }
    if (!doc.is_array()) throw SchemaError("catalogue must be a JSON array of tools");
    std::vector<Tool> tools;
    tools.reserve(doc.size());
    for (const auto& entry : doc) tools.push_back(tool_from_json(entry));
    return Catalogue(std::move(tools));
}

Catalogue load_catalogue(const std::filesystem::path& path) {
    return parse_catalogue(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace forge

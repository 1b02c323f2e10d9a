#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace forge {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string_view trim(std::string_view s);

// Parses the whole (trimmed) string as a JSON-style number.
std::optional<double> parse_number(std::string_view s);

// Equality used pipeline-wide for argument values: numbers compare
// numerically whatever their textual form (437292 == "437292" == 437292.0),
// strings compare after trimming surrounding whitespace, booleans strictly.
// Arrays and objects recurse element-wise.
bool canonical_equal(const json& a, const json& b);

// Two argument maps are equal iff they have the same key set and every value
// is canonically equal. Non-object inputs are never equal.
bool args_equal(const json& a, const json& b);

} // namespace forge

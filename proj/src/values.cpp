#include "forge/values.h"

#include <charconv>
#include <cmath>

namespace forge {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double value = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

namespace {

std::optional<double> as_number(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number(v.get_ref<const std::string&>());
    return std::nullopt;
}

bool numbers_equal(const json& a, const json& b) {
    if (a.is_number_integer() && b.is_number_integer()) {
        if (a.is_number_unsigned() != b.is_number_unsigned()) {
            const json& s = a.is_number_unsigned() ? b : a;
            const json& u = a.is_number_unsigned() ? a : b;
            const auto sv = s.get<std::int64_t>();
            return sv >= 0 && static_cast<std::uint64_t>(sv) == u.get<std::uint64_t>();
        }
        if (a.is_number_unsigned()) return a.get<std::uint64_t>() == b.get<std::uint64_t>();
        return a.get<std::int64_t>() == b.get<std::int64_t>();
    }
    const auto x = as_number(a);
    const auto y = as_number(b);
    return x && y && *x == *y;
}

} // namespace

bool canonical_equal(const json& a, const json& b) {
    if (a.is_boolean() || b.is_boolean()) {
        return a.is_boolean() && b.is_boolean() && a.get<bool>() == b.get<bool>();
    }
    if (a.is_null() || b.is_null()) return a.is_null() && b.is_null();
    if (a.is_number() || b.is_number()) return numbers_equal(a, b);
    if (a.is_string() && b.is_string()) {
        return trim(a.get_ref<const std::string&>()) == trim(b.get_ref<const std::string&>());
    }
    if (a.is_array() && b.is_array()) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!canonical_equal(a[i], b[i])) return false;
        }
        return true;
    }
    if (a.is_object() && b.is_object()) return args_equal(a, b);
    return false;
}

bool args_equal(const json& a, const json& b) {
    if (!a.is_object() || !b.is_object() || a.size() != b.size()) return false;
    for (auto it = a.begin(); it != a.end(); ++it) {
        auto other = b.find(it.key());
        if (other == b.end() || !canonical_equal(it.value(), *other)) return false;
    }
    return true;
}

} // namespace forge

#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>

namespace khattat {

/// Shortest decimal form that reads back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

/// Whole-string parse; nullopt on anything left over.
inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace khattat

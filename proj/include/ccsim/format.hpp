#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <string>

namespace ccsim {

// 17 significant digits, locale independent.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v, const char* missing = "NA") {
    return v ? format_double(*v) : std::string(missing);
}

}  // namespace ccsim

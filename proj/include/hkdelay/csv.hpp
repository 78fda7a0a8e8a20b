#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace hkdelay {

/// CSV text for a double: 17 significant digits, '.' decimal point.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Shortest round-trip text for messages; integral values keep a ".0".
inline std::string format_short(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, ec == std::errc() ? end : buf);
    if (s.find_first_of(".eni") == std::string::npos) s += ".0";
    return s;
}

}  // namespace hkdelay

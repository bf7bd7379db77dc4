#pragma once

#include <charconv>
#include <string>

namespace mot {

// Shortest round-trip decimal rendering. All numeric text output goes through
// this so identical runs produce identical bytes.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace mot

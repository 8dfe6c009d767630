#pragma once

// Shortest round-trip decimal formatting for the CSV outputs.

#include <charconv>
#include <string>

namespace ocs {

inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace ocs

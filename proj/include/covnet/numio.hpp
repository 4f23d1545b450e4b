#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "covnet/types.hpp"

namespace covnet {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError(where + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline long parse_long(std::string_view s, const std::string& where) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError(where + ": not an integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace covnet

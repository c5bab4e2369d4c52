#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "frx/error.hpp"

namespace frx {

// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Strict double parse: the whole string must be consumed.
inline double parse_double(std::string_view text, const char* what = "number") {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError(std::string("invalid ") + what + " '" +
                          std::string(text) + "'");
  return v;
}

inline int parse_int(std::string_view text, const char* what = "integer") {
  int v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ValidationError(std::string("invalid ") + what + " '" +
                          std::string(text) + "'");
  return v;
}

}  // namespace frx

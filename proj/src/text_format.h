// Number formatting shared by the text file writers.

#ifndef SLICEVEC_SRC_TEXT_FORMAT_H_
#define SLICEVEC_SRC_TEXT_FORMAT_H_

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>

#include "slicevec/error.h"

namespace slicevec::detail {

// Shortest decimal that parses back to the same double.
inline std::string shortestDecimal(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::string significant6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline double parseDouble(std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw DataError("malformed number '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace slicevec::detail

#endif  // SLICEVEC_SRC_TEXT_FORMAT_H_

#pragma once

#include <cstdio>
#include <string>

namespace rindler {

/// Shortest-round-trip-safe fixed formatting used for every CSV value.
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace rindler

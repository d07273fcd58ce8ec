#pragma once

// Deterministic, locale-independent number formatting for text artifacts.

#include <cstdio>
#include <string>

namespace sdrd {

// 17 significant digits: shortest representation that round-trips a double.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace sdrd

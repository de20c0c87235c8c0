#ifndef PLANECLUST_FORMAT_HPP
#define PLANECLUST_FORMAT_HPP

#include <cstdio>
#include <string>

namespace planeclust {

/// Round-trippable text form of a double (17 significant digits).
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Fixed-point text with `digits` decimals, for human-facing tables.
inline std::string format_fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace planeclust

#endif  // PLANECLUST_FORMAT_HPP

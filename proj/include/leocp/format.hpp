#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace leocp {

/// Fixed-point text for CSV/JSON-adjacent output; non-finite values become "inf"/"nan".
inline std::string fixed(double v, int digits = 6) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace leocp

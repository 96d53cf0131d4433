#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "error.hpp"

namespace yyf {

/// Shortest %g form that reads back to the same double; independent of the
/// stream locale.
inline std::string format_double(double v) {
  char buf[40];
  for (int precision = 15; precision < 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& file, bool binary = false) {
  std::ofstream os(file, binary ? std::ios::binary | std::ios::out : std::ios::out);
  if (!os) fail(ErrorCode::io, "cannot open '" + file + "' for writing");
  return os;
}

inline void write_comment(std::ostream& os, const std::string& comment) {
  if (!comment.empty()) os << "# " << comment << '\n';
}

}  // namespace yyf

#include "chkcc/diagnostics.hpp"

namespace chkcc {

LineCol line_col_at(const std::string &source, size_t offset) {
  LineCol lc;
  if (offset > source.size()) offset = source.size();
  for (size_t i = 0; i < offset; ++i) {
    if (source[i] == '\n') {
      ++lc.line;
      lc.col = 1;
    } else {
      ++lc.col;
    }
  }
  return lc;
}

std::string format_diagnostic(const Diagnostic &d, const std::string &source,
                              const std::string &source_name) {
  LineCol lc = line_col_at(source, d.span.begin);
  std::string out = source_name;
  out += ':';
  out += std::to_string(lc.line);
  out += ':';
  out += std::to_string(lc.col);
  out += ": ";
  out += d.severity == Severity::Error ? "error" : "warning";
  out += '[';
  out += d.code;
  out += "]: ";
  out += d.message;
  return out;
}

} // namespace chkcc

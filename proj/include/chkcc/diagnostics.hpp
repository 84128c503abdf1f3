#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace chkcc {

// Byte range into the original source, [begin, end).
struct Span {
  size_t begin = 0;
  size_t end = 0;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;     // stable short identifier, e.g. "E-SCOPE-RAWPTR"
  std::string message;
  Span span;
};

class DiagList {
public:
  void error(std::string code, std::string message, Span span) {
    diags_.push_back({Severity::Error, std::move(code), std::move(message), span});
  }
  void warning(std::string code, std::string message, Span span) {
    diags_.push_back({Severity::Warning, std::move(code), std::move(message), span});
  }

  bool has_errors() const {
    for (const auto &d : diags_)
      if (d.severity == Severity::Error) return true;
    return false;
  }
  bool empty() const { return diags_.empty(); }
  size_t size() const { return diags_.size(); }
  const Diagnostic &operator[](size_t i) const { return diags_[i]; }
  const std::vector<Diagnostic> &all() const { return diags_; }
  void append(const DiagList &other) {
    diags_.insert(diags_.end(), other.diags_.begin(), other.diags_.end());
  }

private:
  std::vector<Diagnostic> diags_;
};

// 1-based line/column of a byte offset.
struct LineCol {
  int line = 1;
  int col = 1;
};

LineCol line_col_at(const std::string &source, size_t offset);

// "file:line:col: severity[code]: message"
std::string format_diagnostic(const Diagnostic &d, const std::string &source,
                              const std::string &source_name);

} // namespace chkcc

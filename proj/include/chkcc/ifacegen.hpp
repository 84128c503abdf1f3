#pragma once

#include "chkcc/ast.hpp"

#include <string>
#include <vector>

namespace chkcc {

enum class StubConfidence { High, Low };

struct StubNote {
  std::string function;
  std::string target;      // parameter name or "<return>"
  std::string annotation;  // the generated annotation text (macro spelling)
  std::string rule;
  StubConfidence confidence = StubConfidence::Low;
};

struct StubResult {
  SourceUnit unit;              // annotated copy of the input header
  std::vector<StubNote> notes;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// Auto-annotates bounds-safe interfaces onto a header of prototypes.
// Rules, first match wins:
//   1. pointer to void/1-byte data followed by exactly two size-typed
//      parameters a, b  -> abyte_count(a * b)          [high]
//   2. pointer followed by a single size-typed parameter n -> acount(n) [high]
//   3. any other object pointer -> atype(ptr(T))       [low]
// Already-annotated parameters are left untouched (idempotence).
StubResult generate_stubs(const SourceUnit &header);

// The `<name>.stubs.txt` review listing.
std::string format_stub_notes(const std::vector<StubNote> &notes);

} // namespace chkcc

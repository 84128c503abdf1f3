#pragma once

#include "chkcc/ast.hpp"

#include <map>
#include <string>
#include <vector>

namespace chkcc {

// Reference interpreter for the subset. Integer model: 32-bit two's
// complement wraparound; comparisons and division are signed. Objects are
// opaque: every pointer value carries (object id, element offset) and cannot
// cross objects.

enum class ExecMode {
  Oracle,  // checked semantics on the original annotated unit
  Literal, // runs emitted legacy C; __checked_trap(id) becomes Trap(id)
};

enum class OutcomeKind {
  Normal,
  Trap,
  Violation,
  Error, // fuel exhausted, unknown extern, malformed program
};

struct ExecOutcome {
  OutcomeKind kind = OutcomeKind::Normal;
  long long value = 0;           // Normal: entry return value
  std::vector<long long> print_log;
  int trap_id = 0;               // Trap
  int violation_object = 0;      // Violation
  long long violation_offset = 0;
  std::string violation_access;  // read / write / arith / bind
  Span violation_span;
  std::string error;             // Error
  long long steps = 0;

  // `NORMAL <value>` / `TRAP <id>` / `VIOLATION <obj>:<offset>` /
  // `ERROR <message>`
  std::string summary() const;
  // call counts per function name (single-evaluation assertions)
  std::map<std::string, long long> call_counts;
};

struct ExecOptions {
  ExecMode mode = ExecMode::Oracle;
  long long fuel = 1000000;
  std::vector<long long> args;
};

ExecOutcome execute(const SourceUnit &unit, const std::string &entry,
                    const ExecOptions &opts);

} // namespace chkcc

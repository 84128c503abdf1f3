#pragma once

#include "chkcc/ast.hpp"

#include <string>
#include <vector>

namespace chkcc {

enum class CheckKind {
  DerefRead,
  DerefWrite,
  Index,
  InterfaceBoundary,
  NtTerminatorWrite,
};

const char *check_kind_name(CheckKind k);

struct CheckSite {
  int id = 0;           // dense, ordered by source position, 1-based
  CheckKind kind = CheckKind::Index;
  Span span;            // location in the original source
};

struct InstrumentResult {
  std::string code;              // legacy C with runtime guards
  std::vector<CheckSite> sites;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// Emits legacy C in which every checked-scope access is guarded by the
// runtime helpers (trapping via __checked_trap(id)), and every call binding
// bounded or interfaced parameters gets a boundary containment check.
// The unit must have been accepted by sema.
InstrumentResult instrument_unit(const SourceUnit &unit);

// One line per site: `id<TAB>kind<TAB>line:col` (original source coords).
std::string format_site_map(const std::vector<CheckSite> &sites,
                            const std::string &source);

} // namespace chkcc

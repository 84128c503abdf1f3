#pragma once

#include "chkcc/ast.hpp"
#include "chkcc/parser.hpp"

#include <map>
#include <set>

namespace chkcc {

// Normalized bounds of a declaration for an access rooted at `root`.
struct ResolvedBounds {
  ExprPtr lo;             // pointer-valued lower bound
  ExprPtr hi;             // pointer-valued upper bound (exclusive)
  ExprPtr count;          // element count (hi - lo)
  ExprPtr byte_count;     // set when the check is byte-granular
  int element_size = 1;
  bool nt = false;        // reads may touch hi; zero may be written at hi
  bool singleton = false; // Ptr: non-null is the whole check
};

// One guarded memory access in checked scope. The offset/bound expressions
// are shared verbatim by the instrumenter (rendered into guard calls) and
// the oracle (evaluated at access time), which is what keeps the two in
// agreement.
struct AccessInfo {
  const Decl *root = nullptr;
  std::string root_name;
  ExprPtr offset;         // element offset from the root pointer
  ExprPtr lo_off;         // allowed range [lo_off, hi_off) in elements
  ExprPtr hi_off;
  ExprPtr byte_cap;       // byte-granular cap (ByteCount over multi-byte)
  int element_size = 1;
  bool nt = false;
  bool singleton = false; // non-null check only
  bool is_write = false;
  bool hoisted_nt_write = false; // statement-position nt write (value check)
  Span span;
};

// Boundary guard for one argument of a call binding a bounded or
// interfaced parameter. Expressions are caller-scope.
struct ArgGuard {
  size_t arg_index = 0;
  bool nonnull_only = false; // itype(ptr<T>)
  ExprPtr need_bytes;        // callee's requirement, params substituted
  ExprPtr have_bytes;        // capacity of the argument's view
  ExprPtr arg_pointer;       // the pointer argument expression
  Span span;
};

struct CallBinding {
  std::string callee;
  std::vector<ArgGuard> guards;
  Span span;
};

struct UnitAnalysis {
  DiagList diags;
  std::map<const Expr *, AccessInfo> accesses;
  std::map<const Expr *, CallBinding> calls;
  bool accepted() const { return !diags.has_errors(); }
};

// Full checked-scope analysis: scope rules, annotation validation, and the
// guard table used by instrumentation and the oracle.
UnitAnalysis analyze_unit(const SourceUnit &unit);

// Validation only. Empty error list = accepted.
DiagList check_unit(const SourceUnit &unit);

// Normalizes declared bounds: Count(n) -> [p, p+n); ByteCount(b) ->
// [p, p + b/sizeof(elem)) with a divisibility diagnostic when provably
// misaligned and the element is wider than a byte; Ptr -> [p, p+1).
ResolvedBounds resolve_bounds(const Decl &decl, ExprPtr root,
                              const std::vector<RecordDef *> &records,
                              DiagList &diags);

// Root-plus-offset decomposition of a pointer-valued access expression:
// *p, p[e], *(p ± e), (p ± e)[e2], ...
struct AccessPath {
  std::string root;
  ExprPtr offset;
  bool ok = false;
};

AccessPath normalize_access(const Expr &pointer_expr);

// Caller-side byte capacity of an argument expression (root decl bounds
// minus offset), for boundary containment. Null when no view is derivable.
ExprPtr arg_capacity_bytes(const Expr &arg, const Decl *root_decl,
                           const std::vector<RecordDef *> &records);

} // namespace chkcc

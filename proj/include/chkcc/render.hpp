#pragma once

#include "chkcc/ast.hpp"

#include <string>

namespace chkcc {

enum class Spelling { Native, Macro, Legacy };

// Deterministic pretty-printer. Canonical formatting: conventional C token
// spacing, one item/statement per line, 2-space indent. render-then-parse is
// the identity up to formatting.
//
// Spelling::Legacy requires a unit without checked constructs (emitters lower
// first); violating that throws std::logic_error.
std::string render(const SourceUnit &unit, Spelling spelling);

// Individual pieces, reused by emitters and ifacegen.
std::string render_type_prefix(const Type &t, Spelling spelling);
std::string render_decl(const Decl &d, Spelling spelling);
std::string render_expr(const Expr &e);
std::string render_bounds(const BoundsExpr &b, Spelling spelling);

} // namespace chkcc

#pragma once

#include "chkcc/ast.hpp"
#include "chkcc/render.hpp"

#include <map>
#include <string>

namespace chkcc {

// Legacy C: checked types become `T *`, annotations and scope markers are
// erased, `#ifdef USE_CHECKEDC` blocks resolve with the macro undefined.
std::string emit_strip(const SourceUnit &unit);

// Macro-compat C: native spellings rewritten to the macro family; output
// starts with the compat header include.
std::string emit_macro(const SourceUnit &unit);

// The checkedc_compat.h contents (both branches of USE_CHECKEDC).
std::string gen_compat_header();

struct ExpandResult {
  std::string text;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// Textual compat-family expansion plus USE_CHECKEDC conditional resolution.
// All other directives pass through verbatim; the compat-header include line
// is consumed.
ExpandResult expand_macros(std::string_view source, bool checked);

// Shared by emitters and execution: resolves `#ifdef`/`#ifndef` blocks.
// `known` maps names to their definedness; blocks over other names are
// preserved verbatim when `preserve_unknown`, else treated as undefined.
SourceUnit resolve_conditionals(const SourceUnit &unit,
                                const std::map<std::string, bool> &known,
                                bool preserve_unknown);

// Structural lowering to plain C (types, annotations, markers, pragma);
// conditional resolution is the caller's business.
SourceUnit lower_to_legacy(const SourceUnit &unit);

} // namespace chkcc

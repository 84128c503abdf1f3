#pragma once

#include "chkcc/ast.hpp"
#include "chkcc/token.hpp"

namespace chkcc {

struct ParseResult {
  SourceUnit unit;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// Parses the annotated C subset. Accepts native spellings (`_Ptr<T>`,
// `: count(e)`), macro spellings (`ptr(T)`, `acount(e)`) and plain legacy C;
// both annotation surfaces normalize to the same AST.
ParseResult parse(const std::vector<Token> &tokens, std::string source_name);

// tokenize + parse.
ParseResult parse_source(std::string_view source, std::string source_name);

} // namespace chkcc

#pragma once

#include "chkcc/diagnostics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace chkcc {

enum class TokenKind {
  Identifier,
  Keyword,        // plain C keywords of the subset
  CheckedKeyword, // _Ptr, _Array_ptr, _Nt_array_ptr, _Checked, _Unchecked
  Punctuation,
  IntLiteral,
  CharLiteral,
  StringLiteral,
  Eof,
};

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string text;        // exact source lexeme
  Span span;               // byte offsets into the source
  std::string leading;     // whitespace/comments preceding this token
  bool starts_line = false; // first non-trivia token on its line

  bool is(TokenKind k) const { return kind == k; }
  bool is_punct(std::string_view p) const {
    return kind == TokenKind::Punctuation && text == p;
  }
  bool is_kw(std::string_view k) const {
    return (kind == TokenKind::Keyword || kind == TokenKind::CheckedKeyword) &&
           text == k;
  }
  bool is_ident(std::string_view name) const {
    return kind == TokenKind::Identifier && text == name;
  }
};

struct TokenizeResult {
  std::vector<Token> tokens; // always ends with an Eof token
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

TokenizeResult tokenize(std::string_view source);

// Reassembles the exact input bytes (leading trivia + lexemes).
std::string detokenize(const std::vector<Token> &tokens);

// Kind+text equality, ignoring trivia and spans. Eof excluded.
bool token_equal(const std::vector<Token> &a, const std::vector<Token> &b);

// Convenience: tokenize both and compare. Sources must lex cleanly.
bool token_equal_source(std::string_view a, std::string_view b);

bool is_checked_keyword(std::string_view s);
bool is_plain_keyword(std::string_view s);

} // namespace chkcc

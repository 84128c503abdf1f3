#include "chkcc/token.hpp"

#include <array>
#include <cctype>

namespace chkcc {

namespace {

const std::array<std::string_view, 5> kCheckedKeywords = {
    "_Ptr", "_Array_ptr", "_Nt_array_ptr", "_Checked", "_Unchecked"};

const std::array<std::string_view, 17> kPlainKeywords = {
    "void",   "char", "short",  "int",    "long",    "unsigned",
    "signed", "if",   "else",   "while",  "for",     "return",
    "struct", "typedef", "sizeof", "static", "const"};

// Longest-match punctuation table, longest first.
const std::array<std::string_view, 33> kPuncts = {
    "...", "<<=", ">>=", "->", "++", "--", "<<", ">>", "<=", ">=", "==",
    "!=",  "&&",  "||",  "+=", "-=", "*=", "/=", "(",  ")",  "[",  "]",
    "{",   "}",   "<",   ">",  "+",  "-",  "*",  "/",  "%",  "=",  "#"};

bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
bool ident_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

} // namespace

bool is_checked_keyword(std::string_view s) {
  for (auto k : kCheckedKeywords)
    if (k == s) return true;
  return false;
}

bool is_plain_keyword(std::string_view s) {
  for (auto k : kPlainKeywords)
    if (k == s) return true;
  return false;
}

TokenizeResult tokenize(std::string_view src) {
  TokenizeResult res;
  size_t i = 0;
  const size_t n = src.size();
  std::string trivia;
  bool line_start = true;

  auto push = [&](TokenKind kind, size_t begin, size_t end) {
    Token t;
    t.kind = kind;
    t.text = std::string(src.substr(begin, end - begin));
    t.span = {begin, end};
    t.leading = std::move(trivia);
    t.starts_line = line_start;
    trivia.clear();
    line_start = false;
    res.tokens.push_back(std::move(t));
  };

  while (i < n) {
    char c = src[i];
    // Whitespace and comments accumulate as trivia.
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (c == '\n') line_start = true;
      trivia += c;
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      size_t j = i;
      while (j < n && src[j] != '\n') ++j;
      trivia += src.substr(i, j - i);
      i = j;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      size_t j = i + 2;
      while (j + 1 < n && !(src[j] == '*' && src[j + 1] == '/')) ++j;
      if (j + 1 >= n) {
        res.diags.error("E-LEX-COMMENT", "unterminated block comment", {i, n});
        return res;
      }
      trivia += src.substr(i, j + 2 - i);
      i = j + 2;
      continue;
    }

    size_t begin = i;
    if (ident_start(c)) {
      size_t j = i;
      while (j < n && ident_char(src[j])) ++j;
      std::string_view word = src.substr(i, j - i);
      TokenKind kind = TokenKind::Identifier;
      if (is_checked_keyword(word)) kind = TokenKind::CheckedKeyword;
      else if (is_plain_keyword(word)) kind = TokenKind::Keyword;
      i = j;
      push(kind, begin, j);
      continue;
    }
    if (std::isdigit((unsigned char)c)) {
      size_t j = i;
      if (c == '0' && j + 1 < n && (src[j + 1] == 'x' || src[j + 1] == 'X')) {
        j += 2;
        while (j < n && std::isxdigit((unsigned char)src[j])) ++j;
      } else {
        while (j < n && std::isdigit((unsigned char)src[j])) ++j;
      }
      // integer suffixes (u, U, l, L) accepted and kept in the lexeme
      while (j < n && (src[j] == 'u' || src[j] == 'U' || src[j] == 'l' ||
                       src[j] == 'L'))
        ++j;
      i = j;
      push(TokenKind::IntLiteral, begin, j);
      continue;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        if (src[j] == '\\' && j + 1 < n) {
          j += 2;
          continue;
        }
        if (src[j] == quote) {
          closed = true;
          ++j;
          break;
        }
        if (src[j] == '\n') break;
        ++j;
      }
      if (!closed) {
        res.diags.error("E-LEX-STRING",
                        quote == '"' ? "unterminated string literal"
                                     : "unterminated character literal",
                        {i, j});
        return res;
      }
      i = j;
      push(quote == '"' ? TokenKind::StringLiteral : TokenKind::CharLiteral,
           begin, j);
      continue;
    }

    bool matched = false;
    for (auto p : kPuncts) {
      if (src.substr(i).substr(0, p.size()) == p) {
        i += p.size();
        push(TokenKind::Punctuation, begin, i);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    // remaining single-char punctuation
    if (c == ';' || c == ',' || c == ':' || c == '.' || c == '?' ||
        c == '!' || c == '~' || c == '&' || c == '|' || c == '^') {
      ++i;
      push(TokenKind::Punctuation, begin, i);
      continue;
    }

    res.diags.error("E-LEX-CHAR",
                    std::string("illegal character '") + c + "'", {i, i + 1});
    return res;
  }

  Token eof;
  eof.kind = TokenKind::Eof;
  eof.span = {n, n};
  eof.leading = std::move(trivia);
  eof.starts_line = line_start;
  res.tokens.push_back(std::move(eof));
  return res;
}

std::string detokenize(const std::vector<Token> &tokens) {
  std::string out;
  for (const auto &t : tokens) {
    out += t.leading;
    out += t.text;
  }
  return out;
}

bool token_equal(const std::vector<Token> &a, const std::vector<Token> &b) {
  size_t ia = 0, ib = 0;
  auto skip = [](const std::vector<Token> &v, size_t &i) {
    while (i < v.size() && v[i].kind == TokenKind::Eof) ++i;
  };
  while (true) {
    skip(a, ia);
    skip(b, ib);
    bool ea = ia >= a.size(), eb = ib >= b.size();
    if (ea || eb) return ea && eb;
    if (a[ia].kind != b[ib].kind || a[ia].text != b[ib].text) return false;
    ++ia;
    ++ib;
  }
}

bool token_equal_source(std::string_view a, std::string_view b) {
  auto ta = tokenize(a);
  auto tb = tokenize(b);
  if (!ta.ok() || !tb.ok()) return false;
  return token_equal(ta.tokens, tb.tokens);
}

} // namespace chkcc

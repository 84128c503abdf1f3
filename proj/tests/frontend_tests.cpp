#include "chkcc/parser.hpp"
#include "chkcc/render.hpp"
#include "chkcc/token.hpp"

#include "support/fuzz.hpp"

#include <doctest.h>

using namespace chkcc;

namespace {

std::vector<Token> lex(const std::string &src) {
  auto res = tokenize(src);
  REQUIRE(res.ok());
  return res.tokens;
}

const Token &nth(const std::vector<Token> &toks, size_t i) {
  REQUIRE(i < toks.size());
  return toks[i];
}

} // namespace

TEST_CASE("tokenize: checked keywords and punctuation") {
  auto toks = lex("_Ptr<int> p;");
  CHECK(nth(toks, 0).kind == TokenKind::CheckedKeyword);
  CHECK(nth(toks, 0).text == "_Ptr");
  CHECK(nth(toks, 1).is_punct("<"));
  CHECK(nth(toks, 2).is_kw("int"));
  CHECK(nth(toks, 3).is_punct(">"));
  CHECK(nth(toks, 4).kind == TokenKind::Identifier);
  CHECK(nth(toks, 4).text == "p");
  CHECK(nth(toks, 5).is_punct(";"));
}

TEST_CASE("tokenize: checked keyword inside a define directive") {
  auto toks = lex("#define ptr(t) _Ptr<t>\n");
  bool found = false;
  for (const auto &t : toks)
    if (t.kind == TokenKind::CheckedKeyword && t.text == "_Ptr") found = true;
  CHECK(found);
  CHECK(nth(toks, 0).is_punct("#"));
  CHECK(nth(toks, 0).starts_line);
}

TEST_CASE("tokenize: colon precedes byte_count in an interface") {
  auto toks =
      lex("size_t fread(void *p : byte_count(size * nmemb), size_t size);");
  size_t colon = 0;
  for (size_t i = 0; i < toks.size(); ++i)
    if (toks[i].is_punct(":")) {
      colon = i;
      break;
    }
  REQUIRE(colon > 0);
  CHECK(nth(toks, colon + 1).is_ident("byte_count"));
}

TEST_CASE("tokenize: lossless over tricky input") {
  std::string src = "  // comment\nint  a /* b */ = 0x1F;\n\t char c = 'x';\n";
  auto toks = lex(src);
  CHECK(detokenize(toks) == src);
}

TEST_CASE("tokenize: spans strictly increase and cover lexemes") {
  std::string src = "int main(void) { return 42; }";
  auto toks = lex(src);
  size_t prev_end = 0;
  for (const auto &t : toks) {
    if (t.kind == TokenKind::Eof) break;
    CHECK(t.span.begin >= prev_end);
    CHECK(t.span.end > t.span.begin);
    CHECK(src.substr(t.span.begin, t.span.end - t.span.begin) == t.text);
    prev_end = t.span.end;
  }
}

TEST_CASE("tokenize: error diagnostics carry spans") {
  auto bad_str = tokenize("char *s = \"abc;\nint x;");
  CHECK(!bad_str.ok());
  CHECK(bad_str.diags[0].code == "E-LEX-STRING");

  auto bad_comment = tokenize("/* never closed");
  CHECK(!bad_comment.ok());
  CHECK(bad_comment.diags[0].code == "E-LEX-COMMENT");

  auto bad_char = tokenize("int a = 1 @ 2;");
  CHECK(!bad_char.ok());
  CHECK(bad_char.diags[0].code == "E-LEX-CHAR");
  CHECK(bad_char.diags[0].span.begin == 10);
}

TEST_CASE("tokenize: lossless lexing is a property of arbitrary units") {
  fuzz::Rng rng(1234);
  for (int i = 0; i < 100; ++i) {
    std::string src =
        i % 2 ? fuzz::gen_decl_unit(rng) : fuzz::gen_plain_unit(rng);
    auto toks = tokenize(src);
    REQUIRE(toks.ok());
    CHECK(detokenize(toks.tokens) == src);
  }
}

TEST_CASE("parse: interface bounds attach to unchecked pointers") {
  auto res = parse_source("void f(int *a : count(n), size_t n);", "t.c");
  REQUIRE(res.ok());
  REQUIRE(res.unit.items.size() == 1);
  const Function &fn = *res.unit.items[0]->fn;
  REQUIRE(fn.params.size() == 2);
  const Decl &a = fn.params[0];
  CHECK(a.type.kind == PtrKind::PlainPtr);
  CHECK(!a.interface.has_value());
  CHECK(a.bounds.form == BoundsForm::Count);
  CHECK(render_expr(*a.bounds.e1) == "n");
}

TEST_CASE("parse: the fread interface, both annotations") {
  auto res = parse_source(
      "size_t fread(void *p : byte_count(size * nmemb), size_t size, "
      "size_t nmemb, FILE *stream : itype(ptr<FILE>));",
      "t.c");
  REQUIRE(res.ok());
  const Function &fn = *res.unit.items[0]->fn;
  REQUIRE(fn.params.size() == 4);
  CHECK(fn.params[0].bounds.form == BoundsForm::ByteCount);
  CHECK(render_expr(*fn.params[0].bounds.e1) == "size * nmemb");
  REQUIRE(fn.params[3].interface.has_value());
  CHECK(fn.params[3].interface->kind == PtrKind::Ptr);
  CHECK(fn.params[3].interface->pointee.spelling == "FILE");
  CHECK(fn.params[3].type.kind == PtrKind::PlainPtr);
}

TEST_CASE("parse: empty file gives an empty unchecked unit") {
  auto res = parse_source("", "empty.c");
  REQUIRE(res.ok());
  CHECK(res.unit.items.empty());
  CHECK(res.unit.scope_default == ScopeDefault::Unchecked);
}

TEST_CASE("parse: checked-scope pragma before any item flips the default") {
  auto res = parse_source("#pragma CHECKED_SCOPE on\nint x;", "t.c");
  REQUIRE(res.ok());
  CHECK(res.unit.scope_default == ScopeDefault::Checked);

  auto late = parse_source("int x;\n#pragma CHECKED_SCOPE on\n", "t.c");
  REQUIRE(late.ok());
  CHECK(late.unit.scope_default == ScopeDefault::Unchecked);
}

TEST_CASE("parse: annotation on a non-pointer declarator is rejected") {
  auto res = parse_source("int x : count(3);", "t.c");
  CHECK(!res.ok());
  bool found = false;
  for (const auto &d : res.diags.all())
    if (d.code == "E-ANN-NONPTR") found = true;
  CHECK(found);
}

TEST_CASE("parse: bounds on a singleton pointer are rejected") {
  auto res = parse_source("_Ptr<int> p : count(3);", "t.c");
  CHECK(!res.ok());
  CHECK(res.diags[0].code == "E-ANN-PTR-BOUNDS");
}

TEST_CASE("parse: macro and native spellings are the same declaration") {
  auto native = parse_source(
      "size_t fread(void *p : byte_count(size * nmemb), size_t size, "
      "size_t nmemb, FILE *stream : itype(ptr<FILE>));",
      "a.c");
  auto macro = parse_source(
      "size_t fread(void *p abyte_count(size * nmemb), size_t size, "
      "size_t nmemb, FILE *stream atype(ptr(FILE)));",
      "b.c");
  REQUIRE(native.ok());
  REQUIRE(macro.ok());
  CHECK(structurally_equal(native.unit, macro.unit));
}

TEST_CASE("parse: checked scope markers, both spellings") {
  auto native = parse_source("int f(int a) _Checked { return a; }", "a.c");
  auto macro = parse_source("int f(int a) checked_scope { return a; }", "b.c");
  REQUIRE(native.ok());
  REQUIRE(macro.ok());
  CHECK(native.unit.items[0]->fn->body_marker == ScopeMarker::Checked);
  CHECK(structurally_equal(native.unit, macro.unit));
}

TEST_CASE("render: macro spelling of a Ptr parameter uses ptr(T)") {
  auto res = parse_source("void close_it(_Ptr<FILE> f);", "t.c");
  REQUIRE(res.ok());
  std::string macro = render(res.unit, Spelling::Macro);
  CHECK(macro.find("ptr(FILE)") != std::string::npos);
}

TEST_CASE("render: annotation-free unit is identical in all spellings") {
  std::string src = "int add(int a, int b) {\n  return a + b;\n}\n";
  auto res = parse_source(src, "t.c");
  REQUIRE(res.ok());
  std::string native = render(res.unit, Spelling::Native);
  std::string macro = render(res.unit, Spelling::Macro);
  std::string legacy = render(res.unit, Spelling::Legacy);
  CHECK(token_equal_source(native, macro));
  CHECK(token_equal_source(native, legacy));
}

TEST_CASE("render: legacy spelling of checked constructs is an internal error") {
  auto res = parse_source("_Ptr<int> p;", "t.c");
  REQUIRE(res.ok());
  CHECK_THROWS_AS((void)render(res.unit, Spelling::Legacy), std::logic_error);
}

TEST_CASE("render/parse round-trip over fuzzed annotated units") {
  fuzz::Rng rng(99);
  for (int i = 0; i < 200; ++i) {
    std::string src = fuzz::gen_decl_unit(rng);
    auto first = parse_source(src, "fuzz.c");
    REQUIRE_MESSAGE(first.ok(), "seed unit must parse:\n" << src);
    for (Spelling s : {Spelling::Native, Spelling::Macro}) {
      std::string text = render(first.unit, s);
      auto again = parse_source(text, "fuzz2.c");
      REQUIRE_MESSAGE(again.ok(), "re-parse failed for:\n" << text);
      CHECK_MESSAGE(structurally_equal(first.unit, again.unit),
                    "round-trip mismatch:\n"
                        << src << "\n--- rendered ---\n" << text);
    }
  }
}

TEST_CASE("render/parse round-trip over plain units includes legacy spelling") {
  fuzz::Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    std::string src = fuzz::gen_plain_unit(rng);
    auto first = parse_source(src, "fuzz.c");
    REQUIRE(first.ok());
    for (Spelling s : {Spelling::Native, Spelling::Macro, Spelling::Legacy}) {
      std::string text = render(first.unit, s);
      auto again = parse_source(text, "fuzz2.c");
      REQUIRE(again.ok());
      CHECK(structurally_equal(first.unit, again.unit));
    }
  }
}

TEST_CASE("parse: conditional blocks at top level and statement level") {
  std::string src = "#ifdef USE_CHECKEDC\nint a;\n#else\nint b;\n#endif\n"
                    "void f(void) {\n#ifndef USE_CHECKEDC\n  g();\n#endif\n}\n";
  auto res = parse_source(src, "t.c");
  REQUIRE(res.ok());
  REQUIRE(res.unit.items.size() == 2);
  CHECK(res.unit.items[0]->kind == ItemKind::CondBlock);
  CHECK(res.unit.items[0]->cond_name == "USE_CHECKEDC");
  CHECK(res.unit.items[0]->has_else);
  const Function &fn = *res.unit.items[1]->fn;
  REQUIRE(fn.body.has_value());
  REQUIRE(fn.body->body.size() == 1);
  CHECK(fn.body->body[0]->kind == StmtKind::CondBlock);
  CHECK(fn.body->body[0]->cond_negated);
}

TEST_CASE("parse: compat include is absorbed into a unit flag") {
  auto res = parse_source("#include \"checkedc_compat.h\"\nint x;\n", "t.c");
  REQUIRE(res.ok());
  CHECK(res.unit.has_compat_include);
  REQUIRE(res.unit.items.size() == 1);
  CHECK(res.unit.items[0]->kind == ItemKind::GlobalVar);
  std::string macro = render(res.unit, Spelling::Macro);
  CHECK(macro.find("#include \"checkedc_compat.h\"") == 0);
  std::string native = render(res.unit, Spelling::Native);
  CHECK(native.find("checkedc_compat") == std::string::npos);
}

TEST_CASE("parse: verbatim directives survive rendering byte-for-byte") {
  std::string src = "#include <stdint.h>\n#define MAGIC 42\nint x;\n";
  auto res = parse_source(src, "t.c");
  REQUIRE(res.ok());
  std::string native = render(res.unit, Spelling::Native);
  CHECK(native.find("#include <stdint.h>") != std::string::npos);
  CHECK(native.find("#define MAGIC 42") != std::string::npos);
}

#include "chkcc/emit.hpp"
#include "chkcc/parser.hpp"
#include "chkcc/sema.hpp"
#include "chkcc/token.hpp"

#include "support/fuzz.hpp"

#include <doctest.h>

using namespace chkcc;

namespace {

SourceUnit parse_ok(const std::string &src) {
  auto res = parse_source(src, "t.c");
  REQUIRE_MESSAGE(res.ok(), "parse failed:\n" << src);
  return res.unit;
}

std::string expand_ok(const std::string &src, bool checked) {
  auto res = expand_macros(src, checked);
  REQUIRE(res.ok());
  return res.text;
}

const std::string kFreadNative =
    "size_t fread(void *p : byte_count(size * nmemb),\n"
    "  size_t size, size_t nmemb,\n"
    "  FILE *stream : itype(ptr<FILE>));\n";

const std::string kFreadMacro =
    "size_t fread(void *p abyte_count(size * nmemb),\n"
    "  size_t size, size_t nmemb,\n"
    "  FILE *stream atype(ptr(FILE)));\n";

const std::string kFreadLegacy =
    "size_t fread(void *p, size_t size, size_t nmemb, FILE *stream);\n";

} // namespace

TEST_CASE("emit_strip: interface annotations erase to plain declarations") {
  SourceUnit u = parse_ok("size_t fwrite(const void *p abyte_count(n), size_t n, "
                          "FILE *stream atype(ptr(FILE)));\n");
  std::string stripped = emit_strip(u);
  CHECK(token_equal_source(
      stripped,
      "size_t fwrite(const void *p, size_t n, FILE *stream);"));
}

TEST_CASE("emit_strip: annotation-free unit equals its legacy rendering") {
  SourceUnit u = parse_ok("int add(int a, int b) { return a + b; }\n");
  CHECK(emit_strip(u) == render(u, Spelling::Legacy));
}

TEST_CASE("emit_strip: USE_CHECKEDC blocks resolve with the macro undefined") {
  SourceUnit u = parse_ok("#ifdef USE_CHECKEDC\nint a;\n#else\nint b;\n#endif\n"
                          "#ifdef OTHER\nint c;\n#endif\n");
  std::string stripped = emit_strip(u);
  CHECK(stripped.find("int b;") != std::string::npos);
  CHECK(stripped.find("int a;") == std::string::npos);
  // unrelated conditionals are preserved verbatim
  CHECK(stripped.find("#ifdef OTHER") != std::string::npos);
  CHECK(stripped.find("int c;") != std::string::npos);
}

TEST_CASE("emit_strip: idempotent over fuzzed units") {
  fuzz::Rng rng(555);
  for (int i = 0; i < 200; ++i) {
    std::string src = fuzz::gen_decl_unit(rng);
    SourceUnit u = parse_ok(src);
    std::string once = emit_strip(u);
    auto reparsed = parse_source(once, "strip1.c");
    REQUIRE_MESSAGE(reparsed.ok(), "stripped output must parse:\n" << once);
    std::string twice = emit_strip(reparsed.unit);
    CHECK_MESSAGE(once == twice, "strip not idempotent for:\n" << src);
  }
}

TEST_CASE("emit_macro: the fread interface, Fig. 2 golden") {
  SourceUnit u = parse_ok(kFreadNative);
  std::string macro = emit_macro(u);
  CHECK(macro.find("#include \"checkedc_compat.h\"") == 0);
  CHECK(token_equal_source(macro.substr(macro.find('\n') + 1), kFreadMacro));
}

TEST_CASE("emit_macro: native checked types become macro spellings") {
  SourceUnit u = parse_ok("_Ptr<FILE> handle;\n_Array_ptr<int> xs : count(4);\n");
  std::string macro = emit_macro(u);
  CHECK(macro.find("ptr(FILE) handle;") != std::string::npos);
  CHECK(macro.find("array_ptr(int) xs acount(4);") != std::string::npos);
  CHECK(macro.find("_Ptr") == std::string::npos);
}

TEST_CASE("emit_macro: annotation-free unit is strip output plus the include") {
  SourceUnit u = parse_ok("int add(int a, int b) { return a + b; }\n");
  std::string macro = emit_macro(u);
  std::string include_line = "#include \"checkedc_compat.h\"\n";
  REQUIRE(macro.substr(0, include_line.size()) == include_line);
  CHECK(token_equal_source(macro.substr(include_line.size()), emit_strip(u)));
}

TEST_CASE("gen_compat_header: contains the exact Fig. 1 definition") {
  std::string header = gen_compat_header();
  CHECK(header.find("#ifdef USE_CHECKEDC\n#define ptr(t) _Ptr<t>") !=
        std::string::npos);
  CHECK(header.find("#else\n#define ptr(t) t *") != std::string::npos);
  for (const char *name :
       {"array_ptr", "nt_array_ptr", "acount", "abyte_count", "abounds",
        "atype", "checked_scope", "unchecked_scope"}) {
    INFO(name);
    CHECK(header.find(std::string("#define ") + name) != std::string::npos);
  }
}

TEST_CASE("expand_macros: Fig. 1 both branches") {
  CHECK(token_equal_source(expand_ok("ptr(FILE) f;", true), "_Ptr<FILE> f;"));
  CHECK(token_equal_source(expand_ok("ptr(FILE) f;", false), "FILE * f;"));
}

TEST_CASE("expand_macros: legacy expansion of the Fig. 2 macro declaration") {
  CHECK(token_equal_source(expand_ok(kFreadMacro, false), kFreadLegacy));
}

TEST_CASE("expand_macros: checked expansion returns to the native Fig. 2 form") {
  CHECK(token_equal_source(expand_ok(kFreadMacro, true), kFreadNative));
}

TEST_CASE("expand_macros: source without compat macros is unchanged") {
  std::string src = "int add(int a, int b) { return a + b; }\n";
  CHECK(token_equal_source(expand_ok(src, true), src));
  CHECK(token_equal_source(expand_ok(src, false), src));
}

TEST_CASE("expand_macros: wrong arity is a diagnostic") {
  auto res = expand_macros("abounds(x) int v;", true);
  CHECK(!res.ok());
  CHECK(res.diags[0].code == "E-MACRO-ARITY");
}

TEST_CASE("expand_macros: scope markers expand and erase") {
  std::string src = "void f(void) checked_scope {\n  unchecked_scope {\n  }\n}\n";
  std::string checked = expand_ok(src, true);
  CHECK(checked.find("_Checked") != std::string::npos);
  CHECK(checked.find("_Unchecked") != std::string::npos);
  std::string legacy = expand_ok(src, false);
  CHECK(legacy.find("_Checked") == std::string::npos);
  CHECK(legacy.find("checked_scope") == std::string::npos);
  CHECK(token_equal_source(legacy, "void f(void) {\n { \n  }\n}\n"));
}

TEST_CASE("expand_macros: the compat include line is consumed") {
  std::string src = "#include \"checkedc_compat.h\"\n#include <stdint.h>\nptr(int) p;\n";
  std::string checked = expand_ok(src, true);
  CHECK(checked.find("checkedc_compat.h") == std::string::npos);
  CHECK(checked.find("#include <stdint.h>") != std::string::npos);
  CHECK(checked.find("_Ptr<int> p;") != std::string::npos);
}

TEST_CASE("commutation squares over fuzzed annotated units") {
  fuzz::Rng rng(4242);
  int checked_ok = 0, legacy_ok = 0;
  for (int i = 0; i < 200; ++i) {
    std::string src = fuzz::gen_decl_unit(rng);
    SourceUnit u = parse_ok(src);
    std::string macro = emit_macro(u);

    auto to_legacy = expand_macros(macro, false);
    REQUIRE(to_legacy.ok());
    bool leg = token_equal_source(to_legacy.text, emit_strip(u));
    CHECK_MESSAGE(leg, "legacy leg mismatch for:\n"
                           << src << "\n--- macro ---\n" << macro
                           << "\n--- expanded ---\n" << to_legacy.text
                           << "\n--- strip ---\n" << emit_strip(u));
    legacy_ok += leg;

    auto to_native = expand_macros(macro, true);
    REQUIRE(to_native.ok());
    bool nat = token_equal_source(to_native.text, render(u, Spelling::Native));
    CHECK_MESSAGE(nat, "checked leg mismatch for:\n"
                           << src << "\n--- macro ---\n" << macro
                           << "\n--- expanded ---\n" << to_native.text
                           << "\n--- native ---\n"
                           << render(u, Spelling::Native));
    checked_ok += nat;
  }
  CHECK(checked_ok == 200);
  CHECK(legacy_ok == 200);
}

TEST_CASE("expand_macros: both legs on executable fuzz programs") {
  fuzz::Rng rng(1717);
  for (int i = 0; i < 50; ++i) {
    fuzz::GenProgram prog = fuzz::gen_program(rng, i % 2 == 0);
    SourceUnit u = parse_ok(prog.source);
    std::string macro = emit_macro(u);
    auto to_legacy = expand_macros(macro, false);
    REQUIRE(to_legacy.ok());
    CHECK(token_equal_source(to_legacy.text, emit_strip(u)));
    auto to_native = expand_macros(macro, true);
    REQUIRE(to_native.ok());
    CHECK(token_equal_source(to_native.text, render(u, Spelling::Native)));
  }
}

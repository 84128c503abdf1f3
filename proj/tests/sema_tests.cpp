#include "chkcc/emit.hpp"
#include "chkcc/parser.hpp"
#include "chkcc/render.hpp"
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

bool has_code(const DiagList &diags, const std::string &code) {
  for (const auto &d : diags.all())
    if (d.code == code) return true;
  return false;
}

std::string codes_of(const DiagList &diags) {
  std::string out;
  for (const auto &d : diags.all()) out += d.code + " ";
  return out;
}

} // namespace

TEST_CASE("sema: raw pointer declaration in checked scope") {
  SourceUnit u = parse_ok("int f(ptr(int) p) _Checked {\n"
                          "  int *q = 0;\n"
                          "  return 0;\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-SCOPE-RAWPTR"));
}

TEST_CASE("sema: raw pointer use in checked scope") {
  SourceUnit u = parse_ok("int f(int *raw, int n) {\n"
                          "  _Checked {\n"
                          "    return raw[0];\n"
                          "  }\n"
                          "  return n;\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-SCOPE-RAWPTR"));
}

TEST_CASE("sema: fully legacy unit is accepted vacuously") {
  SourceUnit u = parse_ok("int g;\n"
                          "int add(int a, int *p, size_t n) {\n"
                          "  int local[4];\n"
                          "  local[0] = p[0];\n"
                          "  return a + local[0] + g;\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(!d.has_errors());
}

TEST_CASE("sema: memset over an nt view is the terminator rule") {
  std::string base = "void *memset(void *s abyte_count(n), int c, size_t n);\n"
                     "void reset(nt_array_ptr(char) ary acount(len), size_t len) _Checked {\n"
                     "  memset(ary, 0, len);\n"
                     "}\n";
  SourceUnit u = parse_ok(base);
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-NT-OVERWRITE"));

  // the paper's workaround: the call only exists for legacy compilers
  std::string guarded =
      "void *memset(void *s abyte_count(n), int c, size_t n);\n"
      "void reset(nt_array_ptr(char) ary acount(len), size_t len) _Checked {\n"
      "#ifndef USE_CHECKEDC\n"
      "  memset(ary, 0, len);\n"
      "#endif\n"
      "}\n";
  SourceUnit u2 = parse_ok(guarded);
  DiagList d2 = check_unit(u2);
  CHECK(!d2.has_errors());
}

TEST_CASE("sema: memset of the address of an nt pointer variable") {
  std::string src = "void *memset(void *s abyte_count(n), int c, size_t n);\n"
                    "void reset(nt_array_ptr(char) ary acount(len), size_t len) _Checked {\n"
                    "  memset(&ary, 0, sizeof(ary));\n"
                    "}\n";
  SourceUnit u = parse_ok(src);
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-NT-OVERWRITE"));
}

TEST_CASE("sema: arithmetic on singleton pointers") {
  SourceUnit u = parse_ok("int f(ptr(int) p) _Checked {\n"
                          "  return *(p + 1);\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-PTR-ARITH"));
}

TEST_CASE("sema: dereference without reachable bounds") {
  SourceUnit u = parse_ok("int f(array_ptr(int) p) _Checked {\n"
                          "  return p[0];\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-BOUNDS-MISSING"));
}

TEST_CASE("sema: side effects in bounds expressions") {
  SourceUnit u = parse_ok("void f(int *a : count(n++), int n);\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-BOUNDS-ILLFORMED"));
}

TEST_CASE("sema: bounds referencing unknown identifiers") {
  SourceUnit u = parse_ok("void f(int *a : count(missing));\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-BOUNDS-UNRESOLVED"));
}

TEST_CASE("sema: statically visible terminator overwrite") {
  SourceUnit u = parse_ok("int f(void) _Checked {\n"
                          "  nt_array_ptr(char) s acount(3) = \"abc\";\n"
                          "  s[3] = 'x';\n"
                          "  return 0;\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-NT-OVERWRITE"));

  SourceUnit ok = parse_ok("int f(void) _Checked {\n"
                           "  nt_array_ptr(char) s acount(3) = \"abc\";\n"
                           "  s[3] = 0;\n"
                           "  return 0;\n"
                           "}\n");
  CHECK(!check_unit(ok).has_errors());
}

TEST_CASE("sema: terminator overwrite via matching bound expression") {
  SourceUnit u = parse_ok(
      "void f(nt_array_ptr(char) s acount(len), size_t len) _Checked {\n"
      "  s[len] = 'x';\n"
      "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-NT-OVERWRITE"));
}

TEST_CASE("sema: bounds widening over a string literal") {
  SourceUnit u = parse_ok("int f(void) _Checked {\n"
                          "  array_ptr(char) s acount(9) = \"abc\";\n"
                          "  return s[0];\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-BOUNDS-WIDEN"));
}

TEST_CASE("sema: bounds widening over an array") {
  SourceUnit u = parse_ok("int f(void) {\n"
                          "  int data[4];\n"
                          "  _Checked {\n"
                          "    array_ptr(int) v abounds(data, data + 9) = data;\n"
                          "    return v[0];\n"
                          "  }\n"
                          "  return 0;\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-BOUNDS-WIDEN"));
}

TEST_CASE("sema: rebinding a bounds-carrying pointer in checked scope") {
  SourceUnit u = parse_ok(
      "void f(array_ptr(int) xs acount(n), size_t n) _Checked {\n"
      "  xs = xs;\n"
      "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-CHECKED-UNSUPPORTED"));
}

TEST_CASE("sema: interface calls from checked scope are accepted") {
  SourceUnit u = parse_ok(
      "size_t consume(void *p abyte_count(size * nmemb), size_t size, size_t nmemb);\n"
      "int f(void) {\n"
      "  uint8_t data[8];\n"
      "  _Checked {\n"
      "    return consume(data, 1, 8);\n"
      "  }\n"
      "  return 0;\n"
      "}\n");
  DiagList d = check_unit(u);
  CHECK(!d.has_errors());
}

TEST_CASE("sema: raw-pointer callee rejected from checked scope") {
  SourceUnit u = parse_ok("int takes_raw(int *p);\n"
                          "int f(array_ptr(int) xs acount(n), size_t n) _Checked {\n"
                          "  return takes_raw(xs);\n"
                          "}\n");
  DiagList d = check_unit(u);
  CHECK(has_code(d, "E-SCOPE-RAWPTR"));
}

TEST_CASE("sema: diagnostics are deterministic and ordered") {
  std::string src = "int f(ptr(int) p) _Checked {\n"
                    "  int *q = 0;\n"
                    "  int *r = 0;\n"
                    "  return *(p + 2);\n"
                    "}\n";
  SourceUnit u = parse_ok(src);
  DiagList d1 = check_unit(u);
  DiagList d2 = check_unit(u);
  REQUIRE(d1.size() == d2.size());
  CHECK(d1.size() >= 3);
  for (size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].code == d2[i].code);
    CHECK(d1[i].span.begin == d2[i].span.begin);
  }
  // ordered by source position
  for (size_t i = 1; i < d1.size(); ++i)
    CHECK(d1[i - 1].span.begin <= d1[i].span.begin);
}

TEST_CASE("sema: monotonicity, wrapping accepted checked code in _Unchecked") {
  fuzz::Rng rng(2024);
  int wrapped = 0;
  for (int i = 0; i < 60; ++i) {
    fuzz::GenProgram prog = fuzz::gen_program(rng, false);
    SourceUnit u = parse_ok(prog.source);
    DiagList base = check_unit(u);
    REQUIRE_MESSAGE(!base.has_errors(),
                    "fuzz unit rejected: " << codes_of(base) << "\n"
                                           << prog.source);
    // re-spell every checked block as an unchecked block
    std::string flipped = prog.source;
    size_t pos = 0;
    while ((pos = flipped.find("_Checked", pos)) != std::string::npos) {
      flipped.replace(pos, 8, "_Unchecked");
      pos += 10;
      ++wrapped;
    }
    SourceUnit u2 = parse_ok(flipped);
    DiagList after = check_unit(u2);
    CHECK_MESSAGE(!after.has_errors(),
                  "unchecked wrapping must stay accepted: " << codes_of(after));
  }
  CHECK(wrapped > 0);
}

TEST_CASE("sema: erasure safety, accepted units strip to zero checked keywords") {
  fuzz::Rng rng(31415);
  for (int i = 0; i < 60; ++i) {
    std::string src = i % 3 == 0 ? fuzz::gen_program(rng, false).source
                                 : fuzz::gen_decl_unit(rng);
    SourceUnit u = parse_ok(src);
    if (check_unit(u).has_errors()) continue;
    std::string stripped = emit_strip(u);
    auto toks = tokenize(stripped);
    REQUIRE(toks.ok());
    for (const auto &t : toks.tokens) {
      CHECK(t.kind != TokenKind::CheckedKeyword);
      if (t.is_punct(":")) {
        // no annotation-introducing colons survive either
        CHECK(false);
      }
    }
  }
}

TEST_CASE("resolve_bounds: count normalizes to [p, p+n)") {
  SourceUnit u = parse_ok(
      "void f(array_ptr(uint8_t) b acount(len), size_t len);\n");
  const Decl &b = u.items[0]->fn->params[0];
  DiagList diags;
  std::vector<RecordDef *> records;
  ResolvedBounds rb = resolve_bounds(b, make_ident("b"), records, diags);
  CHECK(render_expr(*rb.lo) == "b");
  CHECK(render_expr(*rb.hi) == "b + len");
  CHECK(rb.element_size == 1);
  CHECK(!diags.has_errors());
}

TEST_CASE("resolve_bounds: byte_count over a byte element") {
  SourceUnit u = parse_ok(
      "void f(void *p abyte_count(size * nmemb), size_t size, size_t nmemb);\n");
  const Decl &p = u.items[0]->fn->params[0];
  DiagList diags;
  std::vector<RecordDef *> records;
  ResolvedBounds rb = resolve_bounds(p, make_ident("p"), records, diags);
  CHECK(render_expr(*rb.hi) == "p + size * nmemb");
  CHECK(rb.element_size == 1);
}

TEST_CASE("resolve_bounds: singleton pointer is [p, p+1)") {
  SourceUnit u = parse_ok("void f(ptr(FILE) stream);\n");
  const Decl &s = u.items[0]->fn->params[0];
  DiagList diags;
  std::vector<RecordDef *> records;
  ResolvedBounds rb = resolve_bounds(s, make_ident("stream"), records, diags);
  CHECK(rb.singleton);
  CHECK(render_expr(*rb.lo) == "stream");
  CHECK(render_expr(*rb.hi) == "stream + 1");
}

TEST_CASE("resolve_bounds: misaligned byte_count over a wide element warns") {
  SourceUnit u = parse_ok("void f(int *p : byte_count(7), size_t n);\n");
  const Decl &p = u.items[0]->fn->params[0];
  DiagList diags;
  std::vector<RecordDef *> records;
  ResolvedBounds rb = resolve_bounds(p, make_ident("p"), records, diags);
  CHECK(rb.element_size == 4);
  bool warned = false;
  for (const auto &d : diags.all())
    if (d.code == "W-BYTECOUNT-ALIGN") warned = true;
  CHECK(warned);
}

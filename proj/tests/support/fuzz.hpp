// Deterministic random program generators for the property and
// differential suites. Everything is seeded; no global state.
#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fuzz {

using Rng = std::mt19937;

inline int pick(Rng &rng, int lo, int hi) { // inclusive
  return (int)(lo + rng() % (unsigned)(hi - lo + 1));
}

inline bool chance(Rng &rng, int percent) { return pick(rng, 1, 100) <= percent; }

// --- declaration units (round-trip / commutation corpora) --------------------

// Annotated declaration-heavy unit in native spelling. No USE_CHECKEDC
// conditionals (the macro commutation square resolves them away).
inline std::string gen_decl_unit(Rng &rng) {
  std::ostringstream out;
  if (chance(rng, 30)) out << "#include <stdint.h>\n";
  if (chance(rng, 25)) out << "#pragma CHECKED_SCOPE on\n";

  int nrec = pick(rng, 0, 2);
  for (int r = 0; r < nrec; ++r) {
    out << "struct rec" << r << " {\n";
    int nf = pick(rng, 1, 3);
    for (int f = 0; f < nf; ++f) {
      const char *types[] = {"int", "char", "unsigned int", "short"};
      out << "  " << types[pick(rng, 0, 3)] << " f" << f << ";\n";
    }
    out << "};\n";
  }
  if (nrec > 0 && chance(rng, 50))
    out << "typedef struct rec0 rec0_t;\n";

  int nglob = pick(rng, 0, 3);
  for (int g = 0; g < nglob; ++g) {
    switch (pick(rng, 0, 3)) {
    case 0: out << "int g" << g << " = " << pick(rng, 0, 99) << ";\n"; break;
    case 1: out << "unsigned int g" << g << ";\n"; break;
    case 2: out << "char g" << g << "[" << pick(rng, 1, 16) << "];\n"; break;
    default: out << "size_t g" << g << " = " << pick(rng, 0, 9) << ";\n"; break;
    }
  }

  int nproto = pick(rng, 1, 4);
  for (int p = 0; p < nproto; ++p) {
    const char *ret[] = {"int", "void", "size_t", "unsigned int"};
    out << ret[pick(rng, 0, 3)] << " fn" << p << "(";
    int nparams = pick(rng, 0, 3);
    bool first = true;
    auto sep = [&]() {
      if (!first) out << ", ";
      first = false;
    };
    if (nparams == 0) {
      out << "void";
    } else {
      for (int i = 0; i < nparams; ++i) {
        sep();
        switch (pick(rng, 0, 7)) {
        case 0: out << "int a" << i; break;
        case 1: out << "size_t n" << i; break;
        case 2: out << "int *a" << i << " : count(n" << i << "), size_t n" << i;
          ++i;
          break;
        case 3: out << "_Array_ptr<uint8_t> a" << i << " : count(n" << i
                    << "), size_t n" << i;
          ++i;
          break;
        case 4: out << "void *a" << i << " : byte_count(n" << i
                    << "), size_t n" << i;
          ++i;
          break;
        case 5: out << "FILE *a" << i << " : itype(ptr<FILE>)"; break;
        case 6: out << "_Nt_array_ptr<char> a" << i << " : count(n" << i
                    << "), size_t n" << i;
          ++i;
          break;
        default: out << "_Ptr<int> a" << i; break;
        }
      }
    }
    out << ");\n";
  }
  if (chance(rng, 40))
    out << "char *name_of(int id) : itype(ptr<char>);\n";

  int nfn = pick(rng, 0, 2);
  for (int f = 0; f < nfn; ++f) {
    out << "int body" << f << "(int a, int b) ";
    bool marked = chance(rng, 60);
    if (marked) out << (chance(rng, 70) ? "_Checked " : "_Unchecked ");
    out << "{\n";
    int nst = pick(rng, 1, 3);
    for (int s = 0; s < nst; ++s) {
      switch (pick(rng, 0, 3)) {
      case 0: out << "  int t" << s << " = a + " << pick(rng, 0, 9) << ";\n"; break;
      case 1: out << "  if (a < b) a = a + 1; else b = b - 1;\n"; break;
      case 2: out << "  while (a > 0) a = a - " << pick(rng, 1, 3) << ";\n"; break;
      default: out << "  b = b * " << pick(rng, 1, 5) << ";\n"; break;
      }
    }
    out << "  return a + b;\n}\n";
  }
  return out.str();
}

// Annotation-free plain C unit (legacy-spelling round trips).
inline std::string gen_plain_unit(Rng &rng) {
  std::ostringstream out;
  int nglob = pick(rng, 0, 2);
  for (int g = 0; g < nglob; ++g)
    out << "int g" << g << " = " << pick(rng, 0, 99) << ";\n";
  out << "int calc" << "(int a, int b) {\n";
  int nst = pick(rng, 1, 4);
  for (int s = 0; s < nst; ++s) {
    switch (pick(rng, 0, 4)) {
    case 0: out << "  a = a + b * " << pick(rng, 1, 9) << ";\n"; break;
    case 1: out << "  if (a > b) { a = a - b; }\n"; break;
    case 2: out << "  for (int i = 0; i < 3; i = i + 1) b = b + i;\n"; break;
    case 3: out << "  b = (a + b) / 2 + " << pick(rng, 0, 5) << ";\n"; break;
    default: out << "  a = a ^ " << pick(rng, 0, 255) << ";\n"; break;
    }
  }
  out << "  return a - b;\n}\n";
  int nproto = pick(rng, 0, 2);
  for (int p = 0; p < nproto; ++p)
    out << "int util" << p << "(int x, char *buf, size_t n);\n";
  return out.str();
}

// --- executable programs (differential corpus) -------------------------------

struct GenProgram {
  std::string source;
  bool injected = false; // contains a known out-of-bounds site
};

// A small integer expression over the names in `vars`.
inline std::string gen_scalar_expr(Rng &rng, const std::vector<std::string> &vars,
                                   int depth = 0) {
  if (depth >= 2 || chance(rng, 40)) {
    if (!vars.empty() && chance(rng, 60))
      return vars[(size_t)pick(rng, 0, (int)vars.size() - 1)];
    return std::to_string(pick(rng, 0, 9));
  }
  const char *ops[] = {"+", "-", "*", "&", "|", "^"};
  return "(" + gen_scalar_expr(rng, vars, depth + 1) + " " +
         ops[pick(rng, 0, 5)] + " " + gen_scalar_expr(rng, vars, depth + 1) +
         ")";
}

// Deterministically violating or violation-free programs with entry `run`.
// Violations are only ever injected through checked-scope accesses or
// call-boundary bindings, which is the class the instrumenter guards.
inline GenProgram gen_program(Rng &rng, bool inject) {
  GenProgram prog;
  prog.injected = inject;
  std::ostringstream out;

  int n = pick(rng, 2, 7); // capacity of the main buffer
  int inject_site = inject ? pick(rng, 0, 5) : -1;

  // worker over an int buffer
  out << "int work(array_ptr(int) xs acount(n), size_t n) _Checked {\n"
      << "  int acc = " << pick(rng, 0, 9) << ";\n"
      << "  for (int i = 0; i < n; i = i + 1) {\n";
  if (chance(rng, 50))
    out << "    acc = acc + xs[i] * " << pick(rng, 1, 5) << ";\n";
  else
    out << "    acc = acc + *(xs + i) * " << pick(rng, 1, 5) << ";\n";
  if (chance(rng, 40))
    out << "    if (i > 0 && xs[i - 1] > 2) acc = acc + 1;\n";
  if (chance(rng, 50))
    out << "    xs[i] = acc & " << pick(rng, 3, 255) << ";\n";
  if (chance(rng, 30))
    out << "    if (xs[i] > " << pick(rng, 3, 9) << ") acc = acc - 1;\n";
  if (inject_site == 0) {
    if (chance(rng, 50))
      out << "    acc = acc + xs[n];\n"; // one past the declared bound
    else
      out << "    acc = acc + *(xs + n);\n";
  }
  out << "  }\n"
      << "  return acc;\n"
      << "}\n";

  // worker with self-referential range bounds
  out << "int rwork(array_ptr(int) v abounds(v, v + c), size_t c) _Checked {\n"
      << "  int t = 0;\n"
      << "  for (int j = 0; j < c; j = j + 1) {\n"
      << "    t = t + v[j];\n"
      << "  }\n"
      << "  return t;\n"
      << "}\n";

  // byte-granular consumer over an opaque region
  out << "size_t bwork(void *p abyte_count(a * b), size_t a, size_t b) {\n"
      << "  return a * b;\n"
      << "}\n";

  // worker chain with a narrowed view
  out << "int tail_sum(array_ptr(int) v acount(k), size_t k) _Checked {\n"
      << "  int t = 0;\n"
      << "  for (int j = 0; j < k; j = j + 1) t = t + v[j];\n"
      << "  return t;\n"
      << "}\n"
      << "int chain(array_ptr(int) xs acount(n), size_t n) _Checked {\n"
      << "  if (n > 1) {\n"
      << "    return tail_sum(xs + 1, n - 1);\n"
      << "  }\n"
      << "  return 0;\n"
      << "}\n";

  // nt scanner
  int lit_len = pick(rng, 1, 6);
  std::string lit;
  for (int i = 0; i < lit_len; ++i) lit += (char)('a' + pick(rng, 0, 25));
  out << "int scan(nt_array_ptr(char) s acount(m), size_t m) _Checked {\n"
      << "  int i = 0;\n"
      << "  while (s[i] != 0) {\n"
      << "    i = i + 1;\n"
      << "  }\n"
      << "  return i;\n"
      << "}\n";

  // singleton reader
  out << "int get(ptr(int) p) _Checked {\n"
      << "  return *p;\n"
      << "}\n";

  int nbytes = pick(rng, 2, 8);
  out << "int run(int a0) {\n"
      << "  int data[" << n << "]";
  out << " = {";
  for (int i = 0; i < n; ++i) {
    if (i) out << ", ";
    out << pick(rng, 0, 9);
  }
  out << "};\n";
  out << "  uint8_t bytes[" << nbytes << "];\n";
  out << "  int out = 0;\n";
  out << "  int x = " << gen_scalar_expr(rng, {"a0"}) << ";\n";
  out << "  _Checked {\n";

  // main buffer work; boundary injection passes an inflated count
  if (inject_site == 1)
    out << "    out = work(data, " << n << " + 1);\n";
  else
    out << "    out = work(data, " << n << ");\n";
  if (chance(rng, 70)) out << "    out = out + chain(data, " << n << ");\n";
  if (chance(rng, 60)) out << "    out = out + rwork(data, " << n << ");\n";

  // byte-granular boundary; injection oversizes the byte region
  if (inject_site == 4)
    out << "    out = out + bwork(bytes, 2, " << nbytes << ");\n";
  else if (chance(rng, 60))
    out << "    out = out + bwork(bytes, 1, " << nbytes << ");\n";
  if (inject_site == 5)
    out << "    out = out + rwork(data, " << n << " + 2);\n";

  // nt string handling
  out << "    nt_array_ptr(char) s acount(" << lit_len << ") = \"" << lit
      << "\";\n"
      << "    out = out + scan(s, " << lit_len << ");\n";
  if (chance(rng, 40))
    out << "    out = out + s[" << lit_len << "];\n"; // terminator read

  if (chance(rng, 50))
    out << "    s[" << pick(rng, 0, lit_len) << "] = 0;\n"; // zero anywhere
  if (chance(rng, 50) && lit_len >= 2)
    out << "    s[" << pick(rng, 0, lit_len - 1) << "] = "
        << pick(rng, 1, 120) << ";\n"; // non-zero inside the data range
  if (inject_site == 2)
    out << "    s[" << lit_len << "] = x | 1;\n"; // non-zero at the terminator

  // singleton pointer
  if (inject_site == 3)
    out << "    ptr(int) p = 0;\n"
        << "    out = out + get(p);\n";
  else
    out << "    ptr(int) p = &x;\n"
        << "    out = out + get(p);\n";

  out << "  }\n"
      << "  print_int(out);\n"
      << "  print_int(x);\n"
      << "  return out ^ (a0 & 15);\n"
      << "}\n";
  prog.source = out.str();
  return prog;
}

} // namespace fuzz

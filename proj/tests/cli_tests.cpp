#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

const std::string kTool = CHKCC_TOOL_PATH;

struct RunResult {
  int exit_code = -1;
  std::string output; // stdout + stderr
};

RunResult run_tool(const std::string &args) {
  fs::path cap = fs::temp_directory_path() / "chkcc-cli-capture.txt";
  std::string cmd = kTool + " " + args + " > " + cap.string() + " 2>&1";
  int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(cap);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  return res;
}

fs::path write_temp(const std::string &name, const std::string &content) {
  fs::path dir = fs::temp_directory_path() / "chkcc-cli-tests";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

const char *kFig2Native =
    "size_t fread(void *p : byte_count(size * nmemb),\n"
    "  size_t size, size_t nmemb,\n"
    "  FILE *stream : itype(ptr<FILE>));\n";

} // namespace

TEST_CASE("cli: check accepts the fread interface") {
  fs::path f = write_temp("fig2.c", kFig2Native);
  RunResult r = run_tool("check " + f.string());
  CHECK(r.exit_code == 0);
}

TEST_CASE("cli: check reports diagnostics with file:line:col format") {
  fs::path f = write_temp("bad.c",
                          "int f(ptr(int) p) _Checked {\n"
                          "  int *q = 0;\n"
                          "  return 0;\n"
                          "}\n");
  RunResult r = run_tool("check " + f.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("bad.c:2:8: error[E-SCOPE-RAWPTR]:") != std::string::npos);
}

TEST_CASE("cli: expand --legacy turns the macro interface into plain C") {
  fs::path f = write_temp(
      "fig2m.c",
      "size_t fread(void *p abyte_count(size * nmemb), size_t size, "
      "size_t nmemb, FILE *stream atype(ptr(FILE)));\n");
  RunResult r = run_tool("expand --legacy " + f.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("abyte_count") == std::string::npos);
  CHECK(r.output.find("atype") == std::string::npos);
  CHECK(r.output.find("fread") != std::string::npos);
}

TEST_CASE("cli: expand demands exactly one branch flag") {
  fs::path f = write_temp("fig2m2.c", "ptr(int) p;\n");
  CHECK(run_tool("expand " + f.string()).exit_code == 64);
  CHECK(run_tool("expand --checked --legacy " + f.string()).exit_code == 64);
}

TEST_CASE("cli: run exit codes follow the outcome") {
  fs::path ok = write_temp("ok.c", "int run(void) { return 3; }\n");
  RunResult r1 = run_tool("run --mode oracle --entry run " + ok.string());
  CHECK(r1.exit_code == 0);
  CHECK(r1.output.find("NORMAL 3") != std::string::npos);

  fs::path oob = write_temp(
      "oob.c",
      "int peek(array_ptr(int) b acount(n), size_t n) _Checked { return b[n]; }\n"
      "int run(void) {\n"
      "  int d[2] = {4, 5};\n"
      "  return peek(d, 2);\n"
      "}\n");
  RunResult r3 = run_tool("run --mode oracle --entry run " + oob.string());
  CHECK(r3.exit_code == 3);
  CHECK(r3.output.find("VIOLATION") != std::string::npos);

  fs::path trap = write_temp("trap.c",
                             "int run(void) {\n"
                             "  __checked_trap(4);\n"
                             "  return 0;\n"
                             "}\n");
  RunResult r2 = run_tool("run --mode literal --entry run " + trap.string());
  CHECK(r2.exit_code == 2);
  CHECK(r2.output.find("TRAP 4") != std::string::npos);
}

TEST_CASE("cli: gen-header emits the compat header") {
  RunResult r = run_tool("gen-header");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("#define ptr(t) _Ptr<t>") != std::string::npos);
}

TEST_CASE("cli: instrument writes code and a sidecar site map") {
  fs::path f = write_temp(
      "instr_in.c",
      "int get(array_ptr(int) b acount(n), size_t n) _Checked { return b[0]; }\n");
  fs::path out = fs::temp_directory_path() / "chkcc-cli-tests" / "instr_out.c";
  RunResult r = run_tool("instrument " + f.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out));
  fs::path map = out;
  map += ".sites";
  REQUIRE(fs::exists(map));
  std::stringstream ss;
  ss << std::ifstream(map).rdbuf();
  CHECK(ss.str().find("1\tindex\t") != std::string::npos);
}

TEST_CASE("cli: stubs writes the annotated header and the review file") {
  fs::path f = write_temp("hdr.h", "int sum(int *xs, size_t n);\n");
  fs::path out = fs::temp_directory_path() / "chkcc-cli-tests" / "hdr_out.h";
  RunResult r = run_tool("stubs " + f.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  std::stringstream ss;
  ss << std::ifstream(out).rdbuf();
  CHECK(ss.str().find("acount(n)") != std::string::npos);
  fs::path notes = out;
  notes += ".stubs.txt";
  REQUIRE(fs::exists(notes));
  std::stringstream ns;
  ns << std::ifstream(notes).rdbuf();
  CHECK(ns.str().find("sum.xs: acount(n) [high]") != std::string::npos);
}

TEST_CASE("cli: bench --fixture reproduces the published table") {
  fs::path fixture = fs::path(CHKCC_TEST_DATA_DIR) / "table1_fixture.csv";
  RunResult r = run_tool("bench --fixture " + fixture.string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("inet_csum") != std::string::npos);
  CHECK(r.output.find("68") != std::string::npos);
  CHECK(r.output.find("Total") != std::string::npos);
  CHECK(r.output.find("37") != std::string::npos);

  RunResult csv = run_tool("bench --format csv --fixture " + fixture.string());
  CHECK(csv.exit_code == 0);
  CHECK(csv.output.find("module,lc_bytes,cc_bytes,es_percent,method") !=
        std::string::npos);
  CHECK(csv.output.find("inet_csum,80,134,68") != std::string::npos);
}

TEST_CASE("cli: usage errors exit 64") {
  CHECK(run_tool("frobnicate").exit_code == 64);
  CHECK(run_tool("").exit_code == 64);
}

TEST_CASE("cli: --version prints tool and dialect versions") {
  RunResult r = run_tool("--version");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("chkcc") != std::string::npos);
  CHECK(r.output.find("dialect") != std::string::npos);
}

TEST_CASE("cli: strip and macro route through sema first") {
  fs::path bad = write_temp("bad2.c",
                            "int f(array_ptr(int) p) _Checked { return p[0]; }\n");
  CHECK(run_tool("strip " + bad.string()).exit_code == 1);
  CHECK(run_tool("macro " + bad.string()).exit_code == 1);
}

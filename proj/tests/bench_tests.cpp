#include "chkcc/bench.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace chkcc;

namespace {

std::string data_file(const std::string &name) {
  std::ifstream in(std::string(CHKCC_TEST_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("compute_overhead: the published rows") {
  CHECK(compute_overhead(80, 134) == 68);
  CHECK(compute_overhead(16, 30) == 88);
  CHECK(compute_overhead(4258, 5832) == 37);
  CHECK(compute_overhead(100, 100) == 0);
}

TEST_CASE("compute_overhead: all ten table rows reproduce exactly") {
  struct Row {
    long long lc, cc;
    int es;
  };
  const Row rows[] = {{80, 134, 68},    {266, 334, 26},  {212, 370, 75},
                      {204, 314, 54},   {304, 516, 70},  {1462, 1819, 24},
                      {16, 30, 88},     {1126, 1530, 36}, {588, 776, 32},
                      {4258, 5832, 37}};
  for (const auto &r : rows) {
    INFO(r.lc << " -> " << r.cc);
    CHECK(compute_overhead(r.lc, r.cc) == r.es);
  }
}

TEST_CASE("compute_overhead: ties round away from zero") {
  CHECK(compute_overhead(8, 13) == 63);   // 62.5
  CHECK(compute_overhead(8, 3) == -63);   // -62.5
  CHECK(compute_overhead(2, 1) == -50);
  CHECK(compute_overhead(200, 201) == 1); // 0.5
}

TEST_CASE("compute_overhead: zero legacy size is an error") {
  CHECK_THROWS_AS((void)compute_overhead(0, 10), std::invalid_argument);
}

TEST_CASE("fixture: totals come from the sums, not the row mean") {
  auto res = parse_fixture(data_file("table1_fixture.csv"));
  REQUIRE(res.ok());
  REQUIRE(res.report.rows.size() == 9);
  CHECK(res.report.total.lc_bytes == 4258);
  // the CC column sums to 5823; the published total row carries 5832, a
  // 9-byte discrepancy in the source table. Both round to the same ES.
  CHECK(res.report.total.cc_bytes == 5823);
  CHECK(res.report.total.es_percent == 37);
  CHECK(compute_overhead(4258, 5823) == 37);
  CHECK(compute_overhead(4258, 5832) == 37);
  // the row mean is 52.5; the correct total is far from it
  long long mean = 0;
  for (const auto &r : res.report.rows) mean += r.es_percent;
  mean /= (long long)res.report.rows.size();
  CHECK(mean != res.report.total.es_percent);

  const int expected[] = {68, 26, 75, 54, 70, 24, 88, 36, 32};
  for (size_t i = 0; i < res.report.rows.size(); ++i)
    CHECK(res.report.rows[i].es_percent == expected[i]);
}

TEST_CASE("render_report: table cells match the published numbers") {
  auto res = parse_fixture(data_file("table1_fixture.csv"));
  REQUIRE(res.ok());
  std::string table = render_report(res.report, ReportFormat::Table);
  for (const char *needle :
       {"inet_csum", "80", "134", "68", "netreg", "370", "75",
        "Total", "4258", "5823", "37"}) {
    INFO(needle);
    CHECK(table.find(needle) != std::string::npos);
  }
  // Total is the last row
  size_t total_pos = table.rfind("Total");
  CHECK(table.find('\n', total_pos) == table.size() - 1);
}

TEST_CASE("render_report: empty report has a zero total row") {
  SizeReport empty;
  empty.recompute_total();
  std::string table = render_report(empty, ReportFormat::Table);
  CHECK(table.find("Module") != std::string::npos);
  CHECK(table.find("Total") != std::string::npos);
  std::string csv = render_report(empty, ReportFormat::Csv);
  CHECK(csv.find("Total,0,0,0") != std::string::npos);
}

TEST_CASE("report round-trip: both formats parse back losslessly") {
  auto res = parse_fixture(data_file("table1_fixture.csv"));
  REQUIRE(res.ok());
  const SizeReport &orig = res.report;

  for (ReportFormat fmt : {ReportFormat::Table, ReportFormat::Csv}) {
    std::string text = render_report(orig, fmt);
    auto back = parse_report(text, fmt);
    REQUIRE(back.ok());
    REQUIRE(back.report.rows.size() == orig.rows.size());
    for (size_t i = 0; i < orig.rows.size(); ++i) {
      CHECK(back.report.rows[i].module == orig.rows[i].module);
      CHECK(back.report.rows[i].lc_bytes == orig.rows[i].lc_bytes);
      CHECK(back.report.rows[i].cc_bytes == orig.rows[i].cc_bytes);
      CHECK(back.report.rows[i].es_percent == orig.rows[i].es_percent);
    }
    CHECK(back.report.total.lc_bytes == orig.total.lc_bytes);
    CHECK(back.report.total.cc_bytes == orig.total.cc_bytes);
    CHECK(back.report.total.es_percent == orig.total.es_percent);
  }
}

TEST_CASE("toolchain config parses key = value lines") {
  auto res = parse_toolchain_config(
      "# host toolchain\ncompile_cmd = cc -c {in} -o {out}\n"
      "size_cmd = size {in}\nworkdir = /tmp/scratch\n");
  REQUIRE(res.ok());
  CHECK(res.config.compile_cmd == "cc -c {in} -o {out}");
  CHECK(res.config.size_cmd == "size {in}");
  CHECK(res.config.workdir == "/tmp/scratch");
  CHECK(res.config.configured());

  auto bad = parse_toolchain_config("nonsense line\n");
  CHECK(!bad.ok());
}

TEST_CASE("measure_module: source-bytes fallback without a toolchain") {
  std::string annotation_free = "int add(int a, int b) { return a + b; }\n";
  ToolchainConfig none;
  auto m = measure_module("plain", annotation_free, none);
  REQUIRE(m.ok());
  CHECK(m.row.method == "source-bytes");
  CHECK(m.row.lc_bytes == m.row.cc_bytes);
  CHECK(m.row.es_percent == 0);
}

TEST_CASE("measure_module: annotations never shrink the checked emission") {
  ToolchainConfig none;
  std::string plain =
      "int head(int *xs, size_t n) { return xs[0]; }\n";
  std::string annotated =
      "int head(array_ptr(int) xs acount(n), size_t n) _Checked { return xs[0]; }\n";
  auto mp = measure_module("plain", plain, none);
  auto ma = measure_module("annotated", annotated, none);
  REQUIRE(mp.ok());
  REQUIRE(ma.ok());
  CHECK(mp.row.cc_bytes >= mp.row.lc_bytes);
  CHECK(ma.row.cc_bytes > ma.row.lc_bytes);
  CHECK(ma.row.cc_bytes >= mp.row.cc_bytes);
}

TEST_CASE("measure_module: host toolchain measures real text sections") {
  if (std::system("cc --version > /dev/null 2>&1") != 0) {
    MESSAGE("host cc unavailable; skipping");
    return;
  }
  ToolchainConfig config;
  config.compile_cmd = "cc -c {in} -o {out}";
  config.size_cmd = "size {in}";
  config.workdir = "/tmp/chkcc-bench-test";
  std::string src =
      "int csum(array_ptr(uint8_t) data acount(len), size_t len) _Checked {\n"
      "  int acc = 0;\n"
      "  for (int i = 0; i < len; i = i + 1) acc = acc + data[i];\n"
      "  return acc;\n"
      "}\n";
  // emitted code relies on the hosted headers for size_t and uint8_t
  src = "#include <stddef.h>\n#include <stdint.h>\n" + src;
  auto m = measure_module("csum_mini", src, config);
  REQUIRE_MESSAGE(m.ok(), [&] {
    std::string all;
    for (const auto &d : m.diags.all()) all += d.message + "\n";
    return all;
  }());
  CHECK(m.row.lc_bytes > 0);
  CHECK(m.row.cc_bytes > m.row.lc_bytes);
}

TEST_CASE("measure_module: failing compile commands surface their output") {
  ToolchainConfig config;
  config.compile_cmd = "false {in} {out}";
  config.size_cmd = "size {in}";
  config.workdir = "/tmp/chkcc-bench-test";
  auto m = measure_module("broken", "int f(void) { return 0; }\n", config);
  CHECK(!m.ok());
  CHECK(m.diags[0].code == "E-BENCH-COMPILE");
}

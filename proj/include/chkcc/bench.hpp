#pragma once

#include "chkcc/diagnostics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace chkcc {

struct SizeRow {
  std::string module;
  long long lc_bytes = 0; // legacy code size
  long long cc_bytes = 0; // checked/instrumented code size
  int es_percent = 0;     // overhead percent
  std::string method;     // toolchain size query used, or "source-bytes"
};

struct SizeReport {
  std::vector<SizeRow> rows;
  SizeRow total; // LC/CC summed; ES computed from the sums

  void recompute_total();
};

// 100 * (CC - LC) / LC, rounded to nearest with ties away from zero.
// LC must be positive.
int compute_overhead(long long lc_bytes, long long cc_bytes);

struct ToolchainConfig {
  std::string compile_cmd; // `{in}` source, `{out}` object
  std::string size_cmd;    // `{in}` object; prints the text-section size
  std::string workdir;
  bool configured() const { return !compile_cmd.empty() && !size_cmd.empty(); }
};

struct ConfigResult {
  ToolchainConfig config;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// Line-oriented `key = value` file: compile_cmd, size_cmd, workdir.
ConfigResult parse_toolchain_config(std::string_view text);

struct MeasureResult {
  SizeRow row;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// LC = size of the stripped emission, CC = size of the instrumented
// emission; via the configured toolchain, or the source-bytes fallback
// (token-normalized byte length) when no toolchain is configured.
MeasureResult measure_module(const std::string &module_name,
                             const std::string &source,
                             const ToolchainConfig &config);

enum class ReportFormat { Table, Csv };

std::string render_report(const SizeReport &report, ReportFormat format);

struct ParseReportResult {
  SizeReport report;
  DiagList diags;
  bool ok() const { return !diags.has_errors(); }
};

// Parses either rendered format back into a report.
ParseReportResult parse_report(std::string_view text, ReportFormat format);

// Fixture input: CSV rows `module,lc_bytes,cc_bytes` (header optional).
ParseReportResult parse_fixture(std::string_view text);

} // namespace chkcc

#include "chkcc/bench.hpp"

#include "chkcc/emit.hpp"
#include "chkcc/instrument.hpp"
#include "chkcc/parser.hpp"
#include "chkcc/sema.hpp"
#include "chkcc/token.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chkcc {

int compute_overhead(long long lc_bytes, long long cc_bytes) {
  if (lc_bytes <= 0)
    throw std::invalid_argument("legacy size must be positive");
  long long diff = cc_bytes - lc_bytes;
  long long num = 200 * diff + (diff >= 0 ? lc_bytes : -lc_bytes);
  return (int)(num / (2 * lc_bytes));
}

void SizeReport::recompute_total() {
  total.module = "Total";
  total.lc_bytes = 0;
  total.cc_bytes = 0;
  for (const auto &r : rows) {
    total.lc_bytes += r.lc_bytes;
    total.cc_bytes += r.cc_bytes;
  }
  total.es_percent =
      total.lc_bytes > 0 ? compute_overhead(total.lc_bytes, total.cc_bytes) : 0;
}

namespace {

std::string trim(const std::string &s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool all_digits(const std::string &s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit((unsigned char)c)) return false;
  return true;
}

std::string substitute(const std::string &tmpl, const std::string &in,
                       const std::string &out) {
  std::string result;
  for (size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 4, "{in}") == 0) {
      result += in;
      i += 4;
    } else if (tmpl.compare(i, 5, "{out}") == 0) {
      result += out;
      i += 5;
    } else {
      result += tmpl[i++];
    }
  }
  return result;
}

struct CommandResult {
  int status = 0;
  std::string output;
};

CommandResult run_command(const std::string &cmd,
                          const std::filesystem::path &capture) {
  std::string full = cmd + " > " + capture.string() + " 2>&1";
  int status = std::system(full.c_str());
  CommandResult res;
  res.status = status;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  res.output = ss.str();
  return res;
}

// Scans command output for the first line whose first token is an integer
// (the Berkeley `size` layout: header line, then the numbers).
std::optional<long long> first_integer_line(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (all_digits(tok)) return std::stoll(tok);
  }
  return std::nullopt;
}

long long normalized_source_bytes(const std::string &code) {
  auto toks = tokenize(code);
  if (!toks.ok()) return (long long)code.size();
  long long total = 0;
  bool first = true;
  for (const auto &t : toks.tokens) {
    if (t.kind == TokenKind::Eof) break;
    if (!first) total += 1; // single separating space
    total += (long long)t.text.size();
    first = false;
  }
  return total;
}

} // namespace

ConfigResult parse_toolchain_config(std::string_view text) {
  ConfigResult res;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  size_t offset = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t line_offset = offset;
    offset += line.size() + 1;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos) {
      res.diags.error("E-CONFIG", "expected `key = value` on line " +
                                      std::to_string(lineno),
                      {line_offset, line_offset + line.size()});
      continue;
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key == "compile_cmd") res.config.compile_cmd = value;
    else if (key == "size_cmd") res.config.size_cmd = value;
    else if (key == "workdir") res.config.workdir = value;
    else
      res.diags.error("E-CONFIG", "unknown config key '" + key + "'",
                      {line_offset, line_offset + line.size()});
  }
  return res;
}

MeasureResult measure_module(const std::string &module_name,
                             const std::string &source,
                             const ToolchainConfig &config) {
  MeasureResult res;
  res.row.module = module_name;

  ParseResult parsed = parse_source(source, module_name);
  if (!parsed.ok()) {
    res.diags.append(parsed.diags);
    return res;
  }
  DiagList sema_diags = check_unit(parsed.unit);
  if (sema_diags.has_errors()) {
    res.diags.append(sema_diags);
    return res;
  }

  std::string legacy = emit_strip(parsed.unit);
  InstrumentResult instr = instrument_unit(parsed.unit);
  if (!instr.ok()) {
    res.diags.append(instr.diags);
    return res;
  }

  if (!config.configured()) {
    res.row.lc_bytes = normalized_source_bytes(legacy);
    res.row.cc_bytes = normalized_source_bytes(instr.code);
    res.row.method = "source-bytes";
    res.row.es_percent = compute_overhead(res.row.lc_bytes, res.row.cc_bytes);
    return res;
  }

  namespace fs = std::filesystem;
  fs::path work = config.workdir.empty()
                      ? fs::temp_directory_path() / "chkcc-bench"
                      : fs::path(config.workdir);
  fs::path scratch = work / module_name;
  std::error_code ec;
  fs::create_directories(scratch, ec);
  if (ec) {
    res.diags.error("E-BENCH-IO",
                    "cannot create scratch directory " + scratch.string(), {});
    return res;
  }

  auto measure_one = [&](const std::string &code, const std::string &stem,
                         long long &out_bytes) -> bool {
    fs::path src = scratch / (stem + ".c");
    fs::path obj = scratch / (stem + ".o");
    fs::path cap = scratch / (stem + ".log");
    std::ofstream(src) << code;

    CommandResult comp =
        run_command(substitute(config.compile_cmd, src.string(), obj.string()),
                    cap);
    if (comp.status != 0) {
      res.diags.error("E-BENCH-COMPILE",
                      "compile command failed for " + stem + ": " + comp.output,
                      {});
      return false;
    }
    CommandResult sz =
        run_command(substitute(config.size_cmd, obj.string(), obj.string()),
                    cap);
    if (sz.status != 0) {
      res.diags.error("E-BENCH-SIZE",
                      "size command failed for " + stem + ": " + sz.output, {});
      return false;
    }
    auto bytes = first_integer_line(sz.output);
    if (!bytes) {
      res.diags.error("E-BENCH-SIZE",
                      "missing text-section size in size command output: " +
                          sz.output,
                      {});
      return false;
    }
    out_bytes = *bytes;
    return true;
  };

  if (!measure_one(legacy, "legacy", res.row.lc_bytes)) return res;
  if (!measure_one(instr.code, "checked", res.row.cc_bytes)) return res;
  res.row.method = config.size_cmd;
  if (res.row.lc_bytes <= 0) {
    res.diags.error("E-BENCH-SIZE", "legacy size is zero for " + module_name,
                    {});
    return res;
  }
  res.row.es_percent = compute_overhead(res.row.lc_bytes, res.row.cc_bytes);
  return res;
}

std::string render_report(const SizeReport &report, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    std::string out = "module,lc_bytes,cc_bytes,es_percent,method\n";
    auto row = [&](const SizeRow &r) {
      out += r.module + "," + std::to_string(r.lc_bytes) + "," +
             std::to_string(r.cc_bytes) + "," + std::to_string(r.es_percent) +
             "," + r.method + "\n";
    };
    for (const auto &r : report.rows) row(r);
    row(report.total);
    return out;
  }

  std::vector<std::array<std::string, 4>> cells;
  cells.push_back({"Module", "LC (B)", "CC (B)", "ES (%)"});
  auto add = [&](const SizeRow &r) {
    cells.push_back({r.module, std::to_string(r.lc_bytes),
                     std::to_string(r.cc_bytes), std::to_string(r.es_percent)});
  };
  for (const auto &r : report.rows) add(r);
  add(report.total);

  size_t w[4] = {0, 0, 0, 0};
  for (const auto &row : cells)
    for (int i = 0; i < 4; ++i) w[i] = std::max(w[i], row[i].size());

  std::string out;
  for (size_t ri = 0; ri < cells.size(); ++ri) {
    const auto &row = cells[ri];
    // module column left-aligned, numbers right-aligned
    out += row[0];
    out.append(w[0] - row[0].size(), ' ');
    for (int i = 1; i < 4; ++i) {
      out += "  ";
      out.append(w[i] - row[i].size(), ' ');
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

ParseReportResult parse_report(std::string_view text, ReportFormat format) {
  ParseReportResult res;
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<SizeRow> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    SizeRow row;
    if (format == ReportFormat::Csv) {
      auto parts = split(t, ',');
      if (!header_seen && !parts.empty() && parts[0] == "module") {
        header_seen = true;
        continue;
      }
      if (parts.size() < 4) {
        res.diags.error("E-REPORT-PARSE", "malformed CSV row: " + t, {});
        return res;
      }
      row.module = parts[0];
      row.lc_bytes = std::stoll(parts[1]);
      row.cc_bytes = std::stoll(parts[2]);
      row.es_percent = (int)std::stol(parts[3]);
      if (parts.size() >= 5) row.method = parts[4];
    } else {
      std::istringstream ls(t);
      std::string module, lc, cc, es;
      if (!(ls >> module >> lc >> cc >> es)) {
        res.diags.error("E-REPORT-PARSE", "malformed table row: " + t, {});
        return res;
      }
      if (module == "Module") continue; // header
      row.module = module;
      row.lc_bytes = std::stoll(lc);
      row.cc_bytes = std::stoll(cc);
      row.es_percent = (int)std::stol(es);
    }
    rows.push_back(std::move(row));
  }
  for (auto &r : rows) {
    if (r.module == "Total") {
      res.report.total = r;
    } else {
      res.report.rows.push_back(r);
    }
  }
  return res;
}

ParseReportResult parse_fixture(std::string_view text) {
  ParseReportResult res;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto parts = split(t, ',');
    if (!parts.empty() && trim(parts[0]) == "module") continue;
    if (parts.size() < 3) {
      res.diags.error("E-FIXTURE-PARSE", "malformed fixture row: " + t, {});
      return res;
    }
    SizeRow row;
    row.module = trim(parts[0]);
    try {
      row.lc_bytes = std::stoll(trim(parts[1]));
      row.cc_bytes = std::stoll(trim(parts[2]));
    } catch (const std::exception &) {
      res.diags.error("E-FIXTURE-PARSE", "malformed fixture row: " + t, {});
      return res;
    }
    if (row.lc_bytes <= 0) {
      res.diags.error("E-FIXTURE-PARSE",
                      "legacy size must be positive: " + t, {});
      return res;
    }
    row.es_percent = compute_overhead(row.lc_bytes, row.cc_bytes);
    row.method = "fixture";
    res.report.rows.push_back(std::move(row));
  }
  res.report.recompute_total();
  res.report.total.method = "fixture";
  return res;
}

} // namespace chkcc

#include "chkcc/bench.hpp"
#include "chkcc/emit.hpp"
#include "chkcc/ifacegen.hpp"
#include "chkcc/instrument.hpp"
#include "chkcc/interp.hpp"
#include "chkcc/parser.hpp"
#include "chkcc/sema.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr const char *kVersion = "chkcc 0.1.0 (dialect 1)";

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitTrap = 2;
constexpr int kExitViolation = 3;
constexpr int kExitUsage = 64;

struct Source {
  std::string path;
  std::string text;
};

bool read_file(const std::string &path, std::string &out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::stringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool write_output(const std::string &out_path, const std::string &text) {
  if (out_path.empty()) {
    std::cout << text;
    return true;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "chkcc: cannot write " << out_path << "\n";
    return false;
  }
  out << text;
  return true;
}

void print_diags(const chkcc::DiagList &diags, const Source &src) {
  for (const auto &d : diags.all())
    std::cerr << chkcc::format_diagnostic(d, src.text, src.path) << "\n";
}

int load_and_parse(const std::string &path, Source &src,
                   chkcc::ParseResult &parsed) {
  if (!read_file(path, src.text)) {
    std::cerr << "chkcc: cannot read " << path << "\n";
    return kExitError;
  }
  src.path = path;
  parsed = chkcc::parse_source(src.text, path);
  if (!parsed.ok()) {
    print_diags(parsed.diags, src);
    return kExitError;
  }
  return kExitOk;
}

int checked_pipeline(const std::string &path, Source &src,
                     chkcc::ParseResult &parsed) {
  int rc = load_and_parse(path, src, parsed);
  if (rc != kExitOk) return rc;
  chkcc::DiagList diags = chkcc::check_unit(parsed.unit);
  print_diags(diags, src);
  if (diags.has_errors()) return kExitError;
  return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"source-to-source toolchain for the checked C subset"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string in_path, out_path, map_path, entry = "main", config_path,
              fixture_path;
  bool expand_checked = false, expand_legacy = false;
  std::string run_mode = "oracle", format = "table";
  long long fuel = 1000000;
  std::vector<long long> run_args;

  auto *check = app.add_subcommand("check", "validate checked-scope rules");
  check->add_option("input", in_path)->required();

  auto *strip = app.add_subcommand("strip", "emit legacy C");
  strip->add_option("input", in_path)->required();
  strip->add_option("--out", out_path);

  auto *macro = app.add_subcommand("macro", "emit macro-compat C");
  macro->add_option("input", in_path)->required();
  macro->add_option("--out", out_path);

  auto *genheader =
      app.add_subcommand("gen-header", "write the compat macro header");
  genheader->add_option("--out", out_path);

  auto *instrument =
      app.add_subcommand("instrument", "emit runtime-checked legacy C");
  instrument->add_option("input", in_path)->required();
  instrument->add_option("--out", out_path);
  instrument->add_option("--map", map_path,
                         "check-site map path (default <out>.sites)");

  auto *expand = app.add_subcommand("expand", "apply the compat macro layer");
  expand->add_option("input", in_path)->required();
  expand->add_flag("--checked", expand_checked);
  expand->add_flag("--legacy", expand_legacy);
  expand->add_option("--out", out_path);

  auto *stubs =
      app.add_subcommand("stubs", "generate bounds-safe interface stubs");
  stubs->add_option("input", in_path)->required();
  stubs->add_option("--out", out_path);

  auto *run = app.add_subcommand("run", "interpret a unit");
  run->add_option("input", in_path)->required();
  run->add_option("--mode", run_mode)->check(CLI::IsMember({"oracle", "literal"}));
  run->add_option("--entry", entry);
  run->add_option("--fuel", fuel);
  run->add_option("--arg", run_args);

  auto *bench = app.add_subcommand("bench", "measure executable-size overhead");
  bench->add_option("--config", config_path);
  bench->add_option("--fixture", fixture_path);
  bench->add_option("--format", format)->check(CLI::IsMember({"table", "csv"}));
  bench->add_option("--out", out_path);
  std::vector<std::string> module_paths;
  bench->add_option("modules", module_paths, "annotated module sources");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  Source src;
  chkcc::ParseResult parsed;

  if (check->parsed()) {
    return checked_pipeline(in_path, src, parsed);
  }

  if (strip->parsed()) {
    int rc = checked_pipeline(in_path, src, parsed);
    if (rc != kExitOk) return rc;
    return write_output(out_path, chkcc::emit_strip(parsed.unit)) ? kExitOk
                                                                  : kExitError;
  }

  if (macro->parsed()) {
    int rc = checked_pipeline(in_path, src, parsed);
    if (rc != kExitOk) return rc;
    return write_output(out_path, chkcc::emit_macro(parsed.unit)) ? kExitOk
                                                                  : kExitError;
  }

  if (genheader->parsed()) {
    return write_output(out_path, chkcc::gen_compat_header()) ? kExitOk
                                                              : kExitError;
  }

  if (instrument->parsed()) {
    int rc = checked_pipeline(in_path, src, parsed);
    if (rc != kExitOk) return rc;
    chkcc::InstrumentResult result = chkcc::instrument_unit(parsed.unit);
    if (!result.ok()) {
      print_diags(result.diags, src);
      return kExitError;
    }
    if (!write_output(out_path, result.code)) return kExitError;
    std::string sites = chkcc::format_site_map(result.sites, src.text);
    if (map_path.empty() && !out_path.empty()) map_path = out_path + ".sites";
    if (!map_path.empty()) {
      if (!write_output(map_path, sites)) return kExitError;
    }
    return kExitOk;
  }

  if (expand->parsed()) {
    if (expand_checked == expand_legacy) {
      std::cerr << "chkcc: expand requires exactly one of --checked/--legacy\n";
      return kExitUsage;
    }
    if (!read_file(in_path, src.text)) {
      std::cerr << "chkcc: cannot read " << in_path << "\n";
      return kExitError;
    }
    src.path = in_path;
    chkcc::ExpandResult result =
        chkcc::expand_macros(src.text, expand_checked);
    if (!result.ok()) {
      print_diags(result.diags, src);
      return kExitError;
    }
    return write_output(out_path, result.text) ? kExitOk : kExitError;
  }

  if (stubs->parsed()) {
    int rc = load_and_parse(in_path, src, parsed);
    if (rc != kExitOk) return rc;
    chkcc::StubResult result = chkcc::generate_stubs(parsed.unit);
    if (!result.ok()) {
      print_diags(result.diags, src);
      return kExitError;
    }
    if (!write_output(out_path, chkcc::render(result.unit, chkcc::Spelling::Macro)))
      return kExitError;
    std::string notes = chkcc::format_stub_notes(result.notes);
    std::string notes_path =
        (out_path.empty() ? in_path : out_path) + ".stubs.txt";
    std::ofstream(notes_path, std::ios::binary) << notes;
    return kExitOk;
  }

  if (run->parsed()) {
    chkcc::ExecOptions opts;
    opts.fuel = fuel;
    opts.args = run_args;
    if (run_mode == "oracle") {
      int rc = checked_pipeline(in_path, src, parsed);
      if (rc != kExitOk) return rc;
      opts.mode = chkcc::ExecMode::Oracle;
    } else {
      int rc = load_and_parse(in_path, src, parsed);
      if (rc != kExitOk) return rc;
      opts.mode = chkcc::ExecMode::Literal;
    }
    chkcc::ExecOutcome outcome = chkcc::execute(parsed.unit, entry, opts);
    for (long long v : outcome.print_log) std::cout << v << "\n";
    std::cout << outcome.summary() << "\n";
    switch (outcome.kind) {
    case chkcc::OutcomeKind::Normal: return kExitOk;
    case chkcc::OutcomeKind::Trap: return kExitTrap;
    case chkcc::OutcomeKind::Violation: return kExitViolation;
    case chkcc::OutcomeKind::Error: return kExitError;
    }
    return kExitError;
  }

  if (bench->parsed()) {
    chkcc::SizeReport report;
    if (!fixture_path.empty()) {
      std::string text;
      if (!read_file(fixture_path, text)) {
        std::cerr << "chkcc: cannot read " << fixture_path << "\n";
        return kExitError;
      }
      chkcc::ParseReportResult fixture = chkcc::parse_fixture(text);
      if (!fixture.ok()) {
        Source fsrc{fixture_path, text};
        print_diags(fixture.diags, fsrc);
        return kExitError;
      }
      report = fixture.report;
    } else {
      chkcc::ToolchainConfig config;
      if (!config_path.empty()) {
        std::string text;
        if (!read_file(config_path, text)) {
          std::cerr << "chkcc: cannot read " << config_path << "\n";
          return kExitError;
        }
        chkcc::ConfigResult cfg = chkcc::parse_toolchain_config(text);
        if (!cfg.ok()) {
          Source csrc{config_path, text};
          print_diags(cfg.diags, csrc);
          return kExitError;
        }
        config = cfg.config;
      }
      if (module_paths.empty()) {
        std::cerr << "chkcc: bench requires module sources or --fixture\n";
        return kExitUsage;
      }
      for (const auto &path : module_paths) {
        std::string text;
        if (!read_file(path, text)) {
          std::cerr << "chkcc: cannot read " << path << "\n";
          return kExitError;
        }
        std::string name = path;
        size_t slash = name.find_last_of('/');
        if (slash != std::string::npos) name = name.substr(slash + 1);
        size_t dot = name.find_last_of('.');
        if (dot != std::string::npos) name = name.substr(0, dot);
        chkcc::MeasureResult m = chkcc::measure_module(name, text, config);
        if (!m.ok()) {
          Source msrc{path, text};
          print_diags(m.diags, msrc);
          return kExitError;
        }
        report.rows.push_back(m.row);
      }
      report.recompute_total();
      if (!report.rows.empty()) report.total.method = report.rows[0].method;
    }
    chkcc::ReportFormat fmt =
        format == "csv" ? chkcc::ReportFormat::Csv : chkcc::ReportFormat::Table;
    return write_output(out_path, chkcc::render_report(report, fmt))
               ? kExitOk
               : kExitError;
  }

  return kExitUsage;
}

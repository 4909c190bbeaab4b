// qwalk-scan: band, invariant, symmetry and gap-taxonomy sweeps as CSV/JSON.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "qwalk/scan.hpp"

#ifndef QWALK_FIXTURE_DIR
#define QWALK_FIXTURE_DIR "fixtures"
#endif

namespace {

enum Exit { ok = 0, golden_mismatch = 1, usage = 2, numerical = 3 };

struct SweepFlags {
  std::string config;
  std::string protocol;
  std::vector<std::string> sets;
  std::string sweep;
  std::vector<int> steps;
  int grid = 0;
  int workers = 0;
  std::string out;
  bool step_independent = false;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& f)
{
  cmd->add_option("config", f.config, "fixture config (YAML)");
  cmd->add_option("--protocol", f.protocol, "protocol id");
  cmd->add_option("--set", f.sets, "angle=expression, repeatable");
  cmd->add_option("--sweep", f.sweep, "symbol:start:stop:count");
  cmd->add_option("--steps", f.steps, "step number(s) T")->delimiter(',');
  cmd->add_option("--grid", f.grid, "momentum points per axis");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--out", f.out, "output path (stdout if omitted)");
  cmd->add_flag("--step-independent", f.step_independent, "evaluate with bare-angle coins (T = 1 only)");
}

qwalk::SweepConfig build_config(const SweepFlags& f)
{
  qwalk::SweepConfig c;
  if (!f.config.empty()) c = qwalk::load_config(f.config);
  if (!f.protocol.empty()) c.protocol = f.protocol;
  for (const auto& s : f.sets) {
    auto [name, expr] = qwalk::parse_assignment(s);
    if (name == "phi")
      c.phi = expr;
    else
      c.angles[name] = expr;
  }
  if (!f.sweep.empty()) c.sweep = qwalk::parse_sweep(f.sweep);
  if (!f.steps.empty()) c.steps = f.steps;
  if (f.grid) c.grid = f.grid;
  if (f.workers) c.workers = f.workers;
  if (f.step_independent) c.step_independent = true;
  c.out = f.out;
  return c;
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw qwalk::UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Momentum-space sweeps of step-dependent quantum walks"};
  app.require_subcommand(1);

  SweepFlags bands_f, inv_f, gaps_f;
  auto* bands = app.add_subcommand("bands", "e_plus and group velocity on a momentum grid");
  add_sweep_flags(bands, bands_f);
  auto* inv = app.add_subcommand("invariant", "winding (1D) or Chern (2D) number along a sweep");
  add_sweep_flags(inv, inv_f);
  auto* gaps = app.add_subcommand("classify-gaps", "gap closings along a sweep and their boundary-state kind");
  add_sweep_flags(gaps, gaps_f);

  auto* sym = app.add_subcommand("symmetry", "PHS/TRS/CHS search and AZ class per protocol");
  std::vector<std::string> sym_ids;
  std::vector<std::string> sym_sets;
  int sym_T = qwalk::catalog_steps, sym_grid = qwalk::symmetry_grid, sym_workers = 1;
  std::string sym_out, golden_file = std::string(QWALK_FIXTURE_DIR) + "/table1.json";
  bool golden = false;
  sym->add_option("ids", sym_ids, "protocol ids or 'all'")->required();
  sym->add_option("--set", sym_sets, "angle=expression, repeatable");
  sym->add_option("--steps", sym_T, "step number T");
  sym->add_option("--grid", sym_grid, "momentum points per axis");
  sym->add_option("--workers", sym_workers, "worker threads");
  sym->add_option("--out", sym_out, "output path (stdout if omitted)");
  sym->add_flag("--golden", golden, "compare against the bundled symmetry table (fixtures/table1.json)");
  sym->add_option("--golden-file", golden_file, "golden table to compare against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*sym) {
      qwalk::SymmetryOptions o;
      o.ids = sym_ids;
      for (const auto& s : sym_sets) {
        auto [name, expr] = qwalk::parse_assignment(s);
        if (name == "phi")
          o.phi = expr;
        else
          o.angles[name] = expr;
      }
      o.T = sym_T;
      o.grid = sym_grid;
      o.workers = sym_workers;
      const std::string text = qwalk::cmd_symmetry(o);
      qwalk::write_artifacts({{"", text}}, sym_out, std::cout);
      if (golden) {
        const auto diffs = qwalk::golden_diff(text, read_file(golden_file));
        for (const auto& d : diffs) std::cerr << "golden mismatch: " << d << "\n";
        if (!diffs.empty()) return Exit::golden_mismatch;
      }
      return Exit::ok;
    }
    std::vector<qwalk::Artifact> arts;
    std::string out;
    if (*bands) {
      const auto c = build_config(bands_f);
      arts = qwalk::cmd_bands(c);
      out = c.out;
    } else if (*inv) {
      const auto c = build_config(inv_f);
      arts = qwalk::cmd_invariant(c);
      out = c.out;
    } else {
      const auto c = build_config(gaps_f);
      arts = qwalk::cmd_classify_gaps(c);
      out = c.out;
    }
    qwalk::write_artifacts(arts, out, std::cout);
    return Exit::ok;
  } catch (const qwalk::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return Exit::numerical;
  }
}

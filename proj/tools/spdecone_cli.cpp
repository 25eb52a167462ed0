// Command line front end: check / simulate / sweep / report.
#include <CLI11.hpp>
#include <iostream>

#include "spdecone/runner.hpp"

using namespace spdecone;

namespace {

struct CommonFlags {
  std::string app, config, out;
  std::vector<std::string> overrides;
  double seed = -1.0, paths = -1.0, dt = -1.0, horizon = -1.0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--app", f.app, "application name (" + [] {
    std::string s;
    for (const auto& n : application_names()) s += (s.empty() ? "" : "|") + n;
    return s;
  }() + ")");
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--seed", f.seed, "master seed for checker and simulator");
  cmd->add_option("--paths", f.paths, "Monte Carlo path count");
  cmd->add_option("--dt", f.dt, "time step");
  cmd->add_option("--horizon", f.horizon, "simulation horizon T");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--override", f.overrides, "application override key=value")
      ->take_all();
}

RunConfig assemble(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = load_run_config(f.config);
  if (!f.app.empty()) cfg.app.name = f.app;
  if (cfg.app.name.empty()) throw ConfigError("no application: pass --app or app.name");
  if (f.seed >= 0.0) {
    cfg.check.seed = static_cast<std::uint64_t>(f.seed);
    cfg.sim.seed = static_cast<std::uint64_t>(f.seed);
  }
  if (f.paths >= 0.0) cfg.sim.n_paths = static_cast<int>(f.paths);
  if (f.dt > 0.0) cfg.sim.dt = f.dt;
  if (f.horizon > 0.0) cfg.sim.horizon = f.horizon;
  if (!f.out.empty()) cfg.out_dir = f.out;
  for (const auto& ov : f.overrides) apply_override(cfg, ov);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Cone-invariance checker and Monte Carlo simulator for "
               "semilinear SPDE models"};
  cli.require_subcommand(1);

  CommonFlags fc, fs, fw;
  auto* check = cli.add_subcommand("check", "run the boundary-condition checker");
  add_common(check, fc);
  auto* simulate = cli.add_subcommand("simulate", "run Monte Carlo cone-exit statistics");
  add_common(simulate, fs);
  auto* sweep = cli.add_subcommand("sweep", "convergence and sensitivity sweeps");
  add_common(sweep, fw);
  std::string report_dir = ".";
  auto* report = cli.add_subcommand("report", "collate a run directory into summary.md");
  report->add_option("dir", report_dir, "run directory")->required();

  CLI11_PARSE(cli, argc, argv);

  try {
    if (check->parsed()) return cli_check(assemble(fc));
    if (simulate->parsed()) return cli_simulate(assemble(fs));
    if (sweep->parsed()) return cli_sweep(assemble(fw));
    if (report->parsed()) return cli_report(report_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

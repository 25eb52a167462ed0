#pragma once

#include <string>

#include "spdecone/apps.hpp"

namespace spdecone {

/// Everything a CLI run needs: the application to build, checker settings,
/// simulation settings and the output directory.
struct RunConfig {
  ApplicationSpec app;
  VerdictConfig check;
  SchemeConfig sim;
  std::string out_dir = ".";
};

/// Flat key = value file with dotted keys ('#' comments, blank lines
/// ignored). Unknown keys are a ConfigError with the line number.
RunConfig load_run_config(const std::string& path);
/// Apply one dotted key=value pair (the same grammar as the file).
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& context);
/// --override name=value: numeric values become application parameters,
/// anything else an application flag.
void apply_override(RunConfig& cfg, const std::string& key_eq_value);

/// Float formatting used by every emitted file: 17 significant digits.
std::string format_double(double x);

int cli_check(const RunConfig& cfg);     // report.txt, witnesses.csv
int cli_simulate(const RunConfig& cfg);  // paths.csv, summary.md
int cli_sweep(const RunConfig& cfg);     // sweep_lambda.csv, sweep_level.csv, sweep_pairs.csv
int cli_report(const std::string& run_dir);  // summary.md

}  // namespace spdecone

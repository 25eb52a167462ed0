#include "spdecone/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdecone/errors.hpp"

namespace fs = std::filesystem;

namespace spdecone {

namespace {

constexpr const char* kExitConvention =
    "exit_convention: a path counts as exited when its cone distance exceeds "
    "exit_tol * (1 + ||r||) at any recorded step";

double parse_number(const std::string& value, const std::string& context) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError(context + ": expected a number, got '" + value + "'");
  }
  if (pos != value.size())
    throw ConfigError(context + ": trailing characters after number '" + value + "'");
  return x;
}

bool looks_numeric(const std::string& value) {
  std::size_t pos = 0;
  try {
    (void)std::stod(value, &pos);
  } catch (const std::exception&) {
    return false;
  }
  return pos == value.size();
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::ofstream open_out(const fs::path& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);  // LF line endings everywhere
  if (!out) throw ConfigError("cannot write " + (dir / name).string());
  return out;
}

void write_condition_line(std::ostream& os, const ConditionReport& rep) {
  os << "check " << rep.name << ": " << to_string(rep.status)
     << " worst=" << format_double(rep.worst) << " checked=" << rep.n_checked;
  if (rep.witness_index >= 0 && !rep.witness_desc.empty())
    os << " witness=" << rep.witness_index << " (" << rep.witness_desc << ")";
  os << "\n";
}

void write_witness_rows(std::ostream& os, const ConditionReport& rep) {
  if (rep.witness_h.size() == 0) return;
  for (Eigen::Index i = 0; i < rep.witness_h.size(); ++i) {
    const double hs = i < rep.witness_h_star.size() ? rep.witness_h_star[i] : 0.0;
    os << rep.name << "," << i << "," << format_double(hs) << ","
       << format_double(rep.witness_h[i]) << "\n";
  }
}

const char* scheme_name(SchemeKind k) {
  switch (k) {
    case SchemeKind::ExponentialEuler: return "exponential";
    case SchemeKind::YosidaEuler: return "yosida";
    default: return "projected";
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& context) {
  if (key == "app.name") {
    cfg.app.name = value;
  } else if (key.rfind("app.param.", 0) == 0) {
    cfg.app.params[key.substr(10)] = parse_number(value, context);
  } else if (key.rfind("app.flag.", 0) == 0) {
    cfg.app.flags[key.substr(9)] = value;
  } else if (key == "check.pairs") {
    cfg.check.n_pairs = static_cast<int>(parse_number(value, context));
  } else if (key == "check.jump_samples") {
    cfg.check.n_jump_samples = static_cast<int>(parse_number(value, context));
  } else if (key == "check.local_pairs") {
    cfg.check.n_local_pairs = static_cast<int>(parse_number(value, context));
  } else if (key == "check.invariance_samples") {
    cfg.check.n_invariance_samples = static_cast<int>(parse_number(value, context));
  } else if (key == "check.seed") {
    cfg.check.seed = static_cast<std::uint64_t>(parse_number(value, context));
  } else if (key == "check.tol") {
    const double t = parse_number(value, context);
    if (!(t > 0.0)) throw ConfigError(context + ": check.tol must be positive");
    cfg.check.tol = t;
  } else if (key == "sim.scheme") {
    if (value == "exponential") cfg.sim.kind = SchemeKind::ExponentialEuler;
    else if (value == "yosida") cfg.sim.kind = SchemeKind::YosidaEuler;
    else if (value == "projected") cfg.sim.kind = SchemeKind::ProjectedYosidaEuler;
    else throw ConfigError(context + ": unknown scheme '" + value + "'");
  } else if (key == "sim.dt") {
    cfg.sim.dt = parse_number(value, context);
  } else if (key == "sim.horizon") {
    cfg.sim.horizon = parse_number(value, context);
  } else if (key == "sim.lambda") {
    cfg.sim.lambda = parse_number(value, context);
  } else if (key == "sim.level") {
    cfg.sim.level = static_cast<int>(parse_number(value, context));
  } else if (key == "sim.seed") {
    cfg.sim.seed = static_cast<std::uint64_t>(parse_number(value, context));
  } else if (key == "sim.paths") {
    cfg.sim.n_paths = static_cast<int>(parse_number(value, context));
  } else if (key == "sim.exit_tol") {
    const double t = parse_number(value, context);
    if (!(t > 0.0)) throw ConfigError(context + ": sim.exit_tol must be positive");
    cfg.sim.exit_tol = t;
  } else if (key == "out.dir") {
    cfg.out_dir = value;
  } else {
    throw ConfigError(context + ": unknown key '" + key + "'");
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    const std::string context = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(context + ": expected key = value");
    apply_config_entry(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), context);
  }
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& key_eq_value) {
  const auto eq = key_eq_value.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--override expects key=value, got '" + key_eq_value + "'");
  const std::string key = trim(key_eq_value.substr(0, eq));
  const std::string value = trim(key_eq_value.substr(eq + 1));
  if (key.empty()) throw ConfigError("--override has an empty key");
  if (looks_numeric(value))
    cfg.app.params[key] = parse_number(value, "--override " + key);
  else
    cfg.app.flags[key] = value;
}

int cli_check(const RunConfig& cfg) {
  const Application app = build_application(cfg.app);
  const VerdictBundle v = verdict(*app.sg, *app.cone, app.coeffs, cfg.check);

  const fs::path dir(cfg.out_dir);
  {
    std::ofstream out = open_out(dir, "report.txt");
    out << "tool: spdecone check\n";
    out << "application: " << app.name << "\n";
    out << "overall: " << to_string(v.overall) << "\n";
    out << kExitConvention << "\n";
    out << "seed: " << v.seed << "\n";
    out << "pairs: " << v.n_pairs << "\n";
    out << "growth_estimate: " << format_double(v.growth_estimate) << "\n";
    out << "invariance_pass: " << (v.invariance.pass ? "true" : "false") << "\n";
    out << "invariance_max_semigroup_distance: "
        << format_double(v.invariance.max_semigroup_distance) << "\n";
    out << "invariance_max_resolvent_distance: "
        << format_double(v.invariance.max_resolvent_distance) << "\n";
    const char* local = v.local.verdict == LocalVerdict::LOCAL        ? "LOCAL"
                        : v.local.verdict == LocalVerdict::NOT_LOCAL ? "NOT_LOCAL"
                                                                     : "INCONCLUSIVE";
    out << "local_verdict: " << local << "\n";
    out << "local_counts: vanishing=" << v.local.n_vanishing
        << " bounded=" << v.local.n_bounded << " divergent=" << v.local.n_divergent << "\n";
    write_condition_line(out, v.jump);
    write_condition_line(out, v.volatility);
    write_condition_line(out, v.drift);
    write_condition_line(out, v.drift_liminf);
  }
  {
    std::ofstream out = open_out(dir, "witnesses.csv");
    out << "check,node,h_star,h\n";
    write_witness_rows(out, v.jump);
    write_witness_rows(out, v.volatility);
    write_witness_rows(out, v.drift);
    write_witness_rows(out, v.drift_liminf);
  }
  switch (v.overall) {
    case Overall::SUFFICIENT_PASS: return 0;
    case Overall::NECESSARY_FAIL: return 2;
    default: return 3;
  }
}

int cli_simulate(const RunConfig& cfg) {
  const Application app = build_application(cfg.app);
  const Model model = app.model();
  const SchemeConfig& sim = cfg.sim;
  if (sim.n_paths < 1) throw ConfigError("sim.paths must be at least 1");

  Eigen::MatrixXd a_lambda;
  const bool yosida = sim.kind != SchemeKind::ExponentialEuler;
  if (yosida) {
    if (!(sim.lambda > model.sg->growth_hint()))
      throw ConfigError("sim.lambda must exceed the semigroup growth bound");
    a_lambda = model.sg->yosida_matrix(sim.lambda);
  }

  struct Row {
    int path;
    double max_dist = 0.0, first_exit = -1.0, min_node = 0.0, terminal_norm = 0.0;
    int blowup = 0;
  };
  std::vector<Row> rows;
  int n_exit = 0, n_blowup = 0;
  std::vector<double> max_dists;
  for (int p = 0; p < sim.n_paths; ++p) {
    Row row;
    row.path = p;
    Rng rng = Rng::stream(sim.seed, static_cast<std::uint64_t>(p));
    try {
      const PathResult pr = yosida ? simulate_yosida_path(model, sim, rng, app.cone.get())
                                   : simulate_path(model, sim, rng, app.cone.get());
      for (double d : pr.cone_dist) row.max_dist = std::max(row.max_dist, d);
      row.first_exit = pr.first_exit;
      row.min_node = *std::min_element(pr.min_node.begin(), pr.min_node.end());
      row.terminal_norm = norm(*model.space, pr.terminal);
      if (pr.first_exit >= 0.0) ++n_exit;
      max_dists.push_back(row.max_dist);
    } catch (const BlowUp&) {
      row.blowup = 1;
      ++n_blowup;
      ++n_exit;  // a blown-up path certainly left the cone's working range
    }
    rows.push_back(row);
  }

  const fs::path dir(cfg.out_dir);
  {
    std::ofstream out = open_out(dir, "paths.csv");
    out << "path,max_cone_dist,first_exit,min_node,terminal_norm,blowup\n";
    for (const Row& r : rows)
      out << r.path << "," << format_double(r.max_dist) << "," << format_double(r.first_exit)
          << "," << format_double(r.min_node) << "," << format_double(r.terminal_norm) << ","
          << r.blowup << "\n";
  }
  {
    std::sort(max_dists.begin(), max_dists.end());
    auto quant = [&](double q) {
      if (max_dists.empty()) return 0.0;
      return max_dists[static_cast<std::size_t>(q * (max_dists.size() - 1))];
    };
    std::ofstream out = open_out(dir, "summary.md");
    out << "# simulation summary\n\n";
    out << "- application: " << app.name << "\n";
    out << "- scheme: " << scheme_name(sim.kind) << "\n";
    out << "- paths: " << sim.n_paths << "\n";
    out << "- seed: " << sim.seed << "\n";
    out << "- dt: " << format_double(sim.dt) << "\n";
    out << "- horizon: " << format_double(sim.horizon) << "\n";
    out << "- " << kExitConvention << "\n";
    out << "- exit_fraction: "
        << format_double(static_cast<double>(n_exit) / sim.n_paths) << "\n";
    out << "- blowups: " << n_blowup << "\n";
    out << "- max_cone_dist quantiles: q50=" << format_double(quant(0.5))
        << " q90=" << format_double(quant(0.9)) << " max=" << format_double(quant(1.0))
        << "\n";
  }
  return 0;
}

int cli_sweep(const RunConfig& cfg) {
  const Application app = build_application(cfg.app);
  const Model model = app.model();
  const fs::path dir(cfg.out_dir);
  SchemeConfig base = cfg.sim;
  base.n_paths = std::min(base.n_paths, 50);
  const int n_paths = base.n_paths;
  const double lo = std::max(0.0, model.sg->growth_hint());

  {
    const std::vector<double> lambdas = {lo + 10.0, lo + 40.0, lo + 160.0};
    const auto table = yosida_convergence_study(model, *app.cone, base, lambdas, n_paths);
    std::ofstream out = open_out(dir, "sweep_lambda.csv");
    out << "lambda,mean_sup_gap\n";
    for (const StudyRow& r : table)
      out << format_double(r.param) << "," << format_double(r.mean_gap) << "\n";
  }
  {
    std::ofstream out = open_out(dir, "sweep_level.csv");
    out << "level,mean_sup_gap\n";
    try {
      const auto table = projection_convergence_study(model, *app.cone, base, lo + 40.0,
                                                      {2, 3, 4, 5, 6}, n_paths);
      for (const StudyRow& r : table)
        out << format_double(r.param) << "," << format_double(r.mean_gap) << "\n";
    } catch (const UnsupportedCone&) {
      // Cones without an averaging projection get the header only.
    }
  }
  {
    std::ofstream out = open_out(dir, "sweep_pairs.csv");
    out << "pairs,overall,drift_worst,volatility_worst\n";
    for (int count : {10, 100, 1000}) {
      VerdictConfig vc = cfg.check;
      vc.n_pairs = count;
      const VerdictBundle v = verdict(*app.sg, *app.cone, app.coeffs, vc);
      out << count << "," << to_string(v.overall) << "," << format_double(v.drift.worst)
          << "," << format_double(v.volatility.worst) << "\n";
    }
  }
  return 0;
}

int cli_report(const std::string& run_dir) {
  const fs::path dir(run_dir);
  const bool has_report = fs::exists(dir / "report.txt");
  const bool has_paths = fs::exists(dir / "paths.csv");
  const bool has_lambda = fs::exists(dir / "sweep_lambda.csv");
  const bool has_level = fs::exists(dir / "sweep_level.csv");
  const bool has_pairs = fs::exists(dir / "sweep_pairs.csv");
  if (!has_report && !has_paths && !has_lambda && !has_level && !has_pairs)
    throw ConfigError("no run outputs found in '" + run_dir + "'");

  auto slurp = [&](const char* name) {
    std::ifstream in(dir / name, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  std::ofstream out = open_out(dir, "summary.md");
  out << "# run summary\n";
  if (has_report) out << "\n## checker\n\n```\n" << slurp("report.txt") << "```\n";
  if (has_paths) {
    // Recompute the headline statistics from the per-path table so the
    // summary stays a pure function of the CSV outputs.
    std::istringstream in(slurp("paths.csv"));
    std::string line;
    std::getline(in, line);  // header
    int n = 0, n_exit = 0, n_blowup = 0;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      std::istringstream row(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(row, cell, ',')) cells.push_back(cell);
      if (cells.size() < 6) throw ConfigError("paths.csv: malformed row");
      ++n;
      if (parse_number(cells[2], "paths.csv first_exit") >= 0.0) ++n_exit;
      if (parse_number(cells[5], "paths.csv blowup") != 0.0) {
        ++n_blowup;
        ++n_exit;
      }
    }
    out << "\n## simulation\n\n";
    out << "- paths: " << n << "\n";
    out << "- exit_fraction: "
        << format_double(n > 0 ? static_cast<double>(n_exit) / n : 0.0) << "\n";
    out << "- blowups: " << n_blowup << "\n";
  }
  for (const char* name : {"sweep_lambda.csv", "sweep_level.csv", "sweep_pairs.csv"})
    if (fs::exists(dir / name))
      out << "\n## " << name << "\n\n```\n" << slurp(name) << "```\n";
  return 0;
}

}  // namespace spdecone

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spdecone/runner.hpp"

using namespace spdecone;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("spdecone_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("every gallery application builds and respects its own cone") {
  for (const auto& name : application_names()) {
    CAPTURE(name);
    ApplicationSpec spec;
    spec.name = name;
    Application app = build_application(spec);
    CHECK(app.space->dim() > 0);
    CHECK(app.h0.size() == app.space->dim());
    CHECK(cone_contains(*app.cone, app.h0, 1e-8));
    // orthonormal noise basis
    for (int j = 0; j < app.qw.size(); ++j)
      CHECK(std::abs(inner_product(*app.space, app.qw.basis[j], app.qw.basis[j]) - 1.0) <=
            1e-8);
    auto inv = semigroup_cone_invariance_check(*app.sg, *app.cone, 8, {0.05, 0.25},
                                               {app.sg->growth_hint() + 2.0});
    CHECK(inv.pass);
  }
  ApplicationSpec bad;
  bad.name = "unknown_app";
  CHECK_THROWS_AS((void)build_application(bad), InvalidParameter);
}

TEST_CASE("gallery verdicts match the constructions") {
  SUBCASE("futures-curve model passes outright") {
    ApplicationSpec spec;
    spec.name = "energy";
    Application app = build_application(spec);
    auto b = verdict(*app.sg, *app.cone, app.coeffs);
    CHECK(b.overall == Overall::SUFFICIENT_PASS);
  }
  SUBCASE("multiplicative heat noise stays inside the cone in simulation") {
    ApplicationSpec spec;
    spec.name = "heat_anderson";
    Application app = build_application(spec);
    SchemeConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 1.0;
    cfg.n_paths = 50;
    auto rep = mc_invariance(app.model(), *app.cone, cfg);
    CHECK(rep.exit_fraction <= 0.01);
  }
  SUBCASE("additive heat noise is flagged as a hard failure") {
    ApplicationSpec spec;
    spec.name = "heat_anderson";
    spec.flags["sigma"] = "additive";
    Application app = build_application(spec);
    auto b = verdict(*app.sg, *app.cone, app.coeffs);
    CHECK(b.overall == Overall::NECESSARY_FAIL);
    CHECK(b.volatility.status == CheckStatus::FAIL);
  }
  SUBCASE("per-tranche additive noise breaks the ordering pairings") {
    ApplicationSpec spec;
    spec.name = "cdo";
    spec.flags["sigma"] = "tranche_additive";
    Application app = build_application(spec);
    auto b = verdict(*app.sg, *app.cone, app.coeffs);
    CHECK(b.volatility.status == CheckStatus::FAIL);
    CHECK(b.volatility.witness_index >= 0);
    CHECK(b.overall != Overall::SUFFICIENT_PASS);
  }
}

TEST_CASE("config files parse with line-level errors") {
  fs::path dir = fresh_dir("config");
  SUBCASE("well-formed file") {
    fs::path cfg = dir / "run.cfg";
    {
      std::ofstream out(cfg);
      out << "# comment line\n"
          << "app.name = energy\n"
          << "app.param.factors = 4\n"
          << "app.flag.sigma = multiplicative\n"
          << "check.pairs = 25\n"
          << "check.tol = 1e-7\n"
          << "sim.scheme = yosida\n"
          << "sim.dt = 0.002\n"
          << "sim.paths = 17\n"
          << "out.dir = runs/demo\n";
    }
    RunConfig rc = load_run_config(cfg.string());
    CHECK(rc.app.name == "energy");
    CHECK(rc.app.param("factors", 0) == 4.0);
    CHECK(rc.app.flag("sigma", "") == "multiplicative");
    CHECK(rc.check.n_pairs == 25);
    CHECK(rc.check.tol == 1e-7);
    CHECK(rc.sim.kind == SchemeKind::YosidaEuler);
    CHECK(rc.sim.dt == 0.002);
    CHECK(rc.sim.n_paths == 17);
    CHECK(rc.out_dir == "runs/demo");
  }
  SUBCASE("unknown key points at the offending line") {
    fs::path cfg = dir / "bad.cfg";
    {
      std::ofstream out(cfg);
      out << "app.name = energy\n"
          << "check.bogus = 1\n";
    }
    try {
      (void)load_run_config(cfg.string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("2") != std::string::npos);
      CHECK(msg.find("bogus") != std::string::npos);
    }
  }
  SUBCASE("missing file names the path") {
    try {
      (void)load_run_config((dir / "nope.cfg").string());
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("nope.cfg") != std::string::npos);
    }
  }
  SUBCASE("overrides split into numeric parameters and textual flags") {
    RunConfig rc;
    rc.app.name = "heat_anderson";
    apply_override(rc, "conductivity=0.01");
    apply_override(rc, "sigma=additive");
    CHECK(rc.app.param("conductivity", 0) == 0.01);
    CHECK(rc.app.flag("sigma", "") == "additive");
    CHECK_THROWS_AS(apply_override(rc, "no_equals_sign"), ConfigError);
  }
}

TEST_CASE("checker CLI writes reports and maps verdicts to exit codes") {
  fs::path dir = fresh_dir("check");
  RunConfig rc;
  rc.app.name = "energy";
  rc.out_dir = dir.string();
  CHECK(cli_check(rc) == 0);
  const std::string report = slurp(dir / "report.txt");
  CHECK(report.find("SUFFICIENT-PASS") != std::string::npos);
  CHECK(report.find("exit_convention") != std::string::npos);
  CHECK(fs::exists(dir / "witnesses.csv"));

  RunConfig bad = rc;
  bad.app.flags["sigma"] = "additive";
  bad.app.name = "heat_anderson";
  fs::path dir2 = fresh_dir("check_fail");
  bad.out_dir = dir2.string();
  CHECK(cli_check(bad) == 2);
  CHECK(slurp(dir2 / "report.txt").find("NECESSARY-FAIL") != std::string::npos);
  // the failing pair is serialized for replay
  CHECK(slurp(dir2 / "witnesses.csv").find("volatility") != std::string::npos);
}

TEST_CASE("simulation CLI reports exit statistics") {
  fs::path dir = fresh_dir("sim");
  RunConfig rc;
  rc.app.name = "cable";
  rc.sim.n_paths = 10;
  rc.sim.dt = 1e-2;
  rc.sim.horizon = 0.5;
  rc.out_dir = dir.string();
  CHECK(cli_simulate(rc) == 0);
  const std::string summary = slurp(dir / "summary.md");
  CHECK(summary.find("exit_fraction") != std::string::npos);
  CHECK(fs::exists(dir / "paths.csv"));

  // matched seeds give identical bytes
  fs::path dir2 = fresh_dir("sim2");
  rc.out_dir = dir2.string();
  CHECK(cli_simulate(rc) == 0);
  CHECK(slurp(dir / "paths.csv") == slurp(dir2 / "paths.csv"));
}

TEST_CASE("report CLI collates a run directory and is idempotent") {
  fs::path dir = fresh_dir("report");
  RunConfig rc;
  rc.app.name = "energy";
  rc.out_dir = dir.string();
  REQUIRE(cli_check(rc) == 0);
  CHECK(cli_report(dir.string()) == 0);
  const std::string first = slurp(dir / "summary.md");
  CHECK(first.find("SUFFICIENT-PASS") != std::string::npos);
  CHECK(cli_report(dir.string()) == 0);
  CHECK(slurp(dir / "summary.md") == first);

  // an empty directory is a config error (exit 1 at the CLI boundary)
  fs::path empty = fresh_dir("report_empty");
  CHECK_THROWS_AS((void)cli_report(empty.string()), ConfigError);
}

TEST_CASE("seventeen-digit float formatting round-trips") {
  for (double x : {1.0 / 3.0, 0.1, 123456.789, 1e-300, 0.0}) {
    const std::string s = format_double(x);
    CHECK(std::stod(s) == x);
  }
}

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hblab/experiment.hpp"

using namespace hblab;

namespace {

ExperimentConfig quadratic_cfg() {
  ExperimentConfig cfg;
  cfg.objective = ObjectiveSpec::quadratic({1.0, 9.0});
  cfg.x0 = {1.0, 1.0};
  cfg.stopping.f_tol = 1e-26;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path fresh_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("hblab_test_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("auto hyperparameters resolve to the optimum on the quadratic") {
  ExperimentResult res = run_experiment(quadratic_cfg());
  CHECK(*res.report.gamma == 0.25);
  CHECK(*res.report.beta == Catch::Approx(0.25).margin(1e-15));
  CHECK(res.report.mu_eff == 1.0);
  CHECK(res.report.L_eff == 9.0);
  CHECK(res.report.theory_rate == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(res.report.dist_fit.has_value());
  CHECK(res.report.dist_fit->rate == Catch::Approx(0.5).margin(0.02));
  CHECK(res.report.verdict == "pass");
  CHECK(res.report.exit_code == 0);
  REQUIRE(res.report.fgap_fit.has_value());
  CHECK(res.report.fgap_fit->rate == Catch::Approx(0.25).margin(0.02));
}

TEST_CASE("explicit gd matches its comparison rate") {
  ExperimentConfig cfg = quadratic_cfg();
  cfg.method = Method::gd;
  cfg.auto_params = false;
  cfg.gamma = 0.2;
  ExperimentResult res = run_experiment(cfg);
  CHECK(res.report.theory_rate == Catch::Approx(0.8).margin(1e-12));
  REQUIRE(res.report.dist_fit.has_value());
  CHECK(res.report.dist_fit->rate == Catch::Approx(0.8).margin(0.02));
  CHECK(res.report.verdict == "pass");
}

TEST_CASE("ode experiment fits the exponent and its f-gap double") {
  ExperimentConfig cfg = quadratic_cfg();
  cfg.method = Method::hb_ode;
  ExperimentResult res = run_experiment(cfg);  // auto alpha = 2
  CHECK(*res.report.alpha == 2.0);
  REQUIRE(res.report.dist_fit.has_value());
  CHECK(res.report.dist_fit->rate == Catch::Approx(1.0).margin(0.05));
  REQUIRE(res.report.fgap_fit.has_value());
  CHECK(res.report.fgap_fit->rate == Catch::Approx(2.0).margin(0.1));
  CHECK(res.report.verdict == "pass");
}

TEST_CASE("divergent configurations exit with the divergent verdict") {
  ExperimentConfig cfg = quadratic_cfg();
  cfg.auto_params = false;
  cfg.gamma = 0.40;
  cfg.beta = 0.25;
  ExperimentResult res = run_experiment(cfg);
  CHECK(res.report.verdict == "divergent");
  CHECK(res.report.exit_code == 2);
}

TEST_CASE("auto on sine_valley goes through the pilot") {
  ExperimentConfig cfg;
  cfg.objective = ObjectiveSpec::sine_valley(1.0, 9.0);
  cfg.x0 = {1.05, 0.1, 1.6207963267948966};
  cfg.stopping.f_tol = 1e-24;
  cfg.estimator.eps = 0.05;
  ExperimentResult res = run_experiment(cfg);
  CHECK(res.report.mu_eff == Catch::Approx(1.0).epsilon(0.01));
  CHECK(res.report.L_eff == Catch::Approx(9.0).epsilon(0.01));
  REQUIRE(res.report.dist_fit.has_value());
  CHECK(res.report.dist_fit->rate == Catch::Approx(0.5).margin(0.05));
  CHECK(res.report.verdict == "pass");
}

TEST_CASE("sweep runs every grid point and flags unstable ones") {
  SweepSpec sweep;
  sweep.base = quadratic_cfg();
  sweep.base.stopping.f_tol = 1e-26;
  sweep.gammas = {0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45};
  sweep.betas = {0.25};
  sweep.parallelism = 2;
  auto results = run_sweep(sweep);
  REQUIRE(results.size() == 9);
  for (const auto& r : results) {
    double g = *r.report.gamma;
    if (g >= 2.0 * 1.25 / 9.0) {
      CHECK(r.report.verdict == "divergent");
    } else {
      REQUIRE(r.report.dist_fit.has_value());
      double theory = m_discrete(g, 0.25, 1.0, 9.0);
      CHECK(r.report.dist_fit->rate == Catch::Approx(theory).margin(0.02));
    }
  }
}

TEST_CASE("identical config and seed give byte-identical outputs across worker counts") {
  SweepSpec sweep;
  sweep.base = quadratic_cfg();
  sweep.base.stopping.f_tol = 1e-26;
  sweep.gammas = {0.05, 0.15, 0.25, 0.35};
  sweep.betas = {0.1, 0.25};

  auto d1 = fresh_dir("sweep1");
  auto d2 = fresh_dir("sweep2");
  sweep.parallelism = 1;
  write_sweep_outputs(run_sweep(sweep), d1.string());
  sweep.parallelism = 4;
  write_sweep_outputs(run_sweep(sweep), d2.string());
  std::string a = slurp(d1 / "sweep_report.csv");
  std::string b = slurp(d2 / "sweep_report.csv");
  CHECK(a == b);
  CHECK(a.find("divergent") != std::string::npos);

  auto r1 = fresh_dir("run1");
  auto r2 = fresh_dir("run2");
  write_run_outputs(run_experiment(quadratic_cfg()), r1.string());
  write_run_outputs(run_experiment(quadratic_cfg()), r2.string());
  CHECK(slurp(r1 / "trajectory.csv") == slurp(r2 / "trajectory.csv"));
  CHECK(slurp(r1 / "report.csv") == slurp(r2 / "report.csv"));
  CHECK_FALSE(slurp(r1 / "trajectory.csv").empty());
}

TEST_CASE("report csv echoes the resolved hyperparameters") {
  auto dir = fresh_dir("echo");
  ExperimentResult res = run_experiment(quadratic_cfg());
  write_run_outputs(res, dir.string());
  std::string csv = slurp(dir / "report.csv");
  CHECK(csv.find("0.25") != std::string::npos);          // resolved gamma
  CHECK(csv.find("quadratic") != std::string::npos);
  CHECK(csv.find("tolerance") != std::string::npos);
  CHECK(csv.find("pass") != std::string::npos);
  std::string header = csv.substr(0, csv.find('\n'));
  for (const char* col : {"gamma", "beta", "alpha", "seed", "theory_rate", "fitted_rate",
                          "prefactor_degree", "r_squared", "window_lo", "window_hi", "verdict"})
    CHECK(header.find(col) != std::string::npos);
}

TEST_CASE("rates table carries the exact closed-form values") {
  std::string csv = rates_table({1.0}, {9.0}, true);
  // m_cont = 1, m_disc = 0.5, gd_rate = 0.8 at 17 significant digits
  CHECK(csv.find(",1,") != std::string::npos);
  CHECK(csv.find("0.5") != std::string::npos);
  CHECK(csv.find(fmt17(0.8)) != std::string::npos);
  std::string txt = rates_table({1.0, 1.0}, {9.0, 100.0}, false);
  CHECK(txt.find("alpha_star") != std::string::npos);
  CHECK_THROWS_AS(rates_table({1.0}, {9.0, 100.0}, true), std::invalid_argument);
}

TEST_CASE("probe driver emits one report per radius") {
  ProbeSpec probe;
  probe.base.objective = ObjectiveSpec::circle();
  probe.base.x0 = {1.2, 0.0};
  probe.base.seed = 4;
  probe.kind = Region::Kind::annulus;
  probe.radii = {0.2, 0.1, 0.05};
  probe.samples = 5000;
  auto reports = run_probe(probe);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].pl < reports[2].pl);

  auto dir = fresh_dir("probe");
  write_probe_csv((dir / "probe.csv").string(), "circle", probe.base.seed, reports);
  std::string csv = slurp(dir / "probe.csv");
  CHECK(csv.find("annulus") != std::string::npos);
  CHECK(csv.find("kernel_dim") != std::string::npos);
}

#include <catch2/catch_amalgamated.hpp>

#include "hblab/config.hpp"

using namespace hblab;

namespace {
const char* kMinimal = R"(
[objective]
kind = quadratic
eigenvalues = 1, 9

[init]
x0 = 1, 1
)";
}

TEST_CASE("minimal config parses with defaults") {
  ExperimentConfig cfg = parse_config(kMinimal);
  CHECK(cfg.objective.kind == ObjectiveKind::quadratic);
  CHECK(cfg.objective.dim == 2);
  CHECK(cfg.method == Method::hb_discrete);
  CHECK(cfg.auto_params);
  CHECK(cfg.x0 == Vec{1.0, 1.0});
  CHECK_FALSE(cfg.x1.has_value());
  CHECK(cfg.stopping.f_tol == 1e-14);
  CHECK(cfg.stopping.max_iters == 200000);
  CHECK(cfg.stopping.blow_up_bound == 1e8);
  CHECK(cfg.estimator.window_lo == 1e-11);
  CHECK(cfg.estimator.window_hi == 1e-4);
  CHECK(cfg.estimator.allow_prefactor);
  CHECK(cfg.seed == 0);
}

TEST_CASE("full config round trip") {
  ExperimentConfig cfg = parse_config(R"(
# comment
[objective]
kind = sine_valley
mu_t = 1.0
L_t = 9.0

[method]
type = hb_discrete
gamma = 0.2
beta = 0.3

[init]
x0 = 1.05, 0.1, 1.62
x1 = 1.0, 0.0, 1.57

[stopping]
f_tol = 1e-20
max_iters = 50000
blow_up_bound = 1e6

[estimator]
window_lo = 1e-9
window_hi = 1e-3
allow_prefactor = false
eps = 0.05

[output]
dir = /tmp/hblab-test
format = txt

[run]
seed = 99
)");
  CHECK(cfg.objective.kind == ObjectiveKind::sine_valley);
  CHECK_FALSE(cfg.auto_params);
  CHECK(*cfg.gamma == 0.2);
  CHECK(*cfg.beta == 0.3);
  REQUIRE(cfg.x1.has_value());
  CHECK((*cfg.x1)[2] == 1.57);
  CHECK(cfg.stopping.f_tol == 1e-20);
  CHECK(cfg.estimator.eps == 0.05);
  CHECK_FALSE(cfg.estimator.allow_prefactor);
  CHECK(cfg.out_dir == "/tmp/hblab-test");
  CHECK(cfg.format == "txt");
  CHECK(cfg.seed == 99);
}

TEST_CASE("beta outside [0,1) is rejected with the range and line") {
  try {
    parse_config(R"(
[objective]
kind = quadratic
eigenvalues = 1, 9

[method]
beta = 1.2
gamma = 0.1

[init]
x0 = 1, 1
)");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("[0, 1)") != std::string::npos);
    CHECK(e.line == 7);
  }
}

TEST_CASE("errors carry line numbers") {
  // unknown key
  try {
    parse_config("[objective]\nkind = quadratic\neigenvalues = 1, 9\nwat = 3\n\n[init]\nx0 = 1, 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 4);
    CHECK(std::string(e.what()).find("wat") != std::string::npos);
  }
  // malformed number
  CHECK_THROWS_AS(parse_config("[objective]\nkind = quadratic\neigenvalues = 1, nope\n[init]\nx0 = 1, 1\n"),
                  ConfigError);
  // dimension mismatch
  try {
    parse_config("[objective]\nkind = quadratic\neigenvalues = 1, 9\n\n[init]\nx0 = 1, 1, 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line == 6);
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }
  // key outside a section
  CHECK_THROWS_AS(parse_config("kind = quadratic\n"), ConfigError);
  // unknown section
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "\n[nonsense]\nx = 1\n"), ConfigError);
  // missing required pieces
  CHECK_THROWS_AS(parse_config("[objective]\nkind = quadratic\neigenvalues = 1, 9\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[init]\nx0 = 1, 1\n"), ConfigError);
  // explicit method without parameters
  CHECK_THROWS_AS(parse_config(std::string(kMinimal) + "\n[method]\nhyperparams = explicit\n"),
                  ConfigError);
  // duplicate key
  CHECK_THROWS_AS(parse_config("[objective]\nkind = quadratic\nkind = circle\n"), ConfigError);
}

TEST_CASE("sweep section") {
  SweepSpec sweep = parse_sweep(std::string(kMinimal) + R"(
[sweep]
gamma = 0.05, 0.1, 0.15
beta = 0.25
parallelism = 4
)");
  CHECK(sweep.gammas.size() == 3);
  CHECK(sweep.betas.size() == 1);
  CHECK(sweep.parallelism == 4);

  CHECK_THROWS_AS(parse_sweep(kMinimal), ConfigError);                       // no [sweep]
  CHECK_THROWS_AS(parse_sweep(std::string(kMinimal) + "[sweep]\n"), ConfigError);  // empty grid
}

TEST_CASE("probe section") {
  ProbeSpec probe = parse_probe(R"(
[objective]
kind = circle

[init]
x0 = 1.2, 0

[probe]
kind = annulus
radii = 0.2, 0.1, 0.05
samples = 5000
)");
  CHECK(probe.kind == Region::Kind::annulus);
  CHECK(probe.radii.size() == 3);
  CHECK(probe.samples == 5000);
  CHECK(probe.base_radius == 1.0);

  CHECK_THROWS_AS(parse_probe(std::string(kMinimal) + "[probe]\nkind = ball\n"), ConfigError);
}

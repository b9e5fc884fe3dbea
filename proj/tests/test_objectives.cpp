#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hblab/eigensolve.hpp"
#include "hblab/objectives.hpp"
#include "hblab/rng.hpp"

using namespace hblab;

namespace {
constexpr double kPi = 3.14159265358979323846;

Vec random_point(std::size_t dim, std::uint64_t seed, std::uint64_t idx, double scale) {
  Vec x(dim);
  for (std::size_t i = 0; i < dim; ++i) x[i] = scale * (2.0 * uniform01(seed, idx * 8 + i) - 1.0);
  return x;
}
}  // namespace

TEST_CASE("quadratic value and gradient") {
  Objective q = make_objective(ObjectiveSpec::quadratic({1.0, 9.0}));
  CHECK(q.value({1.0, 0.0}) == Catch::Approx(0.5).margin(1e-15));
  Vec g = q.gradient({1.0, 0.0});
  CHECK(g[0] == Catch::Approx(1.0).margin(1e-15));
  CHECK(g[1] == 0.0);
  CHECK(q.value({0.0, 0.0}) == 0.0);
  Vec g11 = q.gradient({1.0, 1.0});
  CHECK(g11[0] == 1.0);
  CHECK(g11[1] == 9.0);
}

TEST_CASE("circle value, gradient, hessian") {
  Objective c = make_objective(ObjectiveSpec::circle());
  CHECK(c.value({1.0, 0.0}) == 0.0);
  CHECK(norm(c.gradient({1.0, 0.0})) == 0.0);
  CHECK(c.value({1.1, 0.0}) == Catch::Approx(0.011025).margin(1e-15));
  Vec g = c.gradient({1.1, 0.0});
  CHECK(g[0] == Catch::Approx(0.231).margin(1e-14));
  CHECK(g[1] == 0.0);

  Vec eigs = jacobi_eigenvalues(c.hessian({1.0, 0.0}));
  REQUIRE(eigs.size() == 2);
  CHECK(eigs[0] == Catch::Approx(0.0).margin(1e-14));
  CHECK(eigs[1] == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("sine_valley oracles at a minimizer and off it") {
  Objective s = make_objective(ObjectiveSpec::sine_valley(1.0, 9.0));
  Vec on = {1.0, 0.0, kPi / 2};
  CHECK(s.value(on) == Catch::Approx(0.0).margin(1e-30));
  CHECK(norm(s.gradient(on)) == Catch::Approx(0.0).margin(1e-15));
  Vec eigs = jacobi_eigenvalues(s.hessian(on));
  REQUIRE(eigs.size() == 3);
  CHECK(eigs[0] == Catch::Approx(0.0).margin(1e-12));
  CHECK(eigs[1] == Catch::Approx(1.0).margin(1e-12));
  CHECK(eigs[2] == Catch::Approx(9.0).margin(1e-12));

  CHECK(s.value({0.0, 1.0, 0.0}) == Catch::Approx(4.5).margin(1e-15));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(make_objective(ObjectiveSpec::quadratic({-1.0, 2.0})), std::invalid_argument);
  CHECK_THROWS_AS(make_objective(ObjectiveSpec::quadratic({9.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(make_objective(ObjectiveSpec::quadratic({})), std::invalid_argument);
  CHECK_THROWS_AS(make_objective(ObjectiveSpec::circle(1)), std::invalid_argument);
  CHECK_THROWS_AS(make_objective(ObjectiveSpec::sine_valley(2.0, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(make_objective(ObjectiveSpec::sine_valley(0.0, 1.0)), std::invalid_argument);

  Objective q = make_objective(ObjectiveSpec::quadratic({1.0, 9.0}));
  CHECK_THROWS_AS(q.value({1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(q.gradient({1.0}), std::invalid_argument);
}

TEST_CASE("projections onto the minimizer set") {
  Objective q = make_objective(ObjectiveSpec::quadratic({1.0, 9.0}));
  Vec p = q.project_to_min_set({3.0, 4.0});
  CHECK(norm(p) == 0.0);
  CHECK(q.distance_to_min_set({3.0, 4.0}) == Catch::Approx(5.0).margin(1e-15));

  Objective c = make_objective(ObjectiveSpec::circle());
  Vec pc = c.project_to_min_set({2.0, 0.0});
  CHECK(pc[0] == Catch::Approx(1.0).margin(1e-15));
  CHECK(pc[1] == 0.0);
  CHECK(c.distance_to_min_set({2.0, 0.0}) == Catch::Approx(1.0).margin(1e-15));
  CHECK_THROWS_AS(c.project_to_min_set({0.0, 0.0}), DegenerateInputError);

  Objective s = make_objective(ObjectiveSpec::sine_valley(1.0, 9.0));
  Vec x = {1.0, 0.2, kPi / 2};
  Vec ps = s.project_to_min_set(x);
  CHECK(std::abs(norm(sub(x, ps)) - 0.2) < 1e-9);
  CHECK(ps[1] == 0.0);
  CHECK(std::abs(ps[2] - kPi / 2) < 1e-5);
}

TEST_CASE("sine_valley projection agrees with a dense grid oracle") {
  Objective s = make_objective(ObjectiveSpec::sine_valley(1.0, 9.0));
  for (int k = 0; k < 10; ++k) {
    Vec x = {1.0 + 0.2 * (uniform01(31, k * 4) - 0.5), 0.3 * (uniform01(31, k * 4 + 1) - 0.5),
             kPi / 2 + 0.4 * (uniform01(31, k * 4 + 2) - 0.5)};
    double got = s.distance_to_min_set(x);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -60000; i <= 60000; ++i) {  // 1e-5-spaced oracle grid
      double t = x[2] + 1e-5 * i;
      double a = x[0] - std::sin(t), b = x[2] - t;
      best = std::min(best, a * a + x[1] * x[1] + b * b);
    }
    CHECK(got == Catch::Approx(std::sqrt(best)).margin(1e-8));
  }
}

TEST_CASE("testbed points never dip below the minimum and projections are critical") {
  std::vector<Objective> objs = {make_objective(ObjectiveSpec::quadratic({1.0, 9.0}, 77)),
                                 make_objective(ObjectiveSpec::circle()),
                                 make_objective(ObjectiveSpec::sine_valley(1.0, 9.0))};
  for (const auto& obj : objs) {
    for (int k = 0; k < 200; ++k) {
      Vec x = random_point(obj.dim(), 555, k, 2.0);
      CHECK(obj.value(x) >= obj.min_value());
      if (obj.spec().kind == ObjectiveKind::circle && norm(x) == 0.0) continue;
      Vec p = obj.project_to_min_set(x);
      CHECK(obj.value(p) - obj.min_value() <= 1e-12);
      CHECK(norm(obj.gradient(p)) <= 1e-10);
    }
  }
}

TEST_CASE("analytic hessians are bitwise symmetric") {
  std::vector<Objective> objs = {make_objective(ObjectiveSpec::quadratic({1.0, 4.0, 9.0}, 123)),
                                 make_objective(ObjectiveSpec::circle(3)),
                                 make_objective(ObjectiveSpec::sine_valley(1.0, 9.0))};
  for (const auto& obj : objs) {
    for (int k = 0; k < 20; ++k) {
      Mat h = obj.hessian(random_point(obj.dim(), 99, k, 1.5));
      CHECK(is_symmetric(h));  // exact equality of mirrored entries
    }
  }
}

TEST_CASE("finite differences validate the oracles") {
  Objective c = make_objective(ObjectiveSpec::circle());
  FdReport r1 = fd_check(c, {0.7, 0.3}, 1e-5, 1e-4);
  CHECK(r1.max_rel_error_grad < 1e-6);

  Objective q = make_objective(ObjectiveSpec::quadratic({1.0, 9.0}));
  FdReport r2 = fd_check(q, {1.0, 1.0}, 1e-5, 1e-4);
  CHECK(r2.max_rel_error_hess < 1e-6);

  Objective s = make_objective(ObjectiveSpec::sine_valley(1.0, 9.0));
  FdReport r3 = fd_check(s, {0.5, 0.5, 0.5}, 1e-5, 1e-4);
  CHECK(r3.max_rel_error_grad < 1e-6);

  CHECK_THROWS_AS(fd_check(q, {1.0, 1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("finite differences at 100 random points per objective") {
  std::vector<Objective> objs = {make_objective(ObjectiveSpec::quadratic({1.0, 9.0}, 5)),
                                 make_objective(ObjectiveSpec::circle()),
                                 make_objective(ObjectiveSpec::sine_valley(1.0, 9.0))};
  for (const auto& obj : objs) {
    double worst_g = 0.0, worst_h = 0.0;
    for (int k = 0; k < 100; ++k) {
      FdReport r = fd_check(obj, random_point(obj.dim(), 2024, k, 1.5));
      worst_g = std::max(worst_g, r.max_rel_error_grad);
      worst_h = std::max(worst_h, r.max_rel_error_hess);
    }
    CHECK(worst_g < 1e-6);
    CHECK(worst_h < 1e-6);
  }
}

TEST_CASE("circle PL identity on the annulus") {
  // |grad f|^2 / (2 f) = 2 |x|^2 on the testbed circle
  Objective c = make_objective(ObjectiveSpec::circle());
  for (int k = 0; k < 100; ++k) {
    double r = 0.95 + 0.1 * uniform01(8, k);
    double th = 2.0 * kPi * uniform01(9, k);
    Vec x = {r * std::cos(th), r * std::sin(th)};
    double gap = c.value(x);
    if (gap < 1e-14) continue;
    double ratio = dot(c.gradient(x), c.gradient(x)) / (2.0 * gap);
    CHECK(ratio == Catch::Approx(2.0 * dot(x, x)).margin(1e-10));
    CHECK(ratio >= 1.805 - 1e-9);
  }
}

#pragma once

// Testbed of smooth objectives with exact derivative oracles, known minimum
// value (0 for every member), known minimizer sets, and projections onto them.
//
//   quadratic    f(x) = 1/2 x^T Q diag(lambda) Q^T x      minimizer {0}
//   circle       f(x) = 1/4 (|x|^2 - 1)^2                 minimizer sphere |x| = 1
//   sine_valley  f(x) = mu/2 (x1 - sin x3)^2 + L/2 x2^2   minimizer curve (sin t, 0, t)
//
// The circle and sine_valley members are non-convex with a manifold of
// minima; the Hessian on the manifold has a kernel of dimension 1 and
// nonzero eigenvalues {2} and {mu (1 + cos^2 x3), L} respectively.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "hblab/linalg.hpp"
#include "hblab/rng.hpp"

namespace hblab {

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ObjectiveKind { quadratic, circle, sine_valley };

inline std::string to_string(ObjectiveKind k) {
  switch (k) {
    case ObjectiveKind::quadratic: return "quadratic";
    case ObjectiveKind::circle: return "circle";
    case ObjectiveKind::sine_valley: return "sine_valley";
  }
  return "?";
}

struct ObjectiveSpec {
  ObjectiveKind kind = ObjectiveKind::quadratic;
  std::size_t dim = 2;
  Vec eigenvalues;  // quadratic: ascending, strictly positive
  std::optional<std::uint64_t> rotation_seed;
  double mu_t = 1.0, L_t = 1.0;  // sine_valley

  static ObjectiveSpec quadratic(Vec lambdas, std::optional<std::uint64_t> seed = {}) {
    ObjectiveSpec s;
    s.kind = ObjectiveKind::quadratic;
    s.dim = lambdas.size();
    s.eigenvalues = std::move(lambdas);
    s.rotation_seed = seed;
    return s;
  }
  static ObjectiveSpec circle(std::size_t dim = 2) {
    ObjectiveSpec s;
    s.kind = ObjectiveKind::circle;
    s.dim = dim;
    return s;
  }
  static ObjectiveSpec sine_valley(double mu_t, double L_t) {
    ObjectiveSpec s;
    s.kind = ObjectiveKind::sine_valley;
    s.dim = 3;
    s.mu_t = mu_t;
    s.L_t = L_t;
    return s;
  }
};

class Objective {
 public:
  explicit Objective(ObjectiveSpec spec) : spec_(std::move(spec)) {
    validate();
    if (spec_.kind == ObjectiveKind::quadratic) {
      if (spec_.rotation_seed) {
        Mat q = orthogonal_from_seed(spec_.dim, *spec_.rotation_seed);
        m_ = symmetric_sandwich(q, spec_.eigenvalues);
      } else {
        m_ = Mat(spec_.dim, spec_.dim);
        for (std::size_t i = 0; i < spec_.dim; ++i) m_(i, i) = spec_.eigenvalues[i];
      }
    }
  }

  const ObjectiveSpec& spec() const { return spec_; }
  std::size_t dim() const { return spec_.dim; }
  double min_value() const { return 0.0; }

  double value(const Vec& x) const {
    check_dim(x);
    switch (spec_.kind) {
      case ObjectiveKind::quadratic:
        return 0.5 * dot(x, matvec(m_, x));
      case ObjectiveKind::circle: {
        double e = dot(x, x) - 1.0;
        return 0.25 * e * e;
      }
      case ObjectiveKind::sine_valley: {
        if (x.size() != 3) throw std::invalid_argument("objective: point dimension mismatch");
        double d = x[0] - std::sin(x[2]);
        return 0.5 * spec_.mu_t * d * d + 0.5 * spec_.L_t * x[1] * x[1];
      }
    }
    return 0.0;
  }

  Vec gradient(const Vec& x) const {
    check_dim(x);
    switch (spec_.kind) {
      case ObjectiveKind::quadratic:
        return matvec(m_, x);
      case ObjectiveKind::circle:
        return scaled(x, dot(x, x) - 1.0);
      case ObjectiveKind::sine_valley: {
        if (x.size() != 3) throw std::invalid_argument("objective: point dimension mismatch");
        double d = x[0] - std::sin(x[2]);
        double c = std::cos(x[2]);
        return {spec_.mu_t * d, spec_.L_t * x[1], -spec_.mu_t * d * c};
      }
    }
    return {};
  }

  Mat hessian(const Vec& x) const {
    check_dim(x);
    switch (spec_.kind) {
      case ObjectiveKind::quadratic:
        return m_;
      case ObjectiveKind::circle: {
        double e = dot(x, x) - 1.0;
        Mat h(dim(), dim());
        for (std::size_t i = 0; i < dim(); ++i) {
          for (std::size_t j = i; j < dim(); ++j) {
            double v = 2.0 * x[i] * x[j];
            if (i == j) v += e;
            h(i, j) = v;
            h(j, i) = v;
          }
        }
        return h;
      }
      case ObjectiveKind::sine_valley: {
        if (x.size() != 3) throw std::invalid_argument("objective: point dimension mismatch");
        double d = x[0] - std::sin(x[2]);
        double c = std::cos(x[2]);
        double s = std::sin(x[2]);
        Mat h(3, 3);
        h(0, 0) = spec_.mu_t;
        h(1, 1) = spec_.L_t;
        h(0, 2) = h(2, 0) = -spec_.mu_t * c;
        h(2, 2) = spec_.mu_t * c * c + spec_.mu_t * d * s;
        return h;
      }
    }
    return {};
  }

  /// Nearest point of the minimizer set. quadratic -> 0; circle -> x/|x| with
  /// x = 0 rejected as degenerate; sine_valley -> 1-D search over the curve
  /// parameter (0.01-spaced grid on [x3-2, x3+2], then 20 ternary refinements).
  Vec project_to_min_set(const Vec& x) const {
    check_dim(x);
    switch (spec_.kind) {
      case ObjectiveKind::quadratic:
        return Vec(dim(), 0.0);
      case ObjectiveKind::circle: {
        double r = norm(x);
        if (r == 0.0)
          throw DegenerateInputError("project_to_min_set: projection of 0 onto the circle is not unique");
        return scaled(x, 1.0 / r);
      }
      case ObjectiveKind::sine_valley: {
        auto dist2 = [&](double t) {
          double a = x[0] - std::sin(t);
          double b = x[2] - t;
          return a * a + b * b;  // x2 offset is constant in t
        };
        double best_t = x[2], best = dist2(best_t);
        for (int i = -200; i <= 200; ++i) {
          double t = x[2] + 0.01 * i;
          double v = dist2(t);
          if (v < best) {
            best = v;
            best_t = t;
          }
        }
        double lo = best_t - 0.01, hi = best_t + 0.01;
        for (int it = 0; it < 20; ++it) {
          double m1 = lo + (hi - lo) / 3.0;
          double m2 = hi - (hi - lo) / 3.0;
          if (dist2(m1) <= dist2(m2))
            hi = m2;
          else
            lo = m1;
        }
        double t = 0.5 * (lo + hi);
        return {std::sin(t), 0.0, t};
      }
    }
    return {};
  }

  double distance_to_min_set(const Vec& x) const { return norm(sub(x, project_to_min_set(x))); }

  /// Conservative upper bound on ||Hess f|| within `radius` of the minimizer
  /// set; used for pilot step sizes, ODE step guards and the Lyapunov L.
  double smoothness_bound(double radius) const {
    switch (spec_.kind) {
      case ObjectiveKind::quadratic:
        return spec_.eigenvalues.back();
      case ObjectiveKind::circle: {
        double r = 1.0 + radius;
        return 3.0 * r * r - 1.0;
      }
      case ObjectiveKind::sine_valley:
        return std::max(spec_.L_t, 2.0 * spec_.mu_t * (1.0 + radius));
    }
    return 1.0;
  }

 private:
  void validate() const {
    if (spec_.dim < 1) throw std::invalid_argument("objective: dim must be >= 1");
    switch (spec_.kind) {
      case ObjectiveKind::quadratic: {
        if (spec_.eigenvalues.size() != spec_.dim)
          throw std::invalid_argument("quadratic: eigenvalue count must equal dim");
        double prev = 0.0;
        for (double l : spec_.eigenvalues) {
          if (!(l > 0.0)) throw std::invalid_argument("quadratic: eigenvalues must be strictly positive");
          if (l < prev) throw std::invalid_argument("quadratic: eigenvalues must be sorted ascending");
          prev = l;
        }
        break;
      }
      case ObjectiveKind::circle:
        if (spec_.dim < 2) throw std::invalid_argument("circle: dim must be >= 2");
        break;
      case ObjectiveKind::sine_valley:
        if (spec_.dim != 3) throw std::invalid_argument("sine_valley: dim is fixed to 3");
        if (!(spec_.mu_t > 0.0) || !(spec_.L_t >= spec_.mu_t))
          throw std::invalid_argument("sine_valley: requires 0 < mu_t <= L_t");
        break;
    }
  }

  void check_dim(const Vec& x) const {
    if (x.size() != spec_.dim) throw std::invalid_argument("objective: point dimension mismatch");
  }

  ObjectiveSpec spec_;
  Mat m_;  // quadratic only
};

inline Objective make_objective(const ObjectiveSpec& spec) { return Objective(spec); }

struct FdReport {
  double max_rel_error_grad = 0.0;
  double max_rel_error_hess = 0.0;
};

/// Central-difference validation of the analytic oracles. Relative errors use
/// a unit floor in the denominator so components near zero stay meaningful.
inline FdReport fd_check(const Objective& obj, const Vec& x, double h_grad = 1e-5,
                         double h_hess = 1e-4) {
  if (!(h_grad > 0.0) || !(h_hess > 0.0)) throw std::invalid_argument("fd_check: step must be positive");
  std::size_t n = x.size();
  FdReport rep;

  Vec g = obj.gradient(x);
  for (std::size_t i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h_grad;
    xm[i] -= h_grad;
    double fd = (obj.value(xp) - obj.value(xm)) / (2.0 * h_grad);
    double err = std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i]));
    rep.max_rel_error_grad = std::max(rep.max_rel_error_grad, err);
  }

  Mat hess = obj.hessian(x);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Vec xpp = x, xpm = x, xmp = x, xmm = x;
      xpp[i] += h_hess; xpp[j] += h_hess;
      xpm[i] += h_hess; xpm[j] -= h_hess;
      xmp[i] -= h_hess; xmp[j] += h_hess;
      xmm[i] -= h_hess; xmm[j] -= h_hess;
      double fd = (obj.value(xpp) - obj.value(xpm) - obj.value(xmp) + obj.value(xmm)) /
                  (4.0 * h_hess * h_hess);
      double err = std::abs(fd - hess(i, j)) / std::max(1.0, std::abs(hess(i, j)));
      rep.max_rel_error_hess = std::max(rep.max_rel_error_hess, err);
    }
  }
  return rep;
}

}  // namespace hblab

#pragma once

// The discrete heavy ball iteration x_{n+1} = x_n - g grad f(x_n) + b (x_n -
// x_{n-1}), its gradient-descent degenerate case (b = 0 reuses the same step
// routine, so the two coincide to the last ulp), the heavy ball ODE
// integrated with classical fixed-step RK4, and the Lyapunov energy
// E(x, v) = f + a/(a^2+2L) <grad f, v> + L/(a^2+2L) |v|^2.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hblab/linalg.hpp"
#include "hblab/objectives.hpp"
#include "hblab/rates.hpp"

namespace hblab {

enum class StopReason { tolerance, max_iters, divergence };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::tolerance: return "tolerance";
    case StopReason::max_iters: return "max_iters";
    case StopReason::divergence: return "divergence";
  }
  return "?";
}

struct Stopping {
  double f_tol = 1e-14;
  std::size_t max_iters = 200000;
  double blow_up_bound = 1e8;
};

struct Trajectory {
  std::vector<Vec> iterates;
  Vec f_gaps;
  Vec grad_norms;
  StopReason stop_reason = StopReason::max_iters;

  /// Distances to the final iterate, the run's stand-in for the limit point.
  Vec dist_to_final() const {
    Vec d(iterates.size(), 0.0);
    if (iterates.empty()) return d;
    const Vec& last = iterates.back();
    for (std::size_t i = 0; i < iterates.size(); ++i) d[i] = norm(sub(iterates[i], last));
    return d;
  }
};

inline Vec hb_step(const Objective& obj, const Vec& x, const Vec& x_prev, const HyperParams& p) {
  Vec g = obj.gradient(x);
  Vec next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    next[i] = x[i] - p.gamma * g[i] + p.beta * (x[i] - x_prev[i]);
  return next;
}

/// Iterate until the f-gap drops below f_tol, max_iters is reached, or the
/// iterate leaves the blow-up ball / turns non-finite (divergence).
inline Trajectory run_discrete(const Objective& obj, Vec x0, Vec x1, const HyperParams& params,
                               const Stopping& stop = {}) {
  validate_hyperparams(params);
  if (!(stop.f_tol > 0.0) || !(stop.blow_up_bound > 0.0) || stop.max_iters == 0)
    throw std::invalid_argument("run_discrete: stopping thresholds must be positive");

  Trajectory traj;
  auto record = [&](const Vec& x) {
    traj.iterates.push_back(x);
    traj.f_gaps.push_back(obj.value(x) - obj.min_value());
    traj.grad_norms.push_back(norm(obj.gradient(x)));
  };
  auto healthy = [&](const Vec& x) {
    return all_finite(x) && norm(x) <= stop.blow_up_bound && std::isfinite(obj.value(x));
  };

  if (!healthy(x0) || !healthy(x1)) {
    traj.stop_reason = StopReason::divergence;
    return traj;
  }
  record(x0);
  record(x1);
  if (traj.f_gaps.back() < stop.f_tol) {
    traj.stop_reason = StopReason::tolerance;
    return traj;
  }

  Vec prev = std::move(x0), cur = std::move(x1);
  traj.stop_reason = StopReason::max_iters;
  for (std::size_t n = 1; n < stop.max_iters; ++n) {
    Vec next = hb_step(obj, cur, prev, params);
    if (!healthy(next)) {
      traj.stop_reason = StopReason::divergence;
      break;
    }
    record(next);
    prev = std::move(cur);
    cur = std::move(next);
    if (traj.f_gaps.back() < stop.f_tol) {
      traj.stop_reason = StopReason::tolerance;
      break;
    }
  }
  return traj;
}

/// Right-hand side of the heavy ball ODE: (dx, dv) = (v, -a v - grad f(x)).
inline std::pair<Vec, Vec> ode_rhs(const Objective& obj, const Vec& x, const Vec& v, double alpha) {
  Vec g = obj.gradient(x);
  Vec dv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) dv[i] = -alpha * v[i] - g[i];
  return {v, std::move(dv)};
}

inline double lyapunov_energy(const Objective& obj, const Vec& x, const Vec& v, double alpha,
                              double L) {
  if (!(alpha > 0.0) || !(L > 0.0))
    throw std::invalid_argument("lyapunov_energy: alpha and L must be > 0");
  double denom = alpha * alpha + 2.0 * L;
  return obj.value(x) + alpha / denom * dot(obj.gradient(x), v) + L / denom * dot(v, v);
}

struct FlowTrajectory {
  Vec times;
  std::vector<Vec> xs;
  std::vector<Vec> vs;
  Vec f_gaps;
  Vec grad_norms;
  Vec energy;
  bool diverged = false;
  double energy_L = 0.0;  // L used in the recorded Lyapunov values

  Vec dist_to_final() const {
    Vec d(xs.size(), 0.0);
    if (xs.empty()) return d;
    const Vec& last = xs.back();
    for (std::size_t i = 0; i < xs.size(); ++i) d[i] = norm(sub(xs[i], last));
    return d;
  }
};

/// Classical RK4 with fixed step h on [0, T]. energy_L <= 0 picks a
/// conservative smoothness bound from the objective automatically.
inline FlowTrajectory integrate_ode(const Objective& obj, Vec x0, Vec v0, double alpha, double h,
                                    double T, double energy_L = 0.0) {
  if (!(alpha > 0.0)) throw std::invalid_argument("integrate_ode: alpha must be > 0");
  if (!(h > 0.0) || !(T >= h)) throw std::invalid_argument("integrate_ode: requires h > 0, T >= h");
  if (x0.size() != obj.dim() || v0.size() != obj.dim())
    throw std::invalid_argument("integrate_ode: state dimension mismatch");

  double radius = 2.0 + norm(x0) + norm(v0);
  double L = energy_L > 0.0 ? energy_L : obj.smoothness_bound(radius);
  if (!(h <= 0.1 / std::sqrt(L + alpha * alpha)))
    throw std::invalid_argument("integrate_ode: step too large for stability guard h <= 0.1/sqrt(L+alpha^2)");

  std::size_t steps = static_cast<std::size_t>(std::llround(T / h));
  FlowTrajectory traj;
  traj.energy_L = L;
  auto record = [&](double t, const Vec& x, const Vec& v) {
    traj.times.push_back(t);
    traj.xs.push_back(x);
    traj.vs.push_back(v);
    traj.f_gaps.push_back(obj.value(x) - obj.min_value());
    traj.grad_norms.push_back(norm(obj.gradient(x)));
    traj.energy.push_back(lyapunov_energy(obj, x, v, alpha, L));
  };

  Vec x = std::move(x0), v = std::move(v0);
  record(0.0, x, v);
  for (std::size_t k = 0; k < steps; ++k) {
    auto [k1x, k1v] = ode_rhs(obj, x, v, alpha);
    auto [k2x, k2v] = ode_rhs(obj, axpy(x, 0.5 * h, k1x), axpy(v, 0.5 * h, k1v), alpha);
    auto [k3x, k3v] = ode_rhs(obj, axpy(x, 0.5 * h, k2x), axpy(v, 0.5 * h, k2v), alpha);
    auto [k4x, k4v] = ode_rhs(obj, axpy(x, h, k3x), axpy(v, h, k3v), alpha);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
      v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    if (!all_finite(x) || !all_finite(v)) {
      traj.diverged = true;
      break;
    }
    record(h * static_cast<double>(k + 1), x, v);
  }
  return traj;
}

}  // namespace hblab

#pragma once

// Fits asymptotic decay rates from positive trajectory series. The model is
// log s_n = c + n log rho + p log(n+1) (discrete) or log s(t) = c - r t +
// p log(1+t) (continuous); the integer prefactor degree p in {0, 1, 2} is
// picked by best r^2, which absorbs the polynomial factors that appear at
// critical damping. Fitting happens on a tail window where the series sits
// inside a residual band, by default [1e-11, 1e-4]: above roundoff, below the
// transient.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hblab/linalg.hpp"

namespace hblab {

struct InsufficientDecayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndexRange {
  std::size_t lo = 0, hi = 0;  // inclusive
  std::size_t size() const { return hi - lo + 1; }
};

/// Longest contiguous index range whose values lie in [lo, hi]; ties go to
/// the earliest range.
inline IndexRange tail_window(const Vec& series, double lo = 1e-11, double hi = 1e-4) {
  if (!(lo < hi)) throw std::invalid_argument("tail_window: requires lo < hi");
  bool found = false, in_run = false;
  std::size_t run_start = 0;
  IndexRange best{0, 0};
  auto close = [&](std::size_t end) {
    if (!in_run) return;
    in_run = false;
    if (!found || end - run_start > best.hi - best.lo) {
      best = {run_start, end};
      found = true;
    }
  };
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] >= lo && series[i] <= hi) {
      if (!in_run) {
        in_run = true;
        run_start = i;
      }
    } else {
      close(i == 0 ? 0 : i - 1);
    }
  }
  close(series.empty() ? 0 : series.size() - 1);
  if (!found) throw InsufficientDecayError("tail_window: no series values inside the residual band");
  return best;
}

enum class GridKind { per_iteration, per_unit_time };

struct RateEstimate {
  double rate = 0.0;        // geometric factor in (0,1), or exponent > 0
  int prefactor_degree = 0;
  double r_squared = 0.0;
  IndexRange window;
};

/// Least-squares tail fit. `step` is the time grid spacing for
/// per_unit_time and ignored otherwise. An explicit window overrides the
/// default band; the series is normalized by its first window value before
/// the logs, so a constant scaling is absorbed in the intercept exactly.
inline RateEstimate estimate_rate(const Vec& series, GridKind kind, double step = 1.0,
                                  bool allow_prefactor = true,
                                  std::optional<IndexRange> window = {},
                                  double band_lo = 1e-11, double band_hi = 1e-4) {
  IndexRange w = window ? *window : tail_window(series, band_lo, band_hi);
  if (w.hi >= series.size() || w.lo > w.hi)
    throw std::invalid_argument("estimate_rate: window outside series");
  std::size_t m = w.size();
  if (m < 10) throw InsufficientDataError("estimate_rate: fewer than 10 window points");
  if (kind == GridKind::per_unit_time && !(step > 0.0))
    throw std::invalid_argument("estimate_rate: step must be > 0");

  double ref = series[w.lo];
  if (!(ref > 0.0)) throw std::invalid_argument("estimate_rate: series must be positive in window");

  std::vector<double> u(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    double s = series[w.lo + i];
    if (!(s > 0.0)) throw std::invalid_argument("estimate_rate: series must be positive in window");
    double n = static_cast<double>(w.lo + i);
    u[i] = kind == GridKind::per_iteration ? n : n * step;
    y[i] = std::log(s / ref);
  }

  RateEstimate best;
  bool have = false;
  for (int p = 0; p <= (allow_prefactor ? 2 : 0); ++p) {
    double su = 0.0, sy = 0.0;
    std::vector<double> yp(m);
    for (std::size_t i = 0; i < m; ++i) {
      yp[i] = y[i] - p * std::log1p(u[i]);
      su += u[i];
      sy += yp[i];
    }
    double ub = su / m, yb = sy / m;
    double suu = 0.0, suy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      suu += (u[i] - ub) * (u[i] - ub);
      suy += (u[i] - ub) * (yp[i] - yb);
    }
    double slope = suy / suu;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = yp[i] - yb - slope * (u[i] - ub);
      ss_res += r * r;
      ss_tot += (yp[i] - yb) * (yp[i] - yb);
    }
    double r2 = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 0.0;
    if (!have || r2 > best.r_squared) {
      best.rate = kind == GridKind::per_iteration ? std::exp(slope) : -slope;
      best.prefactor_degree = p;
      best.r_squared = r2;
      best.window = w;
      have = true;
    }
  }
  return best;
}

struct Verdict {
  bool pass = false;
  std::string details;
};

/// Pass iff the fitted rate is within eps of theory and the fit is clean
/// (r^2 >= 0.99).
inline Verdict compare_to_theory(const RateEstimate& est, double theory, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("compare_to_theory: eps must be > 0");
  Verdict v;
  bool close = std::abs(est.rate - theory) <= eps;
  bool clean = est.r_squared >= 0.99;
  v.pass = close && clean;
  v.details = "fitted=" + std::to_string(est.rate) + " theory=" + std::to_string(theory) +
              " eps=" + std::to_string(eps) + " r2=" + std::to_string(est.r_squared);
  if (!close) v.details += " [rate outside tolerance]";
  if (!clean) v.details += " [poor fit]";
  return v;
}

}  // namespace hblab

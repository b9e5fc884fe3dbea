#pragma once

// Numerical probes of the geometric conditions around a minimizer set:
// Polyak-Lojasiewicz, quadratic growth, error bound and quasi-strong
// convexity, each estimated as an infimum of its defining ratio over seeded
// uniform samples of a ball or annulus. Sampling is counter-based, so a
// larger sample count extends the same stream and infima are monotone in it.
//
// Near a minimizer all four constants approach the smallest nonzero
// eigenvalue of the Hessian there, which hessian_normal_spectrum reports
// together with the kernel dimension (the dimension of the minimizer
// manifold).

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hblab/eigensolve.hpp"
#include "hblab/linalg.hpp"
#include "hblab/objectives.hpp"
#include "hblab/rng.hpp"

namespace hblab {

struct DegenerateRegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Region {
  enum class Kind { ball, annulus };
  Kind kind = Kind::ball;
  Vec center;       // region center; annulus radii are measured from it
  double r_lo = 0.0;
  double r_hi = 1.0;

  static Region ball(Vec center, double radius) { return {Kind::ball, std::move(center), 0.0, radius}; }
  static Region annulus(Vec center, double r_lo, double r_hi) {
    return {Kind::annulus, std::move(center), r_lo, r_hi};
  }

  std::string to_string() const {
    std::ostringstream os;
    if (kind == Kind::ball)
      os << "ball(" << r_hi << ")";
    else
      os << "annulus(" << r_lo << ";" << r_hi << ")";
    return os.str();
  }
};

/// Uniform sample from the region volume; pure in (seed, index).
inline Vec sample_region(const Region& region, std::size_t dim, std::uint64_t seed,
                         std::uint64_t index) {
  if (region.center.size() != dim) throw std::invalid_argument("sample_region: center dimension mismatch");
  if (!(region.r_hi > 0.0) || region.r_lo < 0.0 || !(region.r_lo < region.r_hi || region.kind == Region::Kind::ball))
    throw std::invalid_argument("sample_region: invalid radii");
  const std::uint64_t stride = dim + 4;
  std::uint64_t base = index * stride;

  Vec dir(dim);
  double n2 = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    dir[i] = gaussian(seed, base + i);
    n2 += dir[i] * dir[i];
  }
  double nrm = std::sqrt(n2);
  if (nrm == 0.0) {
    dir.assign(dim, 0.0);
    dir[0] = 1.0;
    nrm = 1.0;
  }
  double u = uniform01(seed, base + stride - 1);
  double d = static_cast<double>(dim);
  double rlo = region.kind == Region::Kind::ball ? 0.0 : region.r_lo;
  double r = std::pow(std::pow(rlo, d) + u * (std::pow(region.r_hi, d) - std::pow(rlo, d)), 1.0 / d);
  Vec x(dim);
  for (std::size_t i = 0; i < dim; ++i) x[i] = region.center[i] + r / nrm * dir[i];
  return x;
}

namespace detail {

struct ProbeAccum {
  double pl = std::numeric_limits<double>::infinity();
  double qg = std::numeric_limits<double>::infinity();
  double eb = std::numeric_limits<double>::infinity();
  double qsc = std::numeric_limits<double>::infinity();
  std::size_t pl_used = 0, dist_used = 0;
};

inline ProbeAccum probe_constants(const Objective& obj, const Region& region,
                                  std::size_t n_samples, std::uint64_t seed, bool need_proj) {
  if (n_samples < 1000) throw std::invalid_argument("probe: n_samples must be >= 1000");
  ProbeAccum acc;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    Vec x = sample_region(region, obj.dim(), seed, i);
    double gap = obj.value(x) - obj.min_value();
    double gn2 = dot(obj.gradient(x), obj.gradient(x));
    if (gap >= 1e-14) {
      acc.pl = std::min(acc.pl, gn2 / (2.0 * gap));
      ++acc.pl_used;
    }
    if (!need_proj) continue;
    Vec y = obj.project_to_min_set(x);
    Vec diff = sub(x, y);
    double d = norm(diff);
    if (d < 1e-9) continue;
    ++acc.dist_used;
    acc.qg = std::min(acc.qg, 2.0 * gap / (d * d));
    acc.eb = std::min(acc.eb, std::sqrt(gn2) / d);
    double lhs = dot(obj.gradient(x), diff) - gap + (obj.value(y) - obj.min_value());
    acc.qsc = std::min(acc.qsc, 2.0 * lhs / (d * d));
  }
  return acc;
}

}  // namespace detail

inline double pl_constant_estimate(const Objective& obj, const Region& region,
                                   std::size_t n_samples, std::uint64_t seed) {
  auto acc = detail::probe_constants(obj, region, n_samples, seed, false);
  if (acc.pl_used == 0) throw DegenerateRegionError("pl_constant_estimate: every sample was on the minimizer set");
  return acc.pl;
}

inline double qg_constant_estimate(const Objective& obj, const Region& region,
                                   std::size_t n_samples, std::uint64_t seed) {
  auto acc = detail::probe_constants(obj, region, n_samples, seed, true);
  if (acc.dist_used == 0) throw DegenerateRegionError("qg_constant_estimate: every sample was on the minimizer set");
  return acc.qg;
}

inline double eb_constant_estimate(const Objective& obj, const Region& region,
                                   std::size_t n_samples, std::uint64_t seed) {
  auto acc = detail::probe_constants(obj, region, n_samples, seed, true);
  if (acc.dist_used == 0) throw DegenerateRegionError("eb_constant_estimate: every sample was on the minimizer set");
  return acc.eb;
}

inline double qsc_constant_estimate(const Objective& obj, const Region& region,
                                    std::size_t n_samples, std::uint64_t seed) {
  auto acc = detail::probe_constants(obj, region, n_samples, seed, true);
  if (acc.dist_used == 0) throw DegenerateRegionError("qsc_constant_estimate: every sample was on the minimizer set");
  return acc.qsc;
}

struct NormalSpectrum {
  Vec nonzero_eigs;  // ascending; front() is the effective mu, back() the effective L
  std::size_t kernel_dim = 0;
};

/// Hessian eigendecomposition at a near-critical point; eigenvalues below
/// kernel_tol (default 1e-8 * max |eig|) count as the manifold tangent
/// kernel.
inline NormalSpectrum hessian_normal_spectrum(const Objective& obj, const Vec& x_star,
                                              double kernel_tol = -1.0) {
  if (norm(obj.gradient(x_star)) > 1e-8)
    throw std::invalid_argument("hessian_normal_spectrum: x_star is not near the minimizer set");
  Vec eigs = jacobi_eigenvalues(obj.hessian(x_star));
  double max_abs = 0.0;
  for (double e : eigs) max_abs = std::max(max_abs, std::abs(e));
  double tol = kernel_tol > 0.0 ? kernel_tol : 1e-8 * max_abs;
  NormalSpectrum out;
  for (double e : eigs) {
    if (std::abs(e) < tol)
      ++out.kernel_dim;
    else
      out.nonzero_eigs.push_back(e);
  }
  return out;
}

struct GeometryReport {
  double pl = 0.0, qg = 0.0, eb = 0.0, qsc = 0.0;
  Vec hess_nonzero_eigs;
  std::size_t kernel_dim = 0;
  Region region;
  std::size_t samples = 0;
};

inline GeometryReport probe_region(const Objective& obj, const Region& region,
                                   std::size_t n_samples, std::uint64_t seed, const Vec& x_star) {
  auto acc = detail::probe_constants(obj, region, n_samples, seed, true);
  if (acc.pl_used == 0 || acc.dist_used == 0)
    throw DegenerateRegionError("probe_region: every sample was on the minimizer set");
  auto ns = hessian_normal_spectrum(obj, x_star);
  GeometryReport rep;
  rep.pl = acc.pl;
  rep.qg = acc.qg;
  rep.eb = acc.eb;
  rep.qsc = acc.qsc;
  rep.hess_nonzero_eigs = ns.nonzero_eigs;
  rep.kernel_dim = ns.kernel_dim;
  rep.region = region;
  rep.samples = n_samples;
  return rep;
}

/// Runs the four constant estimators on shrinking balls around x_star, so
/// the approach of all four constants toward the smallest nonzero Hessian
/// eigenvalue is observable as the radius shrinks.
inline std::vector<GeometryReport> local_equivalence_report(const Objective& obj, const Vec& x_star,
                                                            const Vec& radii, std::size_t n_samples,
                                                            std::uint64_t seed) {
  std::vector<GeometryReport> out;
  out.reserve(radii.size());
  for (double r : radii)
    out.push_back(probe_region(obj, Region::ball(x_star, r), n_samples, seed, x_star));
  return out;
}

}  // namespace hblab

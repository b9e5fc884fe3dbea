#pragma once

// Closed-form convergence rates and optimal hyperparameters for the heavy
// ball dynamics, plus the system matrices whose spectra realize those rates.
//
// Continuous time: the flow contracts like exp(-m(alpha) t) with
//   m(alpha) = 1/2 (alpha - sqrt(max(0, alpha^2 - 4 mu))),
// maximized at alpha* = 2 sqrt(mu) where m = sqrt(mu).
//
// Discrete time: the iteration contracts per step like m(gamma, beta), a
// three-branch surface over the step size; the minimum over valid (gamma,
// beta) is (sqrt(kappa)-1)/(sqrt(kappa)+1) at gamma* = 4/(sqrt(mu)+sqrt(L))^2,
// beta* = ((sqrt(kappa)-1)/(sqrt(kappa)+1))^2.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hblab/eigensolve.hpp"
#include "hblab/linalg.hpp"

namespace hblab {

struct OutOfStabilityRangeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct HyperParams {
  double gamma = 0.0;
  double beta = 0.0;
};

inline void validate_hyperparams(const HyperParams& p) {
  if (!(p.gamma > 0.0)) throw std::invalid_argument("hyperparams: gamma must be > 0");
  if (!(p.beta >= 0.0 && p.beta < 1.0))
    throw std::invalid_argument("hyperparams: beta must lie in [0,1)");
}

inline double m_continuous(double alpha, double mu) {
  if (!(alpha > 0.0)) throw std::invalid_argument("m_continuous: alpha must be > 0");
  if (!(mu > 0.0)) throw std::invalid_argument("m_continuous: mu must be > 0");
  return 0.5 * (alpha - std::sqrt(std::max(0.0, alpha * alpha - 4.0 * mu)));
}

inline double optimal_alpha(double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("optimal_alpha: mu must be > 0");
  return 2.0 * std::sqrt(mu);
}

/// Per-step contraction factor of the discrete method for spec(H) in [mu, L].
/// Branch selection uses the closed interval for the sqrt(beta) plateau.
/// beta = 0 is accepted as the gradient-descent limit max(|1-g mu|, |1-g L|).
inline double m_discrete(double gamma, double beta, double mu, double L) {
  if (!(mu > 0.0 && L >= mu)) throw std::invalid_argument("m_discrete: requires 0 < mu <= L");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("m_discrete: beta must lie in [0,1)");
  if (!(gamma > 0.0 && gamma < 2.0 * (1.0 + beta) / L))
    throw OutOfStabilityRangeError("m_discrete: gamma outside (0, 2(1+beta)/L)");
  if (beta == 0.0) return std::max(std::abs(1.0 - gamma * mu), std::abs(1.0 - gamma * L));

  double sb = std::sqrt(beta);
  double lo = (1.0 - sb) * (1.0 - sb) / mu;
  double hi = (1.0 + sb) * (1.0 + sb) / L;
  if (lo <= gamma && gamma <= hi) return sb;

  double c = gamma <= 2.0 * (1.0 + beta) / (L + mu) ? 0.5 * (1.0 + beta - gamma * mu)
                                                    : 0.5 * (gamma * L - (1.0 + beta));
  return c + std::sqrt(std::max(0.0, c * c - beta));
}

inline HyperParams optimal_hyperparams(double mu, double L) {
  if (!(mu > 0.0 && L >= mu)) throw std::invalid_argument("optimal_hyperparams: requires 0 < mu <= L");
  double sm = std::sqrt(mu), sl = std::sqrt(L);
  double kappa_sqrt = sl / sm;
  double b = (kappa_sqrt - 1.0) / (kappa_sqrt + 1.0);
  return {4.0 / ((sm + sl) * (sm + sl)), b * b};
}

inline double gd_rate(double kappa) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("gd_rate: kappa must be >= 1");
  return (kappa - 1.0) / (kappa + 1.0);
}

/// Continuous system matrix, block rows [0 0 I; 0 -aI 0; -H 0 -aI] over the
/// state (normal offset, tangential velocity, normal velocity). Size
/// d_N + d_T + d_N.
inline Mat continuous_system_matrix(const Mat& h, std::size_t d_t, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("continuous_system_matrix: alpha must be > 0");
  if (!is_symmetric(h)) throw std::invalid_argument("continuous_system_matrix: H must be symmetric");
  std::size_t dn = h.rows();
  std::size_t n = 2 * dn + d_t;
  Mat a(n, n);
  for (std::size_t i = 0; i < dn; ++i) a(i, dn + d_t + i) = 1.0;
  for (std::size_t i = 0; i < d_t; ++i) a(dn + i, dn + i) = -alpha;
  for (std::size_t i = 0; i < dn; ++i) {
    for (std::size_t j = 0; j < dn; ++j) a(dn + d_t + i, j) = -h(i, j);
    a(dn + d_t + i, dn + d_t + i) = -alpha;
  }
  return a;
}

/// Discrete system matrix, block rows [(1+b)I - gH, -bI, 0; I, 0, 0; 0, 0, bI]
/// over (normal offset, previous normal offset, tangential momentum). Size
/// 2 d_N + d_T.
inline Mat discrete_system_matrix(const Mat& h, std::size_t d_t, double gamma, double beta) {
  validate_hyperparams({gamma, beta});
  if (!is_symmetric(h)) throw std::invalid_argument("discrete_system_matrix: H must be symmetric");
  std::size_t dn = h.rows();
  std::size_t n = 2 * dn + d_t;
  Mat a(n, n);
  for (std::size_t i = 0; i < dn; ++i) {
    for (std::size_t j = 0; j < dn; ++j) a(i, j) = -gamma * h(i, j);
    a(i, i) += 1.0 + beta;
    a(i, dn + i) = -beta;
    a(dn + i, i) = 1.0;
  }
  for (std::size_t i = 0; i < d_t; ++i) a(2 * dn + i, 2 * dn + i) = beta;
  return a;
}

/// Eigenvalue pair of the continuous 2x2 block [[0, 1], [-lambda, -alpha]]:
/// -(alpha -+ sqrt(alpha^2 - 4 lambda)) / 2.
inline std::pair<std::complex<double>, std::complex<double>> block_eigenvalues_continuous(
    double lambda, double alpha) {
  double disc = alpha * alpha - 4.0 * lambda;
  if (disc >= 0.0) {
    double sq = std::sqrt(disc);
    return {{0.5 * (-alpha + sq), 0.0}, {0.5 * (-alpha - sq), 0.0}};
  }
  double im = 0.5 * std::sqrt(-disc);
  return {{-0.5 * alpha, im}, {-0.5 * alpha, -im}};
}

/// Eigenvalue pair of the discrete 2x2 block [[1+b-g lambda, -b], [1, 0]]:
/// (1+b-g lambda)/2 +- sqrt(((1+b-g lambda)/2)^2 - b). Both have modulus
/// sqrt(beta) when the discriminant is <= 0.
inline std::pair<std::complex<double>, std::complex<double>> block_eigenvalues_discrete(
    double lambda, double gamma, double beta) {
  double c = 0.5 * (1.0 + beta - gamma * lambda);
  double disc = c * c - beta;
  if (disc >= 0.0) {
    double sq = std::sqrt(disc);
    return {{c + sq, 0.0}, {c - sq, 0.0}};
  }
  double im = std::sqrt(-disc);
  return {{c, im}, {c, -im}};
}

enum class SpectralKind { discrete, continuous };

/// Eigenvalues of a system matrix next to the matching closed-form rate.
/// rho is the spectral radius for discrete matrices and the spectral
/// abscissa (max real part) for continuous ones; theory_rate is the value
/// predicted from the block closed forms, and max_abs_discrepancy their gap.
struct SpectralReport {
  SpectralKind kind = SpectralKind::discrete;
  std::vector<std::complex<double>> eigenvalues;
  double rho = 0.0;
  double theory_rate = 0.0;
  double max_abs_discrepancy = 0.0;
};

inline SpectralReport spectral_report_discrete(const Mat& h, std::size_t d_t, double gamma,
                                               double beta) {
  Mat a = discrete_system_matrix(h, d_t, gamma, beta);
  SpectralReport rep;
  rep.kind = SpectralKind::discrete;
  rep.eigenvalues = eigenvalues(a);
  rep.rho = 0.0;
  for (const auto& l : rep.eigenvalues) rep.rho = std::max(rep.rho, std::abs(l));
  double theory = d_t > 0 ? beta : 0.0;
  for (double lam : jacobi_eigenvalues(h)) {
    auto [e1, e2] = block_eigenvalues_discrete(lam, gamma, beta);
    theory = std::max({theory, std::abs(e1), std::abs(e2)});
  }
  rep.theory_rate = theory;
  rep.max_abs_discrepancy = std::abs(rep.rho - theory);
  return rep;
}

inline SpectralReport spectral_report_continuous(const Mat& h, std::size_t d_t, double alpha) {
  Mat a = continuous_system_matrix(h, d_t, alpha);
  SpectralReport rep;
  rep.kind = SpectralKind::continuous;
  rep.eigenvalues = eigenvalues(a);
  double abscissa = rep.eigenvalues.front().real();
  for (const auto& l : rep.eigenvalues) abscissa = std::max(abscissa, l.real());
  rep.rho = abscissa;
  double theory = d_t > 0 ? -alpha : -std::numeric_limits<double>::infinity();
  for (double lam : jacobi_eigenvalues(h)) {
    auto [e1, e2] = block_eigenvalues_continuous(lam, alpha);
    theory = std::max({theory, e1.real(), e2.real()});
  }
  rep.theory_rate = theory;
  rep.max_abs_discrepancy = std::abs(rep.rho - theory);
  return rep;
}

}  // namespace hblab

#pragma once

// Dense eigenvalue routines for small matrices: cyclic Jacobi for symmetric
// input, Hessenberg reduction plus Francis double-shift QR for the general
// case. Both are used to cross-validate closed-form spectra, so they are
// self-contained rather than delegated to a BLAS/LAPACK build.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hblab/linalg.hpp"

namespace hblab {

struct NumericalFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr std::size_t kMaxEigenDim = 64;  // desk scale

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, ascending.
inline Vec jacobi_eigenvalues(Mat a, double tol = 1e-12, int max_sweeps = 128) {
  std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("jacobi_eigenvalues: matrix not square");
  if (n > kMaxEigenDim) throw std::invalid_argument("jacobi_eigenvalues: dimension above desk scale");
  if (!is_symmetric(a)) throw std::invalid_argument("jacobi_eigenvalues: matrix not symmetric");
  if (n == 0) return {};

  double norm_a = frobenius_norm(a);
  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm() <= tol * norm_a) break;
    if (sweep == max_sweeps - 1)
      throw NumericalFailureError("jacobi_eigenvalues: no convergence within sweep cap");
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          double arp = a(r, p), arq = a(r, q);
          a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
          a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
        }
      }
    }
  }

  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace detail {

/// Eigenvalues of [[a, b], [c, d]] with a cancellation-free discriminant
/// ((a-d)/2)^2 + bc. |disc| below a few ulps of its own magnitude scale is
/// treated as a coincident pair, which keeps the modulus of nearly defective
/// blocks exact instead of O(sqrt(eps)) off.
inline void eig2x2(double a, double b, double c, double d,
                   std::complex<double>& l1, std::complex<double>& l2) {
  double m = 0.5 * (a + d);
  double p = 0.5 * (a - d);
  double bc = b * c;
  double disc = p * p + bc;
  double scale = p * p + std::abs(b) * std::abs(c);
  double eps = std::numeric_limits<double>::epsilon();
  if (disc > 4.0 * eps * scale) {
    double sq = std::sqrt(disc);
    double big = m >= 0.0 ? m + sq : m - sq;  // root of larger magnitude
    double det = a * d - bc;
    double small = big != 0.0 ? det / big : m - std::copysign(sq, m);
    l1 = {big, 0.0};
    l2 = {small, 0.0};
  } else {
    double im = std::sqrt(std::max(0.0, -disc));
    l1 = {m, im};
    l2 = {m, -im};
  }
}

inline void hessenberg_reduce(Mat& h) {
  std::size_t n = h.rows();
  if (n < 3) return;
  Vec v(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) xnorm += h(i, k) * h(i, k);
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    double alpha = h(k + 1, k) >= 0.0 ? -xnorm : xnorm;
    double vnorm2 = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      v[i] = h(i, k);
      if (i == k + 1) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    if (vnorm2 == 0.0) continue;
    double beta = 2.0 / vnorm2;
    // left: H <- (I - beta v v^T) H
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) s += v[i] * h(i, j);
      s *= beta;
      for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= s * v[i];
    }
    // right: H <- H (I - beta v v^T)
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) s += h(i, j) * v[j];
      s *= beta;
      for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= s * v[j];
    }
    h(k + 1, k) = alpha;
    for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
  }
}

}  // namespace detail

/// Eigenvalues of a general real square matrix: Hessenberg reduction followed
/// by Francis double-shift QR. Subdiagonal entries deflate when below
/// 1e-12 * ||A||_F (or a few ulps of the neighbouring diagonal magnitudes).
/// Throws NumericalFailureError once the iteration cap (100 n by default) is
/// exceeded.
inline std::vector<std::complex<double>> eigenvalues(const Mat& a,
                                                     std::size_t max_iters_per_n = 100) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("eigenvalues: matrix not square");
  if (n > kMaxEigenDim) throw std::invalid_argument("eigenvalues: dimension above desk scale");
  std::vector<std::complex<double>> ev(n);
  if (n == 0) return ev;
  if (n == 1) {
    ev[0] = {a(0, 0), 0.0};
    return ev;
  }

  Mat h = a;
  detail::hessenberg_reduce(h);

  const double eps = std::numeric_limits<double>::epsilon();
  const double defl = 1e-12 * frobenius_norm(a) + std::numeric_limits<double>::min();
  auto negligible = [&](int i) {
    return std::abs(h(i, i - 1)) <=
           std::max(defl, eps * (std::abs(h(i - 1, i - 1)) + std::abs(h(i, i))));
  };

  std::size_t iters = 0;
  const std::size_t iter_cap = max_iters_per_n * n;
  int p = static_cast<int>(n) - 1;
  int stuck = 0;  // sweeps since the active end last deflated

  while (p >= 0) {
    if (p == 0) {
      ev[0] = {h(0, 0), 0.0};
      break;
    }
    if (negligible(p)) {
      h(p, p - 1) = 0.0;
      ev[p] = {h(p, p), 0.0};
      --p;
      stuck = 0;
      continue;
    }
    if (p == 1 || negligible(p - 1)) {
      if (p > 1) h(p - 1, p - 2) = 0.0;
      detail::eig2x2(h(p - 1, p - 1), h(p - 1, p), h(p, p - 1), h(p, p), ev[p - 1], ev[p]);
      p -= 2;
      stuck = 0;
      continue;
    }

    if (++iters > iter_cap) throw NumericalFailureError("eigenvalues: QR iteration cap exceeded");

    // active block [l, p], size >= 3 here
    int l = p - 1;
    while (l > 0 && !negligible(l)) --l;
    if (l > 0) h(l, l - 1) = 0.0;

    // double shift from the trailing 2x2; exceptional shift when stuck
    double s, t;
    if (++stuck % 16 == 0) {
      double w = std::abs(h(p, p - 1)) + std::abs(h(p - 1, p - 2));
      s = 1.5 * w;
      t = -0.4375 * w * w;
    } else {
      s = h(p - 1, p - 1) + h(p, p);
      t = h(p - 1, p - 1) * h(p, p) - h(p - 1, p) * h(p, p - 1);
    }

    // first column of (H - aI)(H - bI), a + b = s, ab = t
    double x = h(l, l) * h(l, l) + h(l, l + 1) * h(l + 1, l) - s * h(l, l) + t;
    double y = h(l + 1, l) * (h(l, l) + h(l + 1, l + 1) - s);
    double z = h(l + 2, l + 1) * h(l + 1, l);

    // chase the bulge
    for (int k = l; k <= p - 2; ++k) {
      double v0 = x, v1 = y, v2 = z;
      double vn = std::sqrt(v0 * v0 + v1 * v1 + v2 * v2);
      if (vn != 0.0) {
        double alpha = v0 >= 0.0 ? -vn : vn;
        v0 -= alpha;
        double vnorm2 = v0 * v0 + v1 * v1 + v2 * v2;
        double beta = 2.0 / vnorm2;
        if (k > l) {  // this reflection annihilates the bulge in column k-1
          h(k, k - 1) = alpha;
          h(k + 1, k - 1) = 0.0;
          h(k + 2, k - 1) = 0.0;
        }
        for (int j = k; j <= p; ++j) {  // left, rows k..k+2
          double sum = beta * (v0 * h(k, j) + v1 * h(k + 1, j) + v2 * h(k + 2, j));
          h(k, j) -= sum * v0;
          h(k + 1, j) -= sum * v1;
          h(k + 2, j) -= sum * v2;
        }
        int rend = std::min(p, k + 3);
        for (int i = l; i <= rend; ++i) {  // right, cols k..k+2
          double sum = beta * (v0 * h(i, k) + v1 * h(i, k + 1) + v2 * h(i, k + 2));
          h(i, k) -= sum * v0;
          h(i, k + 1) -= sum * v1;
          h(i, k + 2) -= sum * v2;
        }
      }
      x = h(k + 1, k);
      y = h(k + 2, k);
      z = (k + 3 <= p) ? h(k + 3, k) : 0.0;
    }

    // trailing 2-row reflection annihilating h(p, p-2)
    double vn = std::sqrt(x * x + y * y);
    if (vn != 0.0) {
      double alpha = x >= 0.0 ? -vn : vn;
      double v0 = x - alpha, v1 = y;
      double vnorm2 = v0 * v0 + v1 * v1;
      if (vnorm2 != 0.0) {
        double beta = 2.0 / vnorm2;
        h(p - 1, p - 2) = alpha;
        h(p, p - 2) = 0.0;
        for (int j = p - 1; j <= p; ++j) {
          double sum = beta * (v0 * h(p - 1, j) + v1 * h(p, j));
          h(p - 1, j) -= sum * v0;
          h(p, j) -= sum * v1;
        }
        for (int i = l; i <= p; ++i) {
          double sum = beta * (v0 * h(i, p - 1) + v1 * h(i, p));
          h(i, p - 1) -= sum * v0;
          h(i, p) -= sum * v1;
        }
      }
    }
  }

  return ev;
}

/// Spectral radius via the generic eigensolver.
inline double spectral_radius(const Mat& a) {
  auto ev = eigenvalues(a);
  double r = 0.0;
  for (const auto& l : ev) r = std::max(r, std::abs(l));
  return r;
}

/// Spectral abscissa (max real part) via the generic eigensolver.
inline double spectral_abscissa(const Mat& a) {
  auto ev = eigenvalues(a);
  if (ev.empty()) throw std::invalid_argument("spectral_abscissa: empty matrix");
  double r = ev[0].real();
  for (const auto& l : ev) r = std::max(r, l.real());
  return r;
}

}  // namespace hblab

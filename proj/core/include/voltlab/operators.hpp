#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "voltlab/conv_algebra.hpp"
#include "voltlab/fnspace.hpp"
#include "voltlab/grid.hpp"
#include "voltlab/linop.hpp"

namespace voltlab {

/// Cumulative-sum operator (Vf)_i = h * sum_{j<=i} f_j, i.e. the left-rule
/// primitive that includes the current node. Lower-Toeplitz with all-ones
/// kernel; ||V||_p <= 1 on the weighted spaces for every p.
inline LinOp<double> volterra(Grid g) { return conv_matrix(ones_kernel<double>(g)); }

/// Pointwise multiplication by the node coordinate.
inline LinOp<double> mult_by_x(Grid g) {
  return LinOp<double>::diagonal_from(g.nodes());
}

/// Pointwise multiplication by an arbitrary sampled weight.
inline LinOp<double> mult_by(Grid g, const Vec& w) {
  if (w.size() != g.n) throw std::invalid_argument("mult_by: weight size mismatch");
  return LinOp<double>::diagonal_from(w);
}

/// Averaging operator (Cf)_i = (Vf)_i / max(x_i, h). The floor at h makes
/// row 0 the plain value f_0, so no special-casing of x = 0 is needed.
inline LinOp<double> cesaro(Grid g) {
  LinOp<double> v = volterra(g);
  typename LinOp<double>::MatS m(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    const double d = std::max(g.node(i), g.h);
    m.row(i) = v.mat.row(i) / d;
  }
  return LinOp<double>(std::move(m), OpTag::general);
}

/// Power-weighted primitive x^s * (Vf). For s < 0 the weight is evaluated at
/// max(x_i, h); s = -1 reproduces the averaging operator bit-for-bit.
inline LinOp<double> power_weighted_volterra(Grid g, double s) {
  LinOp<double> v = volterra(g);
  typename LinOp<double>::MatS m(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    if (s < 0.0) {
      // Divide (rather than multiply by x^s) so s = -1 matches the averaging
      // operator bit-for-bit.
      m.row(i) = v.mat.row(i) / std::pow(std::max(g.node(i), g.h), -s);
    } else {
      m.row(i) = v.mat.row(i) * std::pow(g.node(i), s);
    }
  }
  return LinOp<double>(std::move(m), OpTag::general);
}

/// Weighted cumulative sums: T_w f = w .* (V f) and S_w f = V (w .* f).
inline LinOp<double> weighted_volterra_left(Grid g, const Vec& w) {
  return mult_by(g, w) * volterra(g);
}
inline LinOp<double> weighted_volterra_right(Grid g, const Vec& w) {
  return volterra(g) * mult_by(g, w);
}

/// Change-of-variables conjugation for a nonnegative weight with positive
/// cumulative mass. Rows evaluate f at the piecewise-linear inverse phi of
/// the normalized cumulative weight and divide by the interpolated weight
/// there; J intertwines T_w with mass * V.
struct Intertwiner {
  LinOp<double> J;
  double mass = 0.0;        // h * sum(w): the discrete total weight
  int guard_rows = 0;       // rows where the interpolated weight vanished
};

/// Build the conjugation rows. Knot k of the normalized cumulative graph is
/// ((k+1)*h, c_k / mass); inversion walks the knots with ties broken toward
/// the LOWER node (flat segments arise wherever w vanishes, e.g. at 0).
/// Rows whose interpolated weight is <= 0 copy the next row's evaluation.
inline Intertwiner intertwiner(Grid g, const Vec& w) {
  const int n = g.n;
  if (w.size() != n) throw std::invalid_argument("intertwiner: weight size mismatch");
  for (int i = 0; i < n; ++i) {
    if (w[i] < 0.0) throw std::domain_error("intertwiner: weight must be nonnegative");
    if (i > 0 && w[i] == 0.0) {
      throw std::domain_error("intertwiner: weight must be positive away from 0");
    }
  }

  // Cumulative left-rule mass c_k = h * sum_{j<=k} w_j; knots ((k+1)h, c_k/A).
  Vec c(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) { acc += w[i]; c[i] = g.h * acc; }
  const double mass = c[n - 1];
  if (!(mass > 0.0)) throw std::domain_error("intertwiner: zero total mass");
  Vec yk(n + 1), xk(n + 1);
  yk[0] = 0.0; xk[0] = 0.0;
  for (int k = 0; k < n; ++k) { yk[k + 1] = c[k] / mass; xk[k + 1] = (k + 1) * g.h; }
  yk[n] = 1.0;  // exact upper knot

  // phi(t): lower tie-break = first knot interval whose right ordinate
  // reaches t; flat segments collapse to their left end.
  auto phi = [&](double t) {
    if (t <= yk[0]) return xk[0];
    int lo = 0, hi = n;  // invariant: yk[lo] < t <= yk[hi]
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (yk[mid] < t) lo = mid; else hi = mid;
    }
    const double dy = yk[hi] - yk[lo];
    if (dy <= 0.0) return xk[lo];
    return xk[lo] + (t - yk[lo]) / dy * (xk[hi] - xk[lo]);
  };

  // Row i: (Jf)(x_i) = f(phi(x_i)) / w(phi(x_i)), both by linear
  // interpolation of the node samples.
  using MatS = LinOp<double>::MatS;
  MatS m = MatS::Zero(n, n);
  auto fill_row = [&](int row, double t) -> bool {
    const double s = phi(t) / g.h;          // fractional node index
    int j = int(std::floor(s));
    double frac = s - j;
    if (j >= n - 1) { j = n - 2; frac = 1.0; }
    if (j < 0) { j = 0; frac = 0.0; }
    const double wv = (1.0 - frac) * w[j] + frac * w[j + 1];
    if (!(wv > 0.0)) return false;
    m(row, j) += (1.0 - frac) / wv;
    m(row, j + 1) += frac / wv;
    return true;
  };

  int guards = 0;
  std::vector<int> pending;
  for (int i = 0; i < n; ++i) {
    if (!fill_row(i, g.node(i))) pending.push_back(i);
  }
  for (auto it = pending.rbegin(); it != pending.rend(); ++it) {
    const int i = *it;
    if (i + 1 < n) m.row(i) = m.row(i + 1);  // copy the next row's evaluation
    ++guards;
  }
  return Intertwiner{LinOp<double>(std::move(m), OpTag::general), mass, guards};
}

/// Small non-convolution companion in the monomial coordinates e_k ~ x^k:
/// T = I + W with W the weighted forward shift W e_k = e_{k+1} / (k+1)
/// (cumulative summation on monomials), and M the plain forward shift
/// M e_k = e_{k+1} (coordinate multiplication). MT - TM = (T - I)^2 up to
/// roundoff; truncation is leak free because both shifts move mass toward
/// higher indices and drop it off the end, so the identity holds on the
/// full truncated matrices, not just an interior block.
struct ShiftExamplePair {
  LinOp<double> T;
  LinOp<double> M;
};

inline ShiftExamplePair shift_example(int n) {
  if (n < 3) throw std::invalid_argument("shift_example: need n >= 3");
  using MatS = LinOp<double>::MatS;
  MatS t = MatS::Identity(n, n);
  for (int k = 0; k + 1 < n; ++k) t(k + 1, k) = 1.0 / (k + 1);
  MatS m = MatS::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) m(k + 1, k) = 1.0;
  return {LinOp<double>(std::move(t), OpTag::general),
          LinOp<double>(std::move(m), OpTag::general)};
}

/// Weighted backward shift S e_0 = 0, S e_k = e_{k-1} / k -- the matrix model
/// used for the left-multiplication operator A |-> S A on n x n matrices.
inline LinOp<double> weighted_backward_shift(int n) {
  using MatS = LinOp<double>::MatS;
  MatS s = MatS::Zero(n, n);
  for (int k = 1; k < n; ++k) s(k - 1, k) = 1.0 / k;
  return LinOp<double>(std::move(s), OpTag::general);
}

/// Left multiplication Phi(A) = S * A acting on the space of n x n matrices.
struct LeftMultiplication {
  LinOp<double> s;

  explicit LeftMultiplication(int n) : s(weighted_backward_shift(n)) {}

  int n() const { return s.dim(); }

  Mat apply(const Mat& a) const {
    if (a.rows() != s.dim() || a.cols() != s.dim()) {
      throw std::invalid_argument("LeftMultiplication: shape mismatch");
    }
    return s.mat * a;
  }

  /// Matrix of Phi on column-major vec(A): kron(I, S), built explicitly.
  Mat vec_representation() const {
    const int n = s.dim();
    Mat k = Mat::Zero(n * n, n * n);
    for (int col = 0; col < n; ++col) {
      k.block(col * n, col * n, n, n) = s.mat;
    }
    return k;
  }
};

/// Diagonal rotation operator diag(exp(i*theta_1), ..., exp(i*theta_m)) on
/// sequence space; the angles must be distinct mod 2*pi.
inline LinOp<cplx> torus_rotation(const std::vector<double>& angles) {
  const int m = int(angles.size());
  if (m < 1) throw std::invalid_argument("torus_rotation: need at least one angle");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      double d = std::fmod(std::abs(angles[i] - angles[j]), two_pi);
      d = std::min(d, two_pi - d);
      if (d < 1e-12) {
        throw std::domain_error("torus_rotation: angles must be distinct mod 2*pi");
      }
    }
  }
  CVec d(m);
  for (int i = 0; i < m; ++i) d[i] = std::polar(1.0, angles[i]);
  return LinOp<cplx>::diagonal_from(d);
}

}  // namespace voltlab

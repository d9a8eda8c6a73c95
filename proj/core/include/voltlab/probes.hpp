#pragma once

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "voltlab/conv_algebra.hpp"
#include "voltlab/linop.hpp"
#include "voltlab/operators.hpp"

namespace voltlab {

struct DerivationRow {
  int n = 0;
  double absolute = 0.0;
  double relative = 0.0;
};

struct DerivationReport {
  std::vector<DerivationRow> rows;
  double canonicalization_deviation = 0.0;  // Toeplitz spread of S = [T, M]
  double commutation_defect = 0.0;          // ||[T, S]|| relative to scale
};

/// Residuals of T^n M - M T^n = n S T^(n-1) with S = [T, M], valid whenever
/// S commutes with T. For a convolution T the bracket is canonicalized back
/// into the algebra (after verifying it is Toeplitz to roundoff), which makes
/// [T, S] exactly zero thereafter; for general T the commutation of S with T
/// is checked numerically and a violation throws.
template <class S>
DerivationReport derivation_identity_report(const LinOp<S>& t, const LinOp<S>& m,
                                            int n_max) {
  if (t.dim() != m.dim()) throw std::invalid_argument("derivation: dim mismatch");
  if (n_max < 1) throw std::invalid_argument("derivation: n_max < 1");

  DerivationReport rep;
  LinOp<S> s = commutator(t, m);
  if (t.tag == OpTag::lower_toeplitz) {
    Grid g(t.dim());
    auto canon = to_conv_element<S>(s, g);
    rep.canonicalization_deviation = canon.max_deviation;
    s = conv_matrix(canon.element);
  }
  {
    const LinOp<S> ts = commutator(t, s);
    const double scale = t.max_abs() * s.max_abs();
    rep.commutation_defect = scale > 0.0 ? ts.max_abs() / scale : ts.max_abs();
    const double tol = 1e3 * std::numeric_limits<double>::epsilon();
    if (rep.commutation_defect > tol) {
      throw std::domain_error("derivation: S = [T, M] does not commute with T");
    }
  }

  LinOp<S> tn = t;  // T^n, kept in kernel form when T is a convolution
  for (int n = 1; n <= n_max; ++n) {
    const LinOp<S> lhs = tn * m - m * tn;
    const LinOp<S> rhs = double(n) * (s * power(t, n - 1));
    const double num = (lhs - rhs).frobenius();
    const double den = std::max({lhs.frobenius(), rhs.frobenius(), 1e-300});
    rep.rows.push_back({n, num, num / den});
    tn = tn * t;
  }
  return rep;
}

/// Pointwise-coordinate multiplication acts as a derivation of the
/// convolution product: x.*(a*b) = (x.*a)*b + a*(x.*b). The identity is an
/// exact rearrangement (x_k + x_{i-k} = x_i), so only roundoff remains.
template <class S>
double leibniz_residual(const ConvElement<S>& a, const ConvElement<S>& b) {
  require_same_grid(a.grid, b.grid, "leibniz_residual");
  const Vec x = a.grid.nodes();
  auto weigh = [&](const ConvElement<S>& e) {
    ConvElement<S> out = e;
    for (int i = 0; i < e.grid.n; ++i) out.coeffs[i] *= S(x[i]);
    return out;
  };
  const ConvElement<S> lhs = weigh(star(a, b));
  const ConvElement<S> rhs_a = star(weigh(a), b);
  const ConvElement<S> rhs_b = star(a, weigh(b));
  double num = 0.0, den = 0.0;
  for (int i = 0; i < a.grid.n; ++i) {
    num = std::max(num, std::abs(lhs.coeffs[i] - rhs_a.coeffs[i] - rhs_b.coeffs[i]));
    den = std::max({den, std::abs(lhs.coeffs[i]), std::abs(rhs_a.coeffs[i]),
                    std::abs(rhs_b.coeffs[i])});
  }
  return den > 0.0 ? num / den : num;
}

struct CommutantReport {
  int dimension = 0;
  double gap = std::numeric_limits<double>::infinity();
  double sigma_max = 0.0;
  double largest_zero = 0.0;
  double smallest_nonzero = std::numeric_limits<double>::infinity();
};

/// Dimension of {X : XA = AX, XB = BX} via the singular values of the
/// stacked Sylvester map vec(X) |-> (XA - AX, XB - BX) on column-major vec.
/// Singular values below tol_rel * sigma_max count as zero; the gap between
/// the smallest kept and the largest dropped value measures how clear-cut
/// the dimension count is.
inline CommutantReport joint_commutant(const Mat& a, const Mat& b,
                                       double tol_rel = 1e-10) {
  const int n = int(a.rows());
  if (a.cols() != n || b.rows() != n || b.cols() != n) {
    throw std::invalid_argument("joint_commutant: need two square matrices of equal size");
  }
  const int nn = n * n;
  Mat k = Mat::Zero(2 * nn, nn);
  const auto fill = [&](const Mat& op, int row_offset) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int r = row_offset + j * n + i;
        // (X op)(i,j) = sum_k X(i,k) op(k,j)
        for (int kk = 0; kk < n; ++kk) k(r, kk * n + i) += op(kk, j);
        // -(op X)(i,j) = -sum_k op(i,k) X(k,j)
        for (int kk = 0; kk < n; ++kk) k(r, j * n + kk) -= op(i, kk);
      }
    }
  };
  fill(a, 0);
  fill(b, nn);

  Eigen::BDCSVD<Mat> svd(k);
  const Vec sv = svd.singularValues();
  CommutantReport rep;
  rep.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  const double tol = tol_rel * rep.sigma_max;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] <= tol) {
      rep.dimension += 1;
      rep.largest_zero = std::max(rep.largest_zero, sv[i]);
    } else {
      rep.smallest_nonzero = std::min(rep.smallest_nonzero, sv[i]);
    }
  }
  rep.gap = rep.largest_zero > 0.0 ? rep.smallest_nonzero / rep.largest_zero
                                   : std::numeric_limits<double>::infinity();
  return rep;
}

/// Numerical rank / nullity of a dense map with a relative singular-value
/// cutoff; used for kernel/range dimension probes of structured operators.
struct RankReport {
  int rank = 0;
  int nullity = 0;
  double sigma_max = 0.0;
};

inline RankReport rank_nullity(const Mat& m, double tol_rel = 1e-10) {
  Eigen::BDCSVD<Mat> svd(m);
  const Vec sv = svd.singularValues();
  RankReport rep;
  rep.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  const double tol = tol_rel * rep.sigma_max;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) rep.rank += 1;
  }
  rep.nullity = int(m.cols()) - rep.rank;
  return rep;
}

/// Orthonormal basis of the column space (for intersection-dimension probes).
inline Mat column_space_basis(const Mat& m, double tol_rel = 1e-10) {
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  const double tol = tol_rel * (sv.size() > 0 ? sv[0] : 0.0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > tol) ++r;
  }
  return svd.matrixU().leftCols(r);
}

/// dim(span(U) ∩ span(W)) for orthonormal-column inputs: the number of
/// singular values of U^T W equal to 1 (within tolerance).
inline int subspace_intersection_dim(const Mat& u, const Mat& w, double tol = 1e-8) {
  if (u.cols() == 0 || w.cols() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(Mat(u.transpose() * w));
  const Vec sv = svd.singularValues();
  int d = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] >= 1.0 - tol) ++d;
  }
  return d;
}

}  // namespace voltlab

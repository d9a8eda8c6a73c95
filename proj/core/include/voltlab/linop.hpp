#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <stdexcept>
#include <type_traits>

#include "voltlab/grid.hpp"

namespace voltlab {

/// Structure tag. Products and commutators dispatch on it so that algebraic
/// identities that hold exactly in exact arithmetic also hold exactly in
/// floating point:
///   * lower_toeplitz x lower_toeplitz goes through the symmetric convolution
///     of the defining columns (never GEMM), so such products commute
///     bitwise;
///   * diagonal factors scale rows/columns with a single rounding per entry.
enum class OpTag { general, lower_toeplitz, diagonal };

/// c_i = sum_{k=0..i} a_k * b_{i-k}, accumulated in symmetric pair order
/// (term k together with term i-k, middle term once). The summation order is
/// invariant under swapping a and b, so conv_sym(a,b) == conv_sym(b,a)
/// bitwise -- IEEE multiplication and addition are commutative.
template <class S>
Eigen::Vector<S, Eigen::Dynamic> conv_sym(
    const Eigen::Vector<S, Eigen::Dynamic>& a,
    const Eigen::Vector<S, Eigen::Dynamic>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("conv_sym: size mismatch");
  const Eigen::Index n = a.size();
  Eigen::Vector<S, Eigen::Dynamic> c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    S acc{};
    for (Eigen::Index k = 0; 2 * k <= i; ++k) {
      const Eigen::Index m = i - k;
      if (k < m) {
        acc += a[k] * b[m] + a[m] * b[k];
      } else {
        acc += a[k] * b[k];
      }
    }
    c[i] = acc;
  }
  return c;
}

/// Dense square operator with a structure tag. The matrix is always stored
/// explicitly (desk scale), the tag only changes how products are evaluated.
template <class S = double>
struct LinOp {
  using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using VecS = Eigen::Vector<S, Eigen::Dynamic>;

  MatS mat;
  OpTag tag = OpTag::general;

  LinOp() = default;
  LinOp(MatS m, OpTag t) : mat(std::move(m)), tag(t) {
    if (mat.rows() != mat.cols()) {
      throw std::invalid_argument("LinOp: matrix must be square");
    }
  }

  int dim() const { return int(mat.rows()); }

  static LinOp identity(int n) {
    return LinOp(MatS::Identity(n, n), OpTag::diagonal);
  }

  static LinOp diagonal_from(const VecS& d) {
    MatS m = MatS::Zero(d.size(), d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return LinOp(std::move(m), OpTag::diagonal);
  }

  /// Build from the first column of a lower-triangular Toeplitz matrix
  /// (entries already carry any quadrature weight).
  static LinOp lower_toeplitz_from_column(const VecS& col) {
    const Eigen::Index n = col.size();
    MatS m = MatS::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) m(i, j) = col[i - j];
    }
    return LinOp(std::move(m), OpTag::lower_toeplitz);
  }

  VecS column0() const { return mat.col(0); }

  VecS apply(const VecS& v) const {
    if (v.size() != mat.rows()) throw std::invalid_argument("LinOp::apply: size mismatch");
    switch (tag) {
      case OpTag::lower_toeplitz:
        return conv_sym<S>(column0(), v);
      case OpTag::diagonal: {
        VecS out(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = mat(i, i) * v[i];
        return out;
      }
      case OpTag::general:
      default:
        return mat * v;
    }
  }

  LinOp adjoint() const {
    OpTag t = (tag == OpTag::diagonal) ? OpTag::diagonal : OpTag::general;
    return LinOp(mat.adjoint(), t);
  }

  double max_abs() const {
    return mat.size() == 0 ? 0.0 : mat.cwiseAbs().maxCoeff();
  }

  double frobenius() const { return mat.norm(); }

  /// Largest singular value (dense SVD -- fine at desk scale).
  double opnorm2() const {
    Eigen::BDCSVD<MatS> svd(mat);
    return svd.singularValues()[0];
  }
};

template <class S>
bool bitwise_equal(const LinOp<S>& a, const LinOp<S>& b) {
  if (a.dim() != b.dim()) return false;
  return a.mat == b.mat;
}

template <class S>
LinOp<S> operator*(const LinOp<S>& a, const LinOp<S>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("LinOp*: dim mismatch");
  const int n = a.dim();
  using MatS = typename LinOp<S>::MatS;

  if (a.tag == OpTag::lower_toeplitz && b.tag == OpTag::lower_toeplitz) {
    return LinOp<S>::lower_toeplitz_from_column(
        conv_sym<S>(a.column0(), b.column0()));
  }
  if (a.tag == OpTag::diagonal) {
    MatS out(n, n);
    for (int i = 0; i < n; ++i) out.row(i) = a.mat(i, i) * b.mat.row(i);
    return LinOp<S>(std::move(out),
                    b.tag == OpTag::diagonal ? OpTag::diagonal : OpTag::general);
  }
  if (b.tag == OpTag::diagonal) {
    MatS out(n, n);
    for (int j = 0; j < n; ++j) out.col(j) = a.mat.col(j) * b.mat(j, j);
    return LinOp<S>(std::move(out),
                    a.tag == OpTag::diagonal ? OpTag::diagonal : OpTag::general);
  }
  return LinOp<S>(a.mat * b.mat, OpTag::general);
}

template <class S>
LinOp<S> operator+(const LinOp<S>& a, const LinOp<S>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("LinOp+: dim mismatch");
  return LinOp<S>(a.mat + b.mat, a.tag == b.tag ? a.tag : OpTag::general);
}

template <class S>
LinOp<S> operator-(const LinOp<S>& a, const LinOp<S>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("LinOp-: dim mismatch");
  return LinOp<S>(a.mat - b.mat, a.tag == b.tag ? a.tag : OpTag::general);
}

template <class S, class T>
LinOp<S> operator*(T scalar, const LinOp<S>& a) {
  return LinOp<S>(S(scalar) * a.mat, a.tag);
}

/// A*B - B*A through the structure-aware product. For two lower-Toeplitz
/// operators both products share one symmetric convolution, so the result is
/// an exactly zero matrix.
template <class S>
LinOp<S> commutator(const LinOp<S>& a, const LinOp<S>& b) {
  return a * b - b * a;
}

template <class S>
LinOp<S> power(const LinOp<S>& a, int n) {
  if (n < 0) throw std::invalid_argument("power: negative exponent");
  if (n == 0) return LinOp<S>::identity(a.dim());
  LinOp<S> acc = a;  // start from a itself so the structure tag is preserved
  for (int k = 1; k < n; ++k) acc = acc * a;
  return acc;
}

}  // namespace voltlab

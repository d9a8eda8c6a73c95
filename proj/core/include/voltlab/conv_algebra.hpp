#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

#include "voltlab/grid.hpp"
#include "voltlab/linop.hpp"

namespace voltlab {

/// Element of the discrete convolution algebra: the coefficient sequence
/// (a_0, ..., a_{n-1}) of the operator f |-> h * sum_{k<=i} a_k f_{i-k}.
/// The algebra is commutative; with the symmetric summation in conv_sym the
/// computed products commute bitwise as well.
template <class S = double>
struct ConvElement {
  Grid grid;
  Eigen::Vector<S, Eigen::Dynamic> coeffs;

  ConvElement() = default;
  ConvElement(Grid g, Eigen::Vector<S, Eigen::Dynamic> c)
      : grid(g), coeffs(std::move(c)) {
    if (coeffs.size() != grid.n) {
      throw std::invalid_argument("ConvElement: coefficient count != grid size");
    }
  }

  bool is_zero() const { return coeffs.cwiseAbs().maxCoeff() == 0.0; }
};

template <class S = double>
ConvElement<S> ones_kernel(Grid g) {
  return ConvElement<S>(g, Eigen::Vector<S, Eigen::Dynamic>::Ones(g.n));
}

/// Algebra product (a * b)_i = h * sum_{k<=i} a_k b_{i-k}.
template <class S>
ConvElement<S> star(const ConvElement<S>& a, const ConvElement<S>& b) {
  require_same_grid(a.grid, b.grid, "star");
  Eigen::Vector<S, Eigen::Dynamic> c = conv_sym<S>(a.coeffs, b.coeffs);
  c *= S(a.grid.h);
  return ConvElement<S>(a.grid, std::move(c));
}

/// Matrix of the convolution operator: entries h * a_{i-j} on and below the
/// diagonal. The scaled first column h*a is the single source of truth; every
/// other column is a bit-copy of its tail.
template <class S>
LinOp<S> conv_matrix(const ConvElement<S>& a) {
  Eigen::Vector<S, Eigen::Dynamic> col = a.coeffs;
  col *= S(a.grid.h);
  return LinOp<S>::lower_toeplitz_from_column(col);
}

template <class S>
struct Canonicalized {
  ConvElement<S> element;
  double max_deviation = 0.0;  // worst within-diagonal spread found
};

/// Recover the convolution element of an operator that is lower-Toeplitz up
/// to roundoff: verifies that every diagonal is constant to within
/// tol_rel * scale (and that the strict upper triangle vanishes at the same
/// tolerance), then takes column 0 as the representative. Throws if the
/// operator is not a convolution at that tolerance.
template <class S>
Canonicalized<S> to_conv_element(const LinOp<S>& op, Grid g,
                                 double tol_rel = 64 * std::numeric_limits<double>::epsilon()) {
  if (op.dim() != g.n) throw std::invalid_argument("to_conv_element: grid mismatch");
  const int n = g.n;
  const double scale = op.max_abs();
  const double tol = tol_rel * (scale == 0.0 ? 1.0 : scale);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double dev = (i >= j) ? std::abs(op.mat(i, j) - op.mat(i - j, 0))
                                  : std::abs(op.mat(i, j));
      worst = std::max(worst, dev);
    }
  }
  if (worst > tol) {
    throw std::domain_error("to_conv_element: operator is not a convolution (deviation " +
                            std::to_string(worst) + " > tol " + std::to_string(tol) + ")");
  }
  Eigen::Vector<S, Eigen::Dynamic> coeffs = op.mat.col(0);
  coeffs /= S(g.h);
  return {ConvElement<S>(g, std::move(coeffs)), worst};
}

}  // namespace voltlab

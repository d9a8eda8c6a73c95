#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "voltlab/grid.hpp"

namespace voltlab {

/// Sampled function on a uniform grid, tagged with the exponent p of the
/// norm it lives in. The samples are plain node values; all quadrature
/// weights live in the norm/pairing routines.
template <class S = double>
struct GridFunction {
  Grid grid;
  Eigen::Vector<S, Eigen::Dynamic> samples;
  double p = 2.0;

  GridFunction() = default;
  GridFunction(Grid g, Eigen::Vector<S, Eigen::Dynamic> v, double p_exp = 2.0)
      : grid(g), samples(std::move(v)), p(p_exp) {
    if (samples.size() != grid.n) {
      throw std::invalid_argument("GridFunction: sample count != grid size");
    }
  }

  static GridFunction constant(Grid g, S value, double p_exp = 2.0) {
    return GridFunction(g, Eigen::Vector<S, Eigen::Dynamic>::Constant(g.n, value), p_exp);
  }

  static GridFunction sample(Grid g, const std::function<S(double)>& f,
                             double p_exp = 2.0) {
    Eigen::Vector<S, Eigen::Dynamic> v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = f(g.node(i));
    return GridFunction(g, std::move(v), p_exp);
  }
};

using RealFn = GridFunction<double>;
using CplxFn = GridFunction<cplx>;

inline double conjugate_exponent(double p) {
  if (p < 1.0) throw std::invalid_argument("conjugate_exponent: p < 1");
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

/// Weighted p-norm (weight^(1/p) * ||v||_p), robust against overflow and
/// underflow: samples are rescaled by their max modulus before powering.
/// weight = h gives the integral norm, weight = 1 the sequence norm.
template <class Derived>
double lp_norm(const Eigen::MatrixBase<Derived>& v, double p, double weight) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p < 1");
  const Eigen::Index n = v.size();
  double m = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
  if (m == 0.0) return 0.0;
  if (std::isinf(p)) return m;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::abs(v[i]) / m;
    acc += std::pow(r, p);
  }
  return m * std::pow(weight * acc, 1.0 / p);
}

template <class S>
double norm(const GridFunction<S>& f) {
  return lp_norm(f.samples, f.p, f.grid.h);
}

/// Duality pairing <g, f> = h * sum_i conj(g_i) * f_i. Conjugate-linear in
/// the first argument so that pair(f, f) = ||f||_2^2 in the p = 2 case.
template <class DG, class DF>
auto pair(const Eigen::MatrixBase<DG>& g, const Eigen::MatrixBase<DF>& f,
          double weight) -> typename DF::Scalar {
  if (g.size() != f.size()) {
    throw std::invalid_argument("pair: size mismatch");
  }
  using S = typename DF::Scalar;
  S acc{};
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if constexpr (std::is_same_v<typename DG::Scalar, cplx>) {
      acc += std::conj(g[i]) * S(f[i]);
    } else {
      acc += g[i] * f[i];
    }
  }
  return S(weight) * acc;
}

template <class S>
S pair(const GridFunction<S>& g, const GridFunction<S>& f) {
  require_same_grid(g.grid, f.grid, "pair");
  return pair(g.samples, f.samples, f.grid.h);
}

template <class S>
inline double phase_abs(S z) { return std::abs(z); }

/// Norming functional of a nonzero f in L_p (1 < p < inf): the unique g with
/// ||g||_q = 1 and <g, f> = ||f||_p. Entrywise
///   g_i = phase(f_i) * (|f_i| / ||f||)^(p-1),
/// evaluated against the already-normalized ratio so extreme sample values
/// cannot overflow the power.
template <class S>
Eigen::Vector<S, Eigen::Dynamic> norming_samples(
    const Eigen::Vector<S, Eigen::Dynamic>& f, double p, double weight) {
  if (!(p > 1.0) || std::isinf(p)) {
    throw std::invalid_argument("norming_samples: need 1 < p < inf");
  }
  const double nf = lp_norm(f, p, weight);
  if (nf == 0.0) throw std::invalid_argument("norming_samples: zero input");
  Eigen::Vector<S, Eigen::Dynamic> g(f.size());
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double a = std::abs(f[i]);
    if (a == 0.0) {
      g[i] = S(0);
      continue;
    }
    const double mag = std::pow(a / nf, p - 1.0);
    if constexpr (std::is_same_v<S, cplx>) {
      g[i] = (f[i] / a) * mag;
    } else {
      g[i] = std::copysign(mag, f[i]);
    }
  }
  return g;
}

template <class S>
GridFunction<S> norming_functional(const GridFunction<S>& f) {
  return GridFunction<S>(f.grid, norming_samples<S>(f.samples, f.p, f.grid.h),
                         conjugate_exponent(f.p));
}

/// Norming functional rescaled by ||f||^(-q/p): the variant used to build
/// summable separating families. Pairs with f to ||f||^((p-q)/p) and has
/// dual norm ||f||^(-q/p).
template <class S>
GridFunction<S> scaled_norming_functional(const GridFunction<S>& f, double q_scale) {
  GridFunction<S> g = norming_functional(f);
  const double nf = norm(f);
  g.samples *= S(std::pow(nf, -q_scale / f.p));
  return g;
}

/// Forward-difference H^1 seminorm: ||f'||_2 with f' sampled on the n-1
/// interior cells.
template <class S>
double derivative_l2_norm(const GridFunction<S>& f) {
  const int n = f.grid.n;
  double acc = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double d = std::abs(f.samples[i + 1] - f.samples[i]) / f.grid.h;
    acc += d * d;
  }
  return std::sqrt(f.grid.h * acc);
}

/// Left-endpoint quadrature, the rule every operator in this library is
/// built on.
template <class S>
S integral(const GridFunction<S>& f) {
  S acc{};
  for (int i = 0; i < f.grid.n; ++i) acc += f.samples[i];
  return S(f.grid.h) * acc;
}

/// Composite Simpson on the sampled nodes (trapezoid fix-up when the cell
/// count is odd). Reference quadrature for convergence tests only.
inline double simpson_integral(const Vec& v, double h) {
  const Eigen::Index n = v.size();
  if (n < 2) return 0.0;
  double acc = 0.0;
  Eigen::Index i = 0;
  for (; i + 2 < n; i += 2) acc += h / 3.0 * (v[i] + 4.0 * v[i + 1] + v[i + 2]);
  if (i + 1 < n) acc += h / 2.0 * (v[i] + v[i + 1]);
  return acc;
}

}  // namespace voltlab

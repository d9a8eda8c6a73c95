#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "voltlab/conv_algebra.hpp"
#include "voltlab/dynamics.hpp"
#include "voltlab/fnspace.hpp"
#include "voltlab/operators.hpp"

namespace voltlab {

/// A commuting family built around a convolution operator T:
///   C = conv(u), B = conv(v), R = T^2, S = [T, M] canonicalized back into
///   the algebra (M = multiplication by x).
/// All five pairwise commutators inside {T, C, B, R, S} are exactly zero
/// matrices because every product goes through the kernel algebra; the
/// constructor measures and stores the evidence instead of assuming it.
struct WitnessSet {
  Grid grid;
  LinOp<double> T, M, C, B, S, R;
  ConvElement<double> u, v;
  Vec y;  // canonical cyclic vector (u's samples)

  double canon_deviation = 0.0;  // Toeplitz spread of [T, M] before canonicalization
  double cv_bu_gap = 0.0;        // max |C v - B u|, zero on dyadic grids
  double comm_max = 0.0;         // worst commutator inside the family (must be 0)
  bool cs_nonzero = false;       // C S != 0, i.e. the family is not degenerate
  bool reduced_chain = false;    // (B - C M) y == 0, the shape the margins use

  void require_clean() const {
    if (comm_max != 0.0) {
      throw std::domain_error("WitnessSet: family does not commute exactly");
    }
    if (!cs_nonzero) {
      throw std::domain_error("WitnessSet: C S vanishes, margins are vacuous");
    }
  }
};

/// Assemble the family from explicit kernels u, v. The canonical choice
/// v = x .* u makes C(My) = By an exact identity (both sides are the same
/// symmetric convolution of {u, x .* u}); arbitrary v is allowed and simply
/// leaves reduced_chain false.
inline WitnessSet build_witness_set(Grid g, const LinOp<double>& t, const Vec& u_kernel,
                                    const Vec& v_kernel) {
  if (t.tag != OpTag::lower_toeplitz) {
    throw std::invalid_argument("build_witness_set: T must be a convolution operator");
  }
  if (u_kernel.size() != g.n || v_kernel.size() != g.n) {
    throw std::invalid_argument("build_witness_set: kernel size mismatch");
  }
  if (u_kernel.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("build_witness_set: u must be nonzero");
  }

  WitnessSet w;
  w.grid = g;
  w.T = t;
  w.M = mult_by_x(g);
  w.u = ConvElement<double>(g, u_kernel);
  w.v = ConvElement<double>(g, v_kernel);
  w.C = conv_matrix(w.u);
  w.B = conv_matrix(w.v);
  w.R = t * t;

  auto canon = to_conv_element<double>(commutator(w.T, w.M), g);
  w.canon_deviation = canon.max_deviation;
  w.S = conv_matrix(canon.element);

  w.y = u_kernel;

  // Evidence, not assumption:
  w.cv_bu_gap = (w.C.apply(v_kernel) - w.B.apply(u_kernel)).cwiseAbs().maxCoeff();
  w.comm_max = 0.0;
  for (const LinOp<double>* a : {&w.C, &w.B, &w.S, &w.R}) {
    w.comm_max = std::max(w.comm_max, commutator(w.T, *a).max_abs());
  }
  w.comm_max = std::max(w.comm_max, commutator(w.C, w.B).max_abs());
  w.cs_nonzero = (w.C * w.S).max_abs() > 0.0;

  const Vec defect = w.B.apply(w.y) - w.C.apply(w.M.apply(w.y));
  const double scale = std::max(1e-300, w.B.apply(w.y).cwiseAbs().maxCoeff());
  w.reduced_chain = defect.cwiseAbs().maxCoeff() <= 64 * std::numeric_limits<double>::epsilon() * scale;
  return w;
}

/// Canonical witnesses grown from a start vector: y = T^2 x, u = y,
/// v = x .* y.
inline WitnessSet canonical_witness_set(Grid g, const LinOp<double>& t, const Vec& x) {
  if (x.size() != g.n) throw std::invalid_argument("canonical_witness_set: size mismatch");
  const Vec y = t.apply(t.apply(x));
  Vec v = y;
  for (int i = 0; i < g.n; ++i) v[i] *= g.node(i);
  return build_witness_set(g, t, y, v);
}

struct MarginRow {
  int n = 0;
  double log_lhs = -std::numeric_limits<double>::infinity();
  double log_rhs = -std::numeric_limits<double>::infinity();
  double margin = 1.0;  // (rhs - lhs) / rhs, computed as 1 - exp(log_lhs - log_rhs)
};

struct FunctionalGrowthReport {
  std::vector<MarginRow> rows;
  double c_dual = 0.0;                // ||(B - C M)^H h||_q
  double chain_residual_max = 0.0;    // three-term commuting-algebra identity
  double reduced_residual_max = std::numeric_limits<double>::quiet_NaN();
  bool reduced_applies = false;
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Margins of the orbit-functional bound
///   (n+1) |<h, C S T^n y>|  <=  c * ||T^n y||_p,
///   c = ||(B - C M)^H h||_q,
/// together with residuals of the identity that produces it:
///   (B - CM) T^(n+1) y = T^(n+1) (B - CM) y + (n+1) C S T^n y.
/// Everything is computed on renormalized orbit units with log-magnitudes,
/// so factorially decaying orbits cause no underflow; the orbit growth factor
/// cancels inside each margin.
///
/// The orbit is started at `start` when given, otherwise at the witness
/// vector w.y; pass R x here to measure the bound along the R-propagated
/// orbit of an arbitrary cyclic candidate x.
inline FunctionalGrowthReport functional_growth_report(const WitnessSet& w,
                                                       const Vec& h_fun, double p,
                                                       int n_max,
                                                       const Vec* start = nullptr) {
  w.require_clean();
  if (h_fun.size() != w.grid.n) {
    throw std::invalid_argument("functional_growth_report: functional size mismatch");
  }
  const Vec& y0 = start ? *start : w.y;
  if (y0.size() != w.grid.n) {
    throw std::invalid_argument("functional_growth_report: start size mismatch");
  }
  if (y0.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("functional_growth_report: zero start vector");
  }
  const double q = conjugate_exponent(p);
  const double hw = w.grid.h;

  FunctionalGrowthReport rep;
  const LinOp<double> bcm = w.B - w.C * w.M;
  rep.c_dual = lp_norm(bcm.adjoint().apply(h_fun), q, hw);

  const Orbit<double> orb = orbit(w.T, y0, p, hw, n_max + 1);
  const Vec defect0 = bcm.apply(y0);
  const bool have_defect = defect0.cwiseAbs().maxCoeff() > 0.0;
  {
    const double scale = std::max(1e-300, w.B.apply(y0).cwiseAbs().maxCoeff());
    rep.reduced_applies = defect0.cwiseAbs().maxCoeff() <=
                          64 * std::numeric_limits<double>::epsilon() * scale;
  }
  Orbit<double> dorb;
  if (have_defect) dorb = orbit(w.T, defect0, p, hw, n_max + 1);

  double chain_max = 0.0, reduced_max = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    if (std::size_t(n + 1) >= orb.points.size()) break;
    const auto& pn = orb.points[std::size_t(n)];
    const auto& pn1 = orb.points[std::size_t(n + 1)];

    const double s_cs = pair(h_fun, w.C.apply(w.S.apply(pn.unit)), hw);
    const double s_bcm = pair(h_fun, bcm.apply(pn1.unit), hw);

    // Identity residual, all terms scaled by exp(-log_norm(n+1)).
    const double t3 = double(n + 1) * std::exp(pn.log_norm - pn1.log_norm) * s_cs;
    const double t1 = s_bcm;
    double t2 = 0.0;
    if (have_defect && std::size_t(n + 1) < dorb.points.size()) {
      const auto& dn1 = dorb.points[std::size_t(n + 1)];
      t2 = std::exp(dn1.log_norm - pn1.log_norm) * pair(h_fun, dn1.unit, hw);
    }
    const double den = std::max({std::abs(t1), std::abs(t2), std::abs(t3), 1e-300});
    chain_max = std::max(chain_max, std::abs(t1 - t2 - t3) / den);
    if (rep.reduced_applies) {
      reduced_max = std::max(reduced_max, std::abs(t1 - t3) / den);
    }

    MarginRow row;
    row.n = n;
    row.log_lhs = std::log(std::abs(s_cs)) + pn.log_norm;  // -inf if the pairing vanishes
    row.log_rhs = std::log(rep.c_dual) - std::log(double(n + 1)) + pn.log_norm;
    row.margin = std::isinf(row.log_lhs) && row.log_lhs < 0.0
                     ? 1.0
                     : 1.0 - std::exp(row.log_lhs - row.log_rhs);
    rep.rows.push_back(row);
    rep.min_margin = std::min(rep.min_margin, row.margin);
  }
  rep.chain_residual_max = chain_max;
  if (rep.reduced_applies) rep.reduced_residual_max = reduced_max;
  return rep;
}

}  // namespace voltlab

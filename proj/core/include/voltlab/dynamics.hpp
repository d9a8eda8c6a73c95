#pragma once

#include <cmath>
#include <numbers>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "voltlab/fnspace.hpp"
#include "voltlab/grid.hpp"
#include "voltlab/linop.hpp"

namespace voltlab {

/// One renormalized orbit point: unit = T^n x / ||T^n x||, log_norm =
/// log ||T^n x||. Keeping the orbit in unit-vector + log-magnitude form
/// avoids underflow entirely (cumulative-sum orbits decay factorially).
template <class S = double>
struct OrbitPoint {
  int n = 0;
  double log_norm = 0.0;
  Eigen::Vector<S, Eigen::Dynamic> unit;
};

template <class S = double>
struct Orbit {
  std::vector<OrbitPoint<S>> points;
  bool terminated = false;  // orbit hit an exactly zero vector before n_max
  double p = 2.0;
  double weight = 1.0;
};

template <class S>
Orbit<S> orbit(const LinOp<S>& t, const Eigen::Vector<S, Eigen::Dynamic>& x0,
               double p, double weight, int n_max) {
  if (n_max < 0) throw std::invalid_argument("orbit: n_max < 0");
  Orbit<S> orb;
  orb.p = p;
  orb.weight = weight;
  const double n0 = lp_norm(x0, p, weight);
  if (n0 == 0.0) throw std::invalid_argument("orbit: zero start vector");
  Eigen::Vector<S, Eigen::Dynamic> w = x0 / S(n0);
  double log_norm = std::log(n0);
  orb.points.push_back({0, log_norm, w});
  for (int n = 1; n <= n_max; ++n) {
    Eigen::Vector<S, Eigen::Dynamic> v = t.apply(w);
    const double nv = lp_norm(v, p, weight);
    if (nv == 0.0) {
      orb.terminated = true;
      break;
    }
    w = v / S(nv);
    log_norm += std::log(nv);
    orb.points.push_back({n, log_norm, w});
  }
  return orb;
}

/// Normalized pairing sizes a_n = |<f, unit_n>| / ||f||_q along an orbit
/// (q conjugate to the orbit's p), so a_n <= 1 with equality exactly when f
/// norms the orbit direction.
template <class S>
std::vector<double> angle_statistic(const Orbit<S>& orb,
                                    const Eigen::Vector<S, Eigen::Dynamic>& f) {
  const double q = conjugate_exponent(orb.p);
  const double nf = lp_norm(f, q, orb.weight);
  if (nf == 0.0) throw std::invalid_argument("angle_statistic: zero functional");
  std::vector<double> a;
  a.reserve(orb.points.size());
  for (const auto& pt : orb.points) {
    a.push_back(std::abs(pair(f, pt.unit, orb.weight)) / nf);
  }
  return a;
}

/// Ratio table for a family of functionals: row n, column j holds
/// |<f_j, unit_n>| / ||f_j||_q. The row-sup measures how far the
/// renormalized orbit is from vanishing weakly against the family.
template <class S>
struct WeakNullReport {
  Mat ratios;               // (#points) x (#functionals)
  std::vector<double> sup;  // per-row maximum
};

template <class S>
WeakNullReport<S> weak_null_report(
    const Orbit<S>& orb,
    const std::vector<Eigen::Vector<S, Eigen::Dynamic>>& fs) {
  if (fs.empty()) throw std::invalid_argument("weak_null_report: no functionals");
  const double q = conjugate_exponent(orb.p);
  WeakNullReport<S> rep;
  rep.ratios = Mat::Zero(Eigen::Index(orb.points.size()), Eigen::Index(fs.size()));
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const double nf = lp_norm(fs[j], q, orb.weight);
    if (nf == 0.0) throw std::invalid_argument("weak_null_report: zero functional");
    for (std::size_t n = 0; n < orb.points.size(); ++n) {
      rep.ratios(Eigen::Index(n), Eigen::Index(j)) =
          std::abs(pair(fs[j], orb.points[n].unit, orb.weight)) / nf;
    }
  }
  rep.sup.resize(orb.points.size(), 0.0);
  for (std::size_t n = 0; n < orb.points.size(); ++n) {
    rep.sup[n] = rep.ratios.row(Eigen::Index(n)).maxCoeff();
  }
  return rep;
}

/// n-th root growth gauge r_n = ||T^n x||^(1/n) / ||x||^(1/n) along the
/// orbit; tends to 0 for quasinilpotent-type operators, and the decay speed
/// is the quantitative statement under test.
template <class S>
std::vector<double> root_norm_gauge(const Orbit<S>& orb) {
  std::vector<double> r;
  if (orb.points.empty()) return r;
  const double l0 = orb.points.front().log_norm;
  for (std::size_t i = 1; i < orb.points.size(); ++i) {
    const auto& pt = orb.points[i];
    r.push_back(std::exp((pt.log_norm - l0) / pt.n));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Torus rotation orbits: z_j(n) = exp(i n theta_j).
// ---------------------------------------------------------------------------

/// exp(i * n * theta) evaluated through fmod against 2*pi, the drift-free
/// reference used to confirm candidate hits.
inline CVec torus_point(const std::vector<double>& angles, std::uint64_t n) {
  CVec z(Eigen::Index(angles.size()));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t j = 0; j < angles.size(); ++j) {
    z[Eigen::Index(j)] = std::polar(1.0, std::fmod(double(n) * angles[j], two_pi));
  }
  return z;
}

struct DensitySearchResult {
  bool found = false;
  std::uint64_t n = 0;
  double achieved = std::numeric_limits<double>::infinity();
  std::uint64_t steps = 0;
};

/// Smallest n <= n_max with max_j |exp(i n theta_j) - target_j| < delta.
/// The scan multiplies incrementally (one complex multiply per angle per
/// step) and re-synchronizes against the fmod evaluation every 2^16 steps;
/// every candidate hit is confirmed with the exact evaluation before being
/// reported, so accumulated drift can cause extra work but never a wrong
/// answer.
inline DensitySearchResult density_search(const std::vector<double>& angles,
                                          const CVec& target, double delta,
                                          std::uint64_t n_max) {
  const std::size_t m = angles.size();
  if (m == 0 || target.size() != Eigen::Index(m)) {
    throw std::invalid_argument("density_search: angle/target size mismatch");
  }
  if (!(delta > 0.0)) throw std::invalid_argument("density_search: delta <= 0");

  std::vector<cplx> rot(m), z(m, cplx(1.0, 0.0));
  for (std::size_t j = 0; j < m; ++j) rot[j] = std::polar(1.0, angles[j]);

  DensitySearchResult res;
  constexpr std::uint64_t resync = 1u << 16;
  for (std::uint64_t n = 0; n <= n_max; ++n) {
    if (n > 0 && n % resync == 0) {
      const CVec fresh = torus_point(angles, n);
      for (std::size_t j = 0; j < m; ++j) z[j] = fresh[Eigen::Index(j)];
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      dist = std::max(dist, std::abs(z[j] - target[Eigen::Index(j)]));
    }
    res.steps = n + 1;
    if (dist < delta) {
      const CVec exact = torus_point(angles, n);
      double exact_dist = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        exact_dist = std::max(exact_dist, std::abs(exact[Eigen::Index(j)] - target[Eigen::Index(j)]));
      }
      if (exact_dist < delta) {
        res.found = true;
        res.n = n;
        res.achieved = exact_dist;
        return res;
      }
    }
    for (std::size_t j = 0; j < m; ++j) z[j] *= rot[j];
  }
  return res;
}

struct TwoTermResult {
  bool found = false;
  double r = 0.0;
  std::uint64_t k = 0;
  std::uint64_t m = 0;
  double achieved = std::numeric_limits<double>::infinity();
  std::uint64_t steps = 0;
};

/// Approximate a target g with sup-norm at most 2 by r*(T^k 1 + T^m 1) where
/// T is the torus rotation: r = ||g||_inf / 2 and each component of g/r is
/// split into two unimodular numbers by the half-angle construction; k and m
/// come from two density searches at tolerance delta/2 each, so the combined
/// error is below r * delta <= delta.
inline TwoTermResult two_term_decomposition(const std::vector<double>& angles,
                                            const CVec& g, double delta,
                                            std::uint64_t n_max) {
  const std::size_t m = angles.size();
  if (g.size() != Eigen::Index(m)) {
    throw std::invalid_argument("two_term_decomposition: size mismatch");
  }
  double gmax = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) gmax = std::max(gmax, std::abs(g[j]));
  if (gmax > 2.0 + 1e-12) {
    throw std::domain_error("two_term_decomposition: target sup-norm exceeds 2");
  }

  TwoTermResult res;
  res.r = gmax / 2.0;
  if (res.r == 0.0) {
    res.found = true;
    res.achieved = 0.0;
    res.steps = 0;
    return res;
  }

  CVec t1(g.size()), t2(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const cplx w = g[j] / res.r;  // |w| <= 2
    const double mod = std::min(std::abs(w) / 2.0, 1.0);
    const double base = std::arg(w);
    const double off = std::acos(mod);
    t1[j] = std::polar(1.0, base + off);
    t2[j] = std::polar(1.0, base - off);
  }

  const DensitySearchResult sk = density_search(angles, t1, delta / 2.0, n_max);
  const DensitySearchResult sm = density_search(angles, t2, delta / 2.0, n_max);
  res.steps = sk.steps + sm.steps;
  if (!sk.found || !sm.found) return res;
  res.found = true;
  res.k = sk.n;
  res.m = sm.n;

  const CVec zk = torus_point(angles, sk.n);
  const CVec zm = torus_point(angles, sm.n);
  double dist = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    dist = std::max(dist, std::abs(res.r * (zk[j] + zm[j]) - g[j]));
  }
  res.achieved = dist;
  return res;
}

struct ObstructionReport {
  double obstruction = 0.0;     // max_{s<t} ||g_s f_t| - |g_t f_s||
  double lower_bound = 0.0;     // implied floor on ||z T^n f - g||_inf
  double min_sampled = std::numeric_limits<double>::infinity();
};

/// max_{s<t} | |g_s f_t| - |g_t f_s| |: zero exactly when g and f have
/// proportional modulus patterns, as every scalar multiple of a rotation
/// orbit point of f does.
inline double modulus_invariant_violation(const CVec& f, const CVec& g) {
  if (f.size() != g.size()) {
    throw std::invalid_argument("modulus_invariant_violation: size mismatch");
  }
  double worst = 0.0;
  for (Eigen::Index s = 0; s < f.size(); ++s) {
    for (Eigen::Index t = s + 1; t < f.size(); ++t) {
      worst = std::max(worst, std::abs(std::abs(g[s]) * std::abs(f[t]) -
                                       std::abs(g[t]) * std::abs(f[s])));
    }
  }
  return worst;
}

/// Worst modulus-invariant violation over sampled orbit elements g = z T^n f.
/// Unimodular diagonal rotations preserve componentwise moduli, so this stays
/// at rounding level no matter which (z, n) are drawn.
inline double projective_invariant_violation(
    const std::vector<double>& angles, const CVec& f,
    const std::vector<std::pair<cplx, std::uint64_t>>& samples) {
  if (f.size() != Eigen::Index(angles.size())) {
    throw std::invalid_argument("projective_invariant_violation: size mismatch");
  }
  if (f.cwiseAbs().maxCoeff() == 0.0) {
    throw std::invalid_argument("projective_invariant_violation: zero vector");
  }
  double worst = 0.0;
  for (const auto& [z, n] : samples) {
    const CVec zn = torus_point(angles, n);
    CVec g = f;
    for (Eigen::Index j = 0; j < f.size(); ++j) g[j] = z * zn[j] * f[j];
    worst = std::max(worst, modulus_invariant_violation(f, g));
  }
  return worst;
}

/// Modulus obstruction to approximating g by scalar multiples of rotation
/// orbit points of f: unimodular multipliers preserve |f_j|, so any z, n
/// satisfy ||z T^n f - g||_inf >= obstruction / (2 ||f||_inf). The sampled
/// minimum over random (z, n) confirms the floor empirically.
inline ObstructionReport projective_obstruction(
    const std::vector<double>& angles, const CVec& f, const CVec& g,
    const std::vector<std::pair<cplx, std::uint64_t>>& samples) {
  if (f.size() != g.size() || f.size() != Eigen::Index(angles.size())) {
    throw std::invalid_argument("projective_obstruction: size mismatch");
  }
  ObstructionReport rep;
  double fmax = 0.0;
  for (Eigen::Index j = 0; j < f.size(); ++j) fmax = std::max(fmax, std::abs(f[j]));
  rep.obstruction = modulus_invariant_violation(f, g);
  rep.lower_bound = fmax > 0.0 ? rep.obstruction / (2.0 * fmax) : 0.0;
  for (const auto& [z, n] : samples) {
    const CVec zn = torus_point(angles, n);
    double dist = 0.0;
    for (Eigen::Index j = 0; j < f.size(); ++j) {
      dist = std::max(dist, std::abs(z * zn[j] * f[j] - g[j]));
    }
    rep.min_sampled = std::min(rep.min_sampled, dist);
  }
  return rep;
}

}  // namespace voltlab

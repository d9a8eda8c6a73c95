#pragma once

#include <cmath>
#include <numbers>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "voltlab/fnspace.hpp"
#include "voltlab/grid.hpp"
#include "voltlab/rng.hpp"

namespace voltlab {

/// Norm structure of the ambient space: exponent p and quadrature weight
/// (h for function spaces, 1 for sequence spaces).
struct SpaceSpec {
  double p = 2.0;
  double weight = 1.0;
};

/// Family of scaled norming functionals f_n for the differences d_n = x_n - y:
/// f_n = ||d_n||^(-q/p) * (unit norming functional of d_n), so that
/// <f_n, d_n> = ||d_n||^((p-q)/p) and ||f_n||_dual = ||d_n||^(-q/p).
/// The regime 1 <= q < p <= 2 is the one the separation argument covers;
/// q >= p is accepted but flagged.
struct NormingFamily {
  std::vector<Vec> f;
  std::vector<double> pairings;  // <f_n, d_n>
  double p = 2.0;
  double q = 1.5;
  double r = 6.0;                // p*q/(p-q); the pairing reciprocals must be l_r
  double sum_sq_dual = 0.0;      // sum_n ||f_n||_dual^2
  double sum_inv_r = 0.0;        // sum_n <f_n, d_n>^(-r)  (0 when r = inf)
  bool outside_scope = false;    // q >= p
};

inline double family_exponent_r(double p, double q) {
  if (q >= p) return std::numeric_limits<double>::infinity();
  return p * q / (p - q);
}

/// Statistics shared by built and hand-rolled families.
inline void finalize_family(NormingFamily& fam, const std::vector<Vec>& ds,
                            const SpaceSpec& sp) {
  fam.r = family_exponent_r(fam.p, fam.q);
  fam.outside_scope = fam.q >= fam.p;
  fam.sum_sq_dual = 0.0;
  fam.sum_inv_r = 0.0;
  fam.pairings.clear();
  const double pd = conjugate_exponent(fam.p);
  for (std::size_t n = 0; n < fam.f.size(); ++n) {
    const double dual = lp_norm(fam.f[n], pd, sp.weight);
    fam.sum_sq_dual += dual * dual;
    const double pr = pair(fam.f[n], ds[n], sp.weight);
    fam.pairings.push_back(pr);
    if (!std::isinf(fam.r) && pr > 0.0) {
      fam.sum_inv_r += std::pow(pr, -fam.r);
    }
  }
}

/// Build the canonical family from points and target. Throws if any point
/// coincides with the target, or if (p, q) leave the admissible box
/// p in (1, 2], q in [1, p] (q = p flagged, q > p rejected).
inline NormingFamily build_norming_family(const std::vector<Vec>& points, const Vec& y,
                                          const SpaceSpec& sp, double q) {
  if (!(sp.p > 1.0) || sp.p > 2.0) {
    throw std::invalid_argument("build_norming_family: need 1 < p <= 2");
  }
  if (q < 1.0 || q > sp.p) {
    throw std::invalid_argument("build_norming_family: need 1 <= q <= p");
  }
  NormingFamily fam;
  fam.p = sp.p;
  fam.q = q;
  std::vector<Vec> ds;
  ds.reserve(points.size());
  for (const Vec& x : points) {
    if (x.size() != y.size()) {
      throw std::invalid_argument("build_norming_family: point/target size mismatch");
    }
    Vec d = x - y;
    const double nd = lp_norm(d, sp.p, sp.weight);
    if (nd == 0.0) {
      throw std::invalid_argument("build_norming_family: a point equals the target");
    }
    Vec f = norming_samples<double>(d, sp.p, sp.weight);
    f *= std::pow(nd, -q / sp.p);
    fam.f.push_back(std::move(f));
    ds.push_back(std::move(d));
  }
  finalize_family(fam, ds, sp);
  return fam;
}

/// Wrap explicitly constructed functionals (e.g. weighted coordinate
/// functionals in sequence space) in the same reporting structure.
inline NormingFamily make_family(std::vector<Vec> fs, const std::vector<Vec>& ds,
                                 const SpaceSpec& sp, double p, double q) {
  NormingFamily fam;
  fam.f = std::move(fs);
  fam.p = p;
  fam.q = q;
  finalize_family(fam, ds, sp);
  return fam;
}

struct CertificateTrial {
  int trial = 0;
  double epsilon_star = 0.0;
};

/// Separation certificate: k random functionals u_j = sum_n gamma_jn f_n
/// with iid standard normal coefficients, the per-point separation margins
/// they achieve, and the union bound on the probability that a fresh draw
/// fails to separate at epsilon = epsilon_star / 2.
struct Certificate {
  int k = 0;
  double epsilon = 0.0;       // epsilon_star / 2
  double epsilon_star = 0.0;  // min_n max_j |<u_j, d_n>|
  std::uint64_t seed = 0;
  int trial = 0;
  std::vector<double> margins;  // per point: max_j |<u_j, d_n>|
  double failure_bound = 0.0;   // sum_n (epsilon / <f_n, d_n>)^k
  bool outside_scope = false;
  std::vector<Vec> u;    // the k functionals, always kept in memory
  Mat draws;             // k x n gaussian coefficients; empty if above store limit
  bool draws_stored = false;
};

struct CertificateResult {
  bool success = false;
  Certificate cert;
  std::vector<CertificateTrial> trials;
};

/// Margins of a given functional set against given differences.
inline std::vector<double> separation_margins(const std::vector<Vec>& us,
                                              const std::vector<Vec>& ds,
                                              const SpaceSpec& sp) {
  std::vector<double> margins;
  margins.reserve(ds.size());
  for (const Vec& d : ds) {
    double m = 0.0;
    for (const Vec& u : us) m = std::max(m, std::abs(pair(u, d, sp.weight)));
    margins.push_back(m);
  }
  return margins;
}

/// Draw gaussian coefficient functionals against the family until every
/// point is separated (epsilon_star > 0). Trial t, functional j draws its
/// coefficients from stream (kGaussCertificate, sub = t, index = j), draw n,
/// so certificates are reproducible draw-by-draw from (seed, t, j, n).
inline CertificateResult gaussian_certificate(const NormingFamily& fam,
                                              const std::vector<Vec>& ds,
                                              const SpaceSpec& sp, int k,
                                              int max_trials, std::uint64_t seed,
                                              std::size_t store_limit = 10000) {
  if (k < 1) throw std::invalid_argument("gaussian_certificate: k < 1");
  if (fam.f.size() != ds.size() || ds.empty()) {
    throw std::invalid_argument("gaussian_certificate: family/point mismatch");
  }
  const std::size_t n_pts = ds.size();
  CertificateResult res;
  for (int t = 0; t < max_trials; ++t) {
    Mat draws(k, Eigen::Index(n_pts));
    std::vector<Vec> us;
    us.reserve(std::size_t(k));
    for (int j = 0; j < k; ++j) {
      RandomStream rs(seed, StreamId{kGaussCertificate, std::uint16_t(t), std::uint32_t(j)});
      Vec u = Vec::Zero(ds[0].size());
      for (std::size_t n = 0; n < n_pts; ++n) {
        const double g = rs.normal(n);
        draws(j, Eigen::Index(n)) = g;
        u += g * fam.f[n];
      }
      us.push_back(std::move(u));
    }
    std::vector<double> margins = separation_margins(us, ds, sp);
    double eps_star = std::numeric_limits<double>::infinity();
    for (double m : margins) eps_star = std::min(eps_star, m);

    res.trials.push_back({t, eps_star});
    if (eps_star > 0.0) {
      Certificate& c = res.cert;
      c.k = k;
      c.epsilon_star = eps_star;
      c.epsilon = eps_star / 2.0;
      c.seed = seed;
      c.trial = t;
      c.margins = std::move(margins);
      c.outside_scope = fam.outside_scope;
      c.u = std::move(us);
      c.failure_bound = 0.0;
      for (double pr : fam.pairings) {
        c.failure_bound += std::pow(c.epsilon / pr, double(k));
      }
      if (std::size_t(k) * n_pts <= store_limit) {
        c.draws = std::move(draws);
        c.draws_stored = true;
      }
      res.success = true;
      return res;
    }
  }
  return res;
}

/// Rebuild the certificate's functionals from the stored gaussian draws (in
/// the same accumulation order) and recompute every margin. Returns the
/// maximum absolute difference against the stored margins: 0.0 means the
/// certificate reproduces bitwise, as it must on the machine that wrote it.
inline double reverify_certificate(const Certificate& c, const NormingFamily& fam,
                                   const std::vector<Vec>& ds, const SpaceSpec& sp) {
  if (!c.draws_stored) {
    throw std::invalid_argument("reverify_certificate: no stored draws");
  }
  if (c.draws.rows() != c.k || c.draws.cols() != Eigen::Index(fam.f.size())) {
    throw std::invalid_argument("reverify_certificate: draw shape mismatch");
  }
  std::vector<Vec> us;
  us.reserve(std::size_t(c.k));
  for (int j = 0; j < c.k; ++j) {
    Vec u = Vec::Zero(ds[0].size());
    for (std::size_t n = 0; n < fam.f.size(); ++n) {
      u += c.draws(j, Eigen::Index(n)) * fam.f[n];
    }
    us.push_back(std::move(u));
  }
  const std::vector<double> margins = separation_margins(us, ds, sp);
  double worst = 0.0;
  for (std::size_t n = 0; n < margins.size(); ++n) {
    worst = std::max(worst, std::abs(margins[n] - c.margins[n]));
  }
  return worst;
}

struct SmallBallRow {
  int n = 0;
  double a_n = 0.0;       // std dev of <u, d_n> for one gaussian functional
  double exact = 0.0;     // P(|N(0, a_n^2)| <= eps) = erf(eps / (a_n sqrt 2))
  double linear = 0.0;    // 2 eps / (sqrt(2 pi) a_n)
  double coarse = 0.0;    // eps / <f_n, d_n>
  double empirical = std::numeric_limits<double>::quiet_NaN();
  double mc_sigma = 0.0;  // binomial std error of the empirical estimate
};

/// Small-ball chain for each point: exact <= linear <= coarse, where coarse
/// is the term the failure bound sums. With mc_samples > 0 an independent
/// Monte Carlo estimate of the exact probability is attached (stream
/// kSmallBall, sub = row index).
inline std::vector<SmallBallRow> small_ball_rows(const NormingFamily& fam,
                                                 const std::vector<Vec>& ds,
                                                 const SpaceSpec& sp, double eps,
                                                 int mc_samples, std::uint64_t seed) {
  if (fam.f.size() != ds.size()) {
    throw std::invalid_argument("small_ball_rows: family/point mismatch");
  }
  std::vector<SmallBallRow> rows;
  for (std::size_t n = 0; n < ds.size(); ++n) {
    SmallBallRow row;
    row.n = int(n);
    double a2 = 0.0;
    for (std::size_t j = 0; j < fam.f.size(); ++j) {
      const double c = pair(fam.f[j], ds[n], sp.weight);
      a2 += c * c;
    }
    row.a_n = std::sqrt(a2);
    if (row.a_n > 0.0) {
      row.exact = std::erf(eps / (row.a_n * std::sqrt(2.0)));
      row.linear = 2.0 * eps / (std::sqrt(2.0 * std::numbers::pi) * row.a_n);
    }
    row.coarse = fam.pairings[n] > 0.0 ? eps / fam.pairings[n]
                                       : std::numeric_limits<double>::infinity();
    if (mc_samples > 0 && row.a_n > 0.0) {
      RandomStream rs(seed, StreamId{kSmallBall, std::uint16_t(n), 0});
      int hits = 0;
      for (int m = 0; m < mc_samples; ++m) {
        if (std::abs(row.a_n * rs.normal(std::uint64_t(m))) <= eps) ++hits;
      }
      const double phat = double(hits) / double(mc_samples);
      row.empirical = phat;
      row.mc_sigma = std::sqrt(std::max(phat * (1.0 - phat), 1e-12) / double(mc_samples));
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace voltlab

// Acceptance gate: twelve numbered end-to-end checks with tolerances pinned
// in code. Each check prints exactly one [PASS]/[FAIL] line; the process
// exits nonzero when any executed check fails.
//
// Usage: voltlab_acceptance [--criterion K]   (K in 1..12; default: all)

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "voltlab/conv_algebra.hpp"
#include "voltlab/dynamics.hpp"
#include "voltlab/fnspace.hpp"
#include "voltlab/grid.hpp"
#include "voltlab/linop.hpp"
#include "voltlab/operators.hpp"
#include "voltlab/pipeline.hpp"
#include "voltlab/probes.hpp"
#include "voltlab/rng.hpp"
#include "voltlab/sampling.hpp"
#include "voltlab/weakclosure.hpp"
#include "voltlab/witness.hpp"

namespace {

using namespace voltlab;

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// Cumulative-sum apply without materializing the matrix: (Vx)_i = h * sum_{j<=i} x_j.
Vec cumsum_apply(const Grid& g, const Vec& x) {
  Vec out(g.n);
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) {
    acc += x[i];
    out[i] = g.h * acc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// 1. Powers of the cumulative-sum operator against x^n/n! on the inner nodes:
//    relative error cap and first-order halving band.
// ---------------------------------------------------------------------------
Result criterion_01() {
  const double kTol = 5e-3;
  const double kBandLo = 0.4, kBandHi = 0.6;

  auto max_rel_err = [](int n_nodes) {
    Grid g(n_nodes);
    double worst = 0.0;
    Vec it = Vec::Ones(g.n);
    double log_fact = 0.0;
    for (int n = 1; n <= 8; ++n) {
      it = cumsum_apply(g, it);
      log_fact += std::log(double(n));
      for (int i = 0; i < g.n; ++i) {
        const double x = g.node(i);
        if (x < 0.1) continue;
        const double model = std::exp(n * std::log(x) - log_fact);
        worst = std::max(worst, std::abs(it[i] - model) / model);
      }
    }
    return worst;
  };

  const double e1 = max_rel_err(4096);
  const double e2 = max_rel_err(8192);
  const double ratio = e2 / e1;
  Result r;
  const bool cap_ok = e1 <= kTol;
  const bool band_ok = ratio >= kBandLo && ratio <= kBandHi;
  r.pass = cap_ok && band_ok;
  r.detail = "max rel err " + fmt(e1) + " (cap " + fmt(kTol) + "), halving ratio " +
             fmt(ratio) + " (band [" + fmt(kBandLo) + "," + fmt(kBandHi) + "])";
  return r;
}

// ---------------------------------------------------------------------------
// 2. Bracket of coordinate multiplication with cumulative sum: equals
//    convolution by the coordinate kernel entrywise, and matches the square
//    of the operator within 1.5 mesh steps in Frobenius norm.
// ---------------------------------------------------------------------------
Result criterion_02() {
  const double kExactTol = 1e-13;
  const double kRatioCap = 1.5;
  double worst_exact = 0.0, worst_ratio = 0.0;
  for (int n_nodes : {256, 512, 1024}) {
    Grid g(n_nodes);
    const LinOp<double> v = volterra(g);
    const LinOp<double> m = mult_by_x(g);
    const LinOp<double> bracket = commutator(m, v);
    worst_exact = std::max(
        worst_exact,
        (bracket - conv_matrix(ConvElement<double>(g, g.nodes()))).frobenius());
    worst_ratio = std::max(
        worst_ratio, (bracket - v * v).frobenius() / (g.h * v.frobenius()));
  }
  Result r;
  r.pass = worst_exact <= kExactTol && worst_ratio <= kRatioCap;
  r.detail = "coordinate-kernel gap " + fmt(worst_exact) + " (cap " + fmt(kExactTol) +
             "), continuum ratio " + fmt(worst_ratio) + " (cap " + fmt(kRatioCap) + ")";
  return r;
}

// ---------------------------------------------------------------------------
// 3. Power-bracket ladder T^nM - MT^n = n S T^(n-1) for the cumulative-sum
//    operator, relative residual per rung.
// ---------------------------------------------------------------------------
Result criterion_03() {
  const double kTol = 1e-11;
  Grid g(256);
  const DerivationReport rep =
      derivation_identity_report(volterra(g), mult_by_x(g), 10);
  double worst = 0.0;
  for (const auto& row : rep.rows) worst = std::max(worst, row.relative);
  Result r;
  r.pass = worst <= kTol;
  r.detail = "worst relative residual " + fmt(worst) + " (cap " + fmt(kTol) +
             ") over 10 rungs";
  return r;
}

// ---------------------------------------------------------------------------
// 4. Orbit-functional margins for 100 seeded positive kernel pairs with
//    random probe functionals: bound never violated beyond 1e-9 relative,
//    and the three-term identity behind it holds to 1e-10.
// ---------------------------------------------------------------------------
Result criterion_04() {
  const double kMarginFloor = -1e-9;
  const double kChainCap = 1e-10;
  const std::uint64_t kSeed = 1;
  Grid g(256);
  const LinOp<double> t = volterra(g);
  const Vec x0 = Vec::Ones(g.n);
  double min_margin = std::numeric_limits<double>::infinity();
  double worst_chain = 0.0;
  for (int w_idx = 0; w_idx < 100; ++w_idx) {
    const Vec u = seeded_positive_kernel(g, kSeed, kKernelData,
                                         std::uint16_t(w_idx), 0);
    const Vec v = seeded_positive_kernel(g, kSeed, kKernelData,
                                         std::uint16_t(w_idx), 1);
    const WitnessSet w = build_witness_set(g, t, u, v);
    const Vec h_fun = seeded_smooth_field(g, kSeed, kFunctionalData,
                                          std::uint16_t(w_idx), 0);
    const Vec y0 = w.R.apply(x0);
    const FunctionalGrowthReport rep =
        functional_growth_report(w, h_fun, 2.0, 100, &y0);
    min_margin = std::min(min_margin, rep.min_margin);
    worst_chain = std::max(worst_chain, rep.chain_residual_max);
  }
  Result r;
  r.pass = min_margin >= kMarginFloor && worst_chain <= kChainCap;
  r.detail = "min margin " + fmt(min_margin) + " (floor " + fmt(kMarginFloor) +
             "), chain residual " + fmt(worst_chain) + " (cap " + fmt(kChainCap) +
             ") over 100 witnesses";
  return r;
}

// ---------------------------------------------------------------------------
// 5. Angle statistic of the cumulative-sum orbit from the constant vector
//    against the law (np+1)^(1/p)/(n+1), p in {1,2}, steps 5..40.
// ---------------------------------------------------------------------------
Result criterion_05() {
  const double kRelTol = 0.02;
  Grid g(2048);
  const LinOp<double> t = volterra(g);
  const Vec ones = Vec::Ones(g.n);
  double worst = 0.0;
  for (double p : {1.0, 2.0}) {
    const Orbit<double> orb = orbit(t, ones, p, g.h, 41);
    const std::vector<double> a = angle_statistic(orb, ones);
    for (int n = 5; n <= 40; ++n) {
      const double model = std::pow(n * p + 1.0, 1.0 / p) / (n + 1.0);
      worst = std::max(worst, std::abs(a[std::size_t(n)] - model) / model);
    }
  }
  Result r;
  r.pass = worst <= kRelTol;
  r.detail =
      "worst relative deviation " + fmt(worst) + " (cap " + fmt(kRelTol) + ")";
  return r;
}

// ---------------------------------------------------------------------------
// 6. Weak-null decade: normalized orbit pairings against the monomial family
//    must decay by 10x between steps 10 and 100 for every seeded start.
// ---------------------------------------------------------------------------
Result criterion_06() {
  const double kMaxFactor = 0.1;
  const std::uint64_t kSeed = 5;
  Grid g(512);
  const LinOp<double> t = volterra(g);
  std::vector<Vec> fs;
  Vec mono = Vec::Ones(g.n);
  for (int j = 0; j <= 5; ++j) {
    if (j > 0) {
      for (int i = 0; i < g.n; ++i) mono[i] *= g.node(i);
    }
    fs.push_back(mono);
  }
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Vec x0 =
        seeded_smooth_field(g, kSeed, kStartVector, 0, std::uint32_t(s));
    const Orbit<double> orb = orbit(t, x0, 2.0, g.h, 101);
    const WeakNullReport<double> rep = weak_null_report(orb, fs);
    for (Eigen::Index j = 0; j < rep.ratios.cols(); ++j) {
      worst = std::max(worst, rep.ratios(100, j) / rep.ratios(10, j));
    }
  }
  Result r;
  r.pass = worst <= kMaxFactor;
  r.detail = "worst tail/head ratio " + fmt(worst) + " (cap " + fmt(kMaxFactor) +
             ") over 20 starts x 6 functionals";
  return r;
}

// ---------------------------------------------------------------------------
// 7. Joint commutant of cumulative sum and coordinate multiplication:
//    one-dimensional with a large spectral gap in the stacked system.
// ---------------------------------------------------------------------------
Result criterion_07() {
  const double kMinGap = 1e3;
  Result r;
  r.pass = true;
  for (int n_nodes : {8, 16}) {
    Grid g(n_nodes);
    const CommutantReport rep =
        joint_commutant(volterra(g).mat, mult_by_x(g).mat);
    r.pass = r.pass && rep.dimension == 1 && rep.gap >= kMinGap;
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("N=") +
                std::to_string(n_nodes) + ": dim " + std::to_string(rep.dimension) +
                ", gap " + fmt(rep.gap);
  }
  r.detail += " (need dim 1, gap >= " + fmt(kMinGap) + ")";
  return r;
}

// ---------------------------------------------------------------------------
// 8. Gaussian separation certificate on the blown-up coordinate family:
//    success within 5 trials at the pinned seed, bitwise reproducibility,
//    and the Monte-Carlo small-ball check at four sample points.
// ---------------------------------------------------------------------------
Result criterion_08() {
  const int kDim = 200, kK = 4, kTrials = 5;
  const std::uint64_t kSeed = 42;
  const int kMcSamples = 100000;
  const SpaceSpec sp{2.0, 1.0};
  std::vector<Vec> points;
  for (int n = 0; n < kDim; ++n) {
    Vec x = Vec::Zero(kDim);
    x[n] = double(n + 1);
    points.push_back(std::move(x));
  }
  const Vec y = Vec::Zero(kDim);
  std::vector<Vec> ds = points;  // y = 0

  const NormingFamily fam = build_norming_family(points, y, sp, 1.5);
  const CertificateResult res =
      gaussian_certificate(fam, ds, sp, kK, kTrials, kSeed);
  Result r;
  if (!res.success) {
    r.pass = false;
    r.detail = "no certificate within " + std::to_string(kTrials) + " trials";
    return r;
  }
  const Certificate& cert = res.cert;

  // Stored-seed rerun: margins must agree bit for bit.
  const CertificateResult rerun =
      gaussian_certificate(fam, ds, sp, kK, kTrials, cert.seed);
  bool bitwise = rerun.success && rerun.cert.margins.size() == cert.margins.size();
  if (bitwise) {
    for (std::size_t i = 0; i < cert.margins.size(); ++i) {
      bitwise = bitwise && (rerun.cert.margins[i] == cert.margins[i]);
    }
  }
  const double reverify_gap = reverify_certificate(cert, fam, ds, sp);

  const std::vector<SmallBallRow> rows =
      small_ball_rows(fam, ds, sp, cert.epsilon, kMcSamples, kSeed);
  double coarse_excess = -std::numeric_limits<double>::infinity();
  for (int n : {0, 10, 50, 199}) {
    const SmallBallRow& row = rows[std::size_t(n)];
    coarse_excess = std::max(
        coarse_excess, row.empirical - row.coarse * (1.0 + 3.0 * row.mc_sigma));
  }

  r.pass = bitwise && reverify_gap == 0.0 && coarse_excess <= 0.0;
  r.detail = "trial " + std::to_string(cert.trial) + ", eps* " +
             fmt(cert.epsilon_star) + ", bitwise rerun " +
             (bitwise ? "yes" : "NO") + ", stored-draw gap " + fmt(reverify_gap) +
             ", MC excess over coarse bound " + fmt(coarse_excess) + " (cap 0)";
  return r;
}

// ---------------------------------------------------------------------------
// 9. Two-angle rotation orbits: seeded unimodular targets reached within
//    delta, modulus invariance along sampled orbit elements, and the
//    two-term decomposition for bounded targets.
// ---------------------------------------------------------------------------
Result criterion_09() {
  const std::uint64_t kSeed = 3;
  const std::vector<double> angles = {
      2.0 * std::numbers::pi * (std::numbers::sqrt2 - 1.0),
      2.0 * std::numbers::pi * (std::sqrt(3.0) - 1.0)};
  const std::size_t m = angles.size();

  bool all_found = true;
  double worst_achieved = 0.0;
  for (int t = 0; t < 20; ++t) {
    RandomStream rs(kSeed, StreamId{kTorusTarget, std::uint16_t(t), 0});
    CVec target = CVec::Zero(Eigen::Index(m));
    for (std::size_t j = 0; j < m; ++j) {
      target[Eigen::Index(j)] =
          std::polar(1.0, 2.0 * std::numbers::pi * rs.uniform(2 * j));
    }
    const DensitySearchResult dres = density_search(angles, target, 0.15, 1000000);
    all_found = all_found && dres.found;
    if (dres.found) worst_achieved = std::max(worst_achieved, dres.achieved);
  }

  RandomStream frs(kSeed, StreamId{kObstruction, 0, 0});
  CVec f = CVec::Zero(Eigen::Index(m));
  for (std::size_t j = 0; j < m; ++j) {
    f[Eigen::Index(j)] = std::polar(0.5 + double(j + 1) / double(m + 1),
                                    2.0 * std::numbers::pi * frs.uniform(4 * j));
  }
  std::vector<std::pair<cplx, std::uint64_t>> zs;
  RandomStream zrs(kSeed, StreamId{kObstruction, 1, 0});
  for (int s = 0; s < 10000; ++s) {
    const double rad = 0.25 + 1.75 * zrs.uniform(std::uint64_t(3 * s));
    const double phi = 2.0 * std::numbers::pi * zrs.uniform(std::uint64_t(3 * s + 1));
    const std::uint64_t n =
        std::uint64_t(zrs.uniform(std::uint64_t(3 * s + 2)) * 1e4);
    zs.emplace_back(std::polar(rad, phi), n);
  }
  const double violation = projective_invariant_violation(angles, f, zs);

  bool two_term_ok = true;
  double worst_two_term = 0.0;
  for (int t = 0; t < 10; ++t) {
    RandomStream rs(kSeed, StreamId{kTorusTarget, std::uint16_t(t), 0});
    CVec target = CVec::Zero(Eigen::Index(m));
    for (std::size_t j = 0; j < m; ++j) {
      target[Eigen::Index(j)] =
          std::polar(2.0 * rs.uniform(2 * j + 1),
                     2.0 * std::numbers::pi * rs.uniform(2 * j));
    }
    const TwoTermResult tt = two_term_decomposition(angles, target, 0.2, 1000000);
    two_term_ok = two_term_ok && tt.found;
    if (tt.found) worst_two_term = std::max(worst_two_term, tt.achieved);
  }

  Result r;
  r.pass = all_found && worst_achieved < 0.15 && violation <= 1e-12 &&
           two_term_ok && worst_two_term < 0.2;
  r.detail = "density worst " + fmt(worst_achieved) + " (< 0.15, all " +
             (all_found ? "found" : "NOT found") + "), invariant violation " +
             fmt(violation) + " (cap 1e-12), two-term worst " +
             fmt(worst_two_term) + " (< 0.2)";
  return r;
}

// ---------------------------------------------------------------------------
// 10. Root-norm gauge of the cumulative-sum orbit at step 30 stays under
//     0.15 in the sup norm.
// ---------------------------------------------------------------------------
Result criterion_10() {
  const double kBound = 0.15;
  Grid g(1024);
  const Vec start = Vec::Ones(g.n);
  const Orbit<double> orb = orbit(volterra(g), start,
                                  std::numeric_limits<double>::infinity(), g.h, 30);
  const std::vector<double> gauge = root_norm_gauge(orb);
  const double value = gauge.back();
  Result r;
  r.pass = gauge.size() == 30 && value <= kBound;
  r.detail = "gauge at step 30 is " + fmt(value) + " (cap " + fmt(kBound) + ")";
  return r;
}

// ---------------------------------------------------------------------------
// 11. Change-of-variables intertwining for the weight 2x: monomial residual
//     constant stable across three grids, and the two association orders of
//     the conjugated product agree exactly.
// ---------------------------------------------------------------------------
Result criterion_11() {
  const double kBand = 4.0;
  double c_min = std::numeric_limits<double>::infinity(), c_max = 0.0;
  std::string cs;
  for (int n_nodes : {512, 1024, 2048}) {
    Grid g(n_nodes);
    Vec w(g.n);
    for (int i = 0; i < g.n; ++i) w[i] = 2.0 * g.node(i);
    const Intertwiner itw = intertwiner(g, w);
    const LinOp<double> tw = weighted_volterra_left(g, w);
    const LinOp<double> v = volterra(g);
    double c_grid = 0.0;
    Vec mono = Vec::Ones(g.n);
    for (int k = 0; k <= 5; ++k) {
      if (k > 0) {
        for (int i = 0; i < g.n; ++i) mono[i] *= g.node(i);
      }
      const Vec resid = itw.J.apply(tw.apply(mono)) - v.apply(itw.J.apply(mono));
      c_grid = std::max(c_grid, lp_norm(resid, 1.0, g.h) / g.h);
    }
    c_min = std::min(c_min, c_grid);
    c_max = std::max(c_max, c_grid);
    cs += (cs.empty() ? "" : "/") + fmt(c_grid);
  }

  Grid g(1024);
  Vec w(g.n);
  for (int i = 0; i < g.n; ++i) w[i] = 2.0 * g.node(i);
  const LinOp<double> mw = mult_by(g, w);
  const double conj_gap =
      ((mw * weighted_volterra_right(g, w)).mat -
       (weighted_volterra_left(g, w) * mw).mat)
          .cwiseAbs()
          .maxCoeff();

  Result r;
  r.pass = (c_max / c_min) <= kBand && conj_gap == 0.0;
  r.detail = "residual constants " + cs + " (band ratio " + fmt(c_max / c_min) +
             " <= " + fmt(kBand) + "), conjugation gap " + fmt(conj_gap) +
             " (need 0)";
  return r;
}

// ---------------------------------------------------------------------------
// 12. End-to-end growth pipeline from the constant witnesses, plus the
//     second-primitive differencing identity.
// ---------------------------------------------------------------------------
Result criterion_12() {
  const std::uint64_t kSeed = 9;
  Grid g(256);
  const LinOp<double> t = volterra(g);
  const WitnessSet w = build_witness_set(g, t, Vec::Ones(g.n), Vec::Ones(g.n));
  const Vec y0 = w.R.apply(Vec::Ones(g.n));
  const Vec h_fun = Vec::Ones(g.n);

  const FunctionalGrowthReport margins =
      functional_growth_report(w, h_fun, 2.0, 60, &y0);

  PipelineOptions opt;
  opt.p = 2.0;
  opt.q = 1.5;
  opt.k = 4;
  opt.n_max = 60;
  opt.max_trials = 8;
  opt.seed = kSeed;
  const PipelineReport rep = run_pipeline(w, h_fun, opt, &y0);
  int growth_violations = 0;
  for (const GrowthRow& row : rep.rows) {
    if (!row.skipped && !row.ok) ++growth_violations;
  }

  const LinOp<double> v = volterra(g);
  double worst_gap = 0.0;
  for (int s = 0; s < 10; ++s) {
    RandomStream rs(kSeed, StreamId{kStartVector, std::uint16_t(s), 1});
    Vec f(g.n);
    for (int i = 0; i < g.n; ++i) f[i] = rs.normal(std::uint64_t(i));
    const Vec vf = v.apply(f);
    const RealFn vvf(g, v.apply(vf), 2.0);
    const double lhs = derivative_l2_norm(vvf);
    const double rhs = lp_norm(vf, 2.0, g.h);
    worst_gap = std::max(worst_gap, std::abs(lhs - rhs) / rhs);
  }

  Result r;
  const bool margins_ok = margins.min_margin >= 0.0 &&
                          margins.chain_residual_max <= 1e-10;
  const bool embed_ok = rep.c_measured <= rep.c_lemma * (1.0 + 1e-12);
  const bool cert_ok = rep.certificate.success;
  const bool deriv_ok = worst_gap <= 0.004;
  r.pass = margins_ok && embed_ok && growth_violations == 0 && cert_ok && deriv_ok;
  r.detail = "min margin " + fmt(margins.min_margin) + ", c " + fmt(rep.c_measured) +
             " <= " + fmt(rep.c_lemma) + ", growth violations " +
             std::to_string(growth_violations) + ", certificate " +
             (cert_ok ? "ok" : "MISSING") + ", differencing gap " + fmt(worst_gap) +
             " (cap 0.004)";
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion K]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > 12) {
    std::fprintf(stderr, "criterion index out of range: %d\n", only);
    return 2;
  }

  struct Entry {
    int id;
    const char* name;
    Result (*fn)();
  };
  const Entry entries[] = {
      {1, "cumulative-power-convergence", criterion_01},
      {2, "commutator-identity", criterion_02},
      {3, "derivation-identity", criterion_03},
      {4, "growth-margins", criterion_04},
      {5, "orbit-angle-law", criterion_05},
      {6, "weak-null-decade", criterion_06},
      {7, "joint-commutant", criterion_07},
      {8, "separation-certificate", criterion_08},
      {9, "torus-approximation", criterion_09},
      {10, "root-norm-decay", criterion_10},
      {11, "change-of-variables", criterion_11},
      {12, "growth-pipeline", criterion_12},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    if (only != 0 && e.id != only) continue;
    Result res;
    try {
      res = e.fn();
    } catch (const std::exception& ex) {
      res.pass = false;
      res.detail = std::string("exception: ") + ex.what();
    }
    std::printf("[%s] criterion %02d %s: %s\n", res.pass ? "PASS" : "FAIL", e.id,
                e.name, res.detail.c_str());
    std::fflush(stdout);
    if (!res.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

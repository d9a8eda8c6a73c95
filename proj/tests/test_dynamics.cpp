#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "voltlab/dynamics.hpp"
#include "voltlab/operators.hpp"
#include "voltlab/rng.hpp"

using namespace voltlab;

TEST_CASE("orbit keeps unit vectors and reconstructs the raw iterates") {
  Grid g(64);
  const LinOp<double> v = volterra(g);
  RandomStream rs(19, StreamId{kStartVector, 0, 0});
  Vec x0(g.n);
  for (int i = 0; i < g.n; ++i) x0[i] = 1.0 + rs.uniform(std::uint64_t(i));

  const Orbit<double> orb = orbit(v, x0, 2.0, g.h, 20);
  REQUIRE(orb.points.size() == 21);
  CHECK(!orb.terminated);

  Vec raw = x0;
  for (const auto& pt : orb.points) {
    CHECK(lp_norm(pt.unit, 2.0, g.h) == doctest::Approx(1.0).epsilon(1e-12));
    const Vec rebuilt = std::exp(pt.log_norm) * pt.unit;
    const double scale = raw.cwiseAbs().maxCoeff();
    CHECK((rebuilt - raw).cwiseAbs().maxCoeff() <= 1e-11 * scale);
    raw = v.apply(raw);
  }
  const Vec zero = Vec::Zero(g.n);
  CHECK_THROWS((void)orbit(v, zero, 2.0, g.h, 5));
  CHECK_THROWS((void)orbit(v, x0, 2.0, g.h, -1));
}

TEST_CASE("orbit stops cleanly when an iterate vanishes exactly") {
  const LinOp<double> s = weighted_backward_shift(8);
  Vec e2 = Vec::Zero(8);
  e2[2] = 1.0;
  const Orbit<double> orb = orbit(s, e2, 2.0, 1.0, 10);
  CHECK(orb.terminated);
  CHECK(orb.points.size() == 3);  // n = 0, 1, 2; the third apply is zero
}

TEST_CASE("angle statistic is normalized and bounded by duality") {
  Grid g(128);
  const LinOp<double> v = volterra(g);
  Vec x0 = Vec::Ones(g.n);
  const Orbit<double> orb = orbit(v, x0, 2.0, g.h, 30);
  const std::vector<double> a = angle_statistic(orb, x0);
  REQUIRE(a.size() == orb.points.size());
  // f equals the start direction, so a_0 = 1; all values obey the pairing
  // bound a_n <= 1.
  CHECK(a[0] == doctest::Approx(1.0).epsilon(1e-12));
  for (double an : a) {
    CHECK(an >= 0.0);
    CHECK(an <= 1.0 + 1e-12);
  }
  const Vec zero = Vec::Zero(g.n);
  CHECK_THROWS((void)angle_statistic(orb, zero));
}

TEST_CASE("weak-null columns agree with per-functional angle statistics") {
  Grid g(64);
  const LinOp<double> v = volterra(g);
  const Vec start = Vec::Ones(g.n);
  const Orbit<double> orb = orbit(v, start, 1.5, g.h, 12);
  std::vector<Vec> fs = {Vec::Ones(g.n), g.nodes()};
  const WeakNullReport<double> rep = weak_null_report(orb, fs);
  REQUIRE(rep.ratios.rows() == Eigen::Index(orb.points.size()));
  REQUIRE(rep.ratios.cols() == 2);
  for (std::size_t j = 0; j < fs.size(); ++j) {
    const std::vector<double> a = angle_statistic(orb, fs[j]);
    for (std::size_t n = 0; n < orb.points.size(); ++n) {
      CHECK(rep.ratios(Eigen::Index(n), Eigen::Index(j)) == a[n]);
    }
  }
  CHECK_THROWS(weak_null_report(orb, std::vector<Vec>{}));
}

TEST_CASE("root-norm gauge is flat for an isometry") {
  const LinOp<cplx> r = torus_rotation({1.0, 2.0});
  CVec x0(2);
  x0 << cplx(1.0, 0.0), cplx(0.0, 1.0);
  const Orbit<cplx> orb = orbit(r, x0, 2.0, 1.0, 25);
  const std::vector<double> gauge = root_norm_gauge(orb);
  REQUIRE(gauge.size() == 25);
  for (double rn : gauge) CHECK(rn == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("root-norm gauge decays for the cumulative-sum operator") {
  Grid g(256);
  const Vec start = Vec::Ones(g.n);
  const Orbit<double> orb = orbit(volterra(g), start, 2.0, g.h, 25);
  const std::vector<double> gauge = root_norm_gauge(orb);
  // Quasinilpotent-type decay: strictly below 1 and monotone down the tail.
  CHECK(gauge.front() < 1.0);
  for (std::size_t i = 1; i < gauge.size(); ++i) CHECK(gauge[i] < gauge[i - 1]);
  CHECK(gauge.back() < 0.2);
}

TEST_CASE("torus points are unimodular and satisfy the group law") {
  const std::vector<double> angles = {
      2.0 * std::numbers::pi * (std::numbers::sqrt2 - 1.0), 1.0};
  const CVec z0 = torus_point(angles, 0);
  for (int j = 0; j < 2; ++j) CHECK(z0[j] == cplx(1.0, 0.0));
  const CVec za = torus_point(angles, 321);
  const CVec zb = torus_point(angles, 654);
  const CVec zab = torus_point(angles, 975);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::abs(za[j]) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(za[j] * zb[j] - zab[j]) <= 1e-11);
  }
}

TEST_CASE("density search confirms exact hits with zero achieved distance") {
  const std::vector<double> angles = {
      2.0 * std::numbers::pi * (std::numbers::sqrt2 - 1.0),
      2.0 * std::numbers::pi * (std::sqrt(3.0) - 1.0)};
  const CVec target = torus_point(angles, 17);
  const DensitySearchResult res = density_search(angles, target, 1e-9, 1000);
  CHECK(res.found);
  CHECK(res.n == 17);
  CHECK(res.achieved == 0.0);

  CHECK_THROWS(density_search(angles, target, 0.0, 100));
  CHECK_THROWS(density_search(angles, CVec::Ones(3), 0.1, 100));
}

TEST_CASE("density search reaches generic unimodular targets") {
  const std::vector<double> angles = {2.0 * std::numbers::pi *
                                      (std::numbers::sqrt2 - 1.0)};
  CVec target(1);
  target << std::polar(1.0, 2.5);
  const DensitySearchResult res = density_search(angles, target, 0.05, 200000);
  CHECK(res.found);
  CHECK(res.achieved < 0.05);
}

TEST_CASE("two-term decomposition reconstructs bounded targets") {
  const std::vector<double> angles = {
      2.0 * std::numbers::pi * (std::numbers::sqrt2 - 1.0),
      2.0 * std::numbers::pi * (std::sqrt(3.0) - 1.0)};
  CVec gtarget(2);
  gtarget << std::polar(1.3, 0.4), std::polar(0.6, -1.9);
  const TwoTermResult res = two_term_decomposition(angles, gtarget, 0.1, 2000000);
  REQUIRE(res.found);
  CHECK(res.achieved < 0.1);
  const CVec zk = torus_point(angles, res.k);
  const CVec zm = torus_point(angles, res.m);
  double dist = 0.0;
  for (int j = 0; j < 2; ++j) {
    dist = std::max(dist, std::abs(res.r * (zk[j] + zm[j]) - gtarget[j]));
  }
  CHECK(dist == doctest::Approx(res.achieved).epsilon(1e-12));

  CVec toobig(2);
  toobig << cplx(2.5, 0.0), cplx(0.0, 0.0);
  CHECK_THROWS_AS((void)two_term_decomposition(angles, toobig, 0.1, 100),
                  std::domain_error);
}

TEST_CASE("modulus invariance separates orbit multiples from outsiders") {
  const std::vector<double> angles = {0.9, 2.3, 4.1};
  CVec f(3);
  f << std::polar(0.7, 0.1), std::polar(1.1, 1.2), std::polar(0.4, -2.0);

  // Scalar multiples of rotated copies keep the modulus pattern.
  const CVec zn = torus_point(angles, 1234);
  CVec good(3);
  for (int j = 0; j < 3; ++j) good[j] = cplx(0.3, -0.8) * zn[j] * f[j];
  CHECK(modulus_invariant_violation(f, good) <= 1e-15);

  // Perturbing one modulus breaks the invariant by a predictable amount.
  CVec bad = good;
  bad[0] *= 1.5;
  CHECK(modulus_invariant_violation(f, bad) > 0.01);
  CHECK_THROWS(modulus_invariant_violation(f, CVec::Ones(2)));

  std::vector<std::pair<cplx, std::uint64_t>> samples = {
      {cplx(1.0, 0.5), 3}, {cplx(-0.2, 0.1), 77}, {cplx(0.0, -2.0), 100000}};
  CHECK(projective_invariant_violation(angles, f, samples) <= 1e-12);
  CHECK_THROWS(projective_invariant_violation(angles, CVec::Zero(3), samples));

  // The sampled floor never undercuts the certified lower bound.
  CVec g = f;
  g[0] *= 2.0;  // distinct modulus pattern
  const ObstructionReport rep = projective_obstruction(angles, f, g, samples);
  CHECK(rep.obstruction > 0.0);
  CHECK(rep.lower_bound > 0.0);
  CHECK(rep.min_sampled >= rep.lower_bound - 1e-12);
}

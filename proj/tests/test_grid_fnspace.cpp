#include <cmath>
#include <limits>

#include "doctest.h"
#include "voltlab/fnspace.hpp"
#include "voltlab/grid.hpp"
#include "voltlab/rng.hpp"

using namespace voltlab;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("grid nodes are i*h with h = 1/n") {
  Grid g(8);
  CHECK(g.h == 0.125);
  CHECK(g.node(0) == 0.0);
  CHECK(g.node(7) == 0.875);
  const Vec xs = g.nodes();
  REQUIRE(xs.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(xs[i] == g.node(i));
  CHECK_THROWS(Grid(0));
}

TEST_CASE("weighted p-norm closed forms") {
  Grid g(64);
  const Vec ones = Vec::Ones(g.n);

  // n * h = 1, so the constant function has norm 1 for every p.
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    CHECK(lp_norm(ones, p, g.h) == doctest::Approx(1.0).epsilon(1e-14));
  }

  // ||x||_2^2 = h^3 * sum i^2 = h^3 n(n-1)(2n-1)/6, exact reference sum.
  const Vec xs = g.nodes();
  const double n = g.n;
  const double exact_sq = g.h * g.h * g.h * n * (n - 1.0) * (2.0 * n - 1.0) / 6.0;
  CHECK(lp_norm(xs, 2.0, g.h) ==
        doctest::Approx(std::sqrt(exact_sq)).epsilon(1e-14));

  // ||x||_1 = h^2 * n(n-1)/2 and sup |x| = (n-1) h.
  CHECK(lp_norm(xs, 1.0, g.h) ==
        doctest::Approx(g.h * g.h * n * (n - 1.0) / 2.0).epsilon(1e-14));
  CHECK(lp_norm(xs, kInf, g.h) == (n - 1.0) * g.h);

  CHECK(lp_norm(Vec::Zero(g.n), 2.0, g.h) == 0.0);
  CHECK_THROWS(lp_norm(ones, 0.5, g.h));
}

TEST_CASE("norm scaling against extreme magnitudes does not overflow") {
  Grid g(16);
  Vec v = Vec::Constant(g.n, 1e300);
  const double got = lp_norm(v, 2.0, g.h);
  CHECK(std::isfinite(got));
  CHECK(got == doctest::Approx(1e300).epsilon(1e-14));
  v[3] = 1e-300;
  CHECK(std::isfinite(lp_norm(v, 3.0, g.h)));
}

TEST_CASE("duality pairing is the weighted dot product") {
  Grid g(32);
  const Vec xs = g.nodes();
  const Vec ones = Vec::Ones(g.n);
  // <1, x> = h^2 sum i = h^2 n(n-1)/2
  const double exact = g.h * g.h * g.n * (g.n - 1.0) / 2.0;
  CHECK(pair(ones, xs, g.h) == doctest::Approx(exact).epsilon(1e-14));

  // Conjugate-linear in the first slot for complex samples.
  CVec a = CVec::Constant(4, cplx(0.0, 1.0));
  CVec b = CVec::Constant(4, cplx(0.0, 1.0));
  const cplx z = pair(a, b, 0.25);
  CHECK(z.real() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(z.imag() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("Hoelder inequality holds with nonnegative slack across random pairs") {
  Grid g(48);
  RandomStream rs(101, StreamId{kStartVector, 7, 0});
  std::uint64_t ctr = 0;
  const double ps[] = {1.0, 1.5, 2.0, 3.0, kInf};
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    Vec f(g.n), gg(g.n);
    for (int i = 0; i < g.n; ++i) {
      f[i] = rs.normal(ctr++);
      gg[i] = rs.normal(ctr++);
    }
    for (double p : ps) {
      const double q = conjugate_exponent(p);
      const double lhs = std::abs(pair(gg, f, g.h));
      const double rhs = lp_norm(gg, q, g.h) * lp_norm(f, p, g.h);
      CHECK(lhs <= rhs * (1.0 + 1e-12));
      ++checked;
    }
  }
  CHECK(checked == 250);
}

TEST_CASE("norming functional attains the norm with unit dual norm") {
  Grid g(40);
  RandomStream rs(5, StreamId{kFunctionalData, 9, 0});
  for (double p : {1.25, 1.5, 2.0, 3.0}) {
    Vec f(g.n);
    for (int i = 0; i < g.n; ++i) f[i] = rs.normal(std::uint64_t(100 * p) + i);
    f[7] = 0.0;  // zero samples must be handled
    const RealFn fn(g, f, p);
    const RealFn gfun = norming_functional(fn);
    const double q = conjugate_exponent(p);
    CHECK(gfun.p == doctest::Approx(q).epsilon(1e-15));
    CHECK(norm(gfun) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pair(gfun, fn) == doctest::Approx(norm(fn)).epsilon(1e-10));
  }
  CHECK_THROWS(norming_samples<double>(Vec::Zero(4), 2.0, 0.25));
  CHECK_THROWS(norming_samples<double>(Vec::Ones(4), 1.0, 0.25));
}

TEST_CASE("scaled norming functional has the advertised pairing and dual norm") {
  Grid g(40);
  RandomStream rs(6, StreamId{kFunctionalData, 10, 0});
  const double p = 2.0, q = 1.5;
  Vec f(g.n);
  for (int i = 0; i < g.n; ++i) f[i] = 1.0 + rs.uniform(std::uint64_t(i));
  const RealFn fn(g, f, p);
  const RealFn sg = scaled_norming_functional(fn, q);
  const double nf = norm(fn);
  CHECK(pair(sg, fn) == doctest::Approx(std::pow(nf, (p - q) / p)).epsilon(1e-10));
  CHECK(lp_norm(sg.samples, conjugate_exponent(p), g.h) ==
        doctest::Approx(std::pow(nf, -q / p)).epsilon(1e-10));
}

TEST_CASE("conjugate exponents pair up") {
  CHECK(conjugate_exponent(2.0) == 2.0);
  CHECK(conjugate_exponent(1.5) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::isinf(conjugate_exponent(1.0)));
  CHECK(conjugate_exponent(kInf) == 1.0);
  CHECK_THROWS(conjugate_exponent(0.5));
}

TEST_CASE("forward-difference seminorm recovers a linear slope exactly") {
  Grid g(128);
  const RealFn f = RealFn::sample(g, [](double x) { return 3.0 * x; });
  // Differences of 3x are exactly 3h/h = 3 on all n-1 cells; the seminorm is
  // 3 * sqrt(h (n-1)) = 3 * sqrt(1 - h).
  CHECK(derivative_l2_norm(f) ==
        doctest::Approx(3.0 * std::sqrt(1.0 - g.h)).epsilon(1e-14));
}

TEST_CASE("left-endpoint and Simpson quadrature agree at their orders") {
  Grid g(512);
  const RealFn f = RealFn::sample(g, [](double x) { return std::exp(x); });
  const double exact = std::exp(1.0) - 1.0;  // integral over [0, 1)
  // Left endpoint is first order: error about h/2 * (f(1) - f(0)).
  CHECK(std::abs(integral(f) - exact) < 2.0 * g.h);
  CHECK(std::abs(integral(f) - exact) > 0.1 * g.h);
  // Simpson covers [0, 1-h] with a trapezoid fix-up on the final odd cell,
  // so the error is dominated by that one cell: about e/12 * h^3.
  CHECK(std::abs(simpson_integral(f.samples, g.h) - (std::exp(1.0 - g.h) - 1.0)) <
        g.h * g.h * g.h);
  // Still far more accurate than the first-order rule.
  CHECK(std::abs(simpson_integral(f.samples, g.h) - (std::exp(1.0 - g.h) - 1.0)) <
        1e-4 * g.h);
}

TEST_CASE("grid function construction validates sizes") {
  Grid g(8);
  CHECK_THROWS(RealFn(g, Vec::Ones(7)));
  const RealFn c = RealFn::constant(g, 2.5, 1.5);
  CHECK(c.p == 1.5);
  CHECK(c.samples[3] == 2.5);
}

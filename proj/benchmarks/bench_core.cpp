// Microbenchmarks for the hot paths: kernel products, operator application,
// orbit propagation, commutant extraction, and the separation certificate.
#include <benchmark/benchmark.h>

#include "voltlab/conv_algebra.hpp"
#include "voltlab/dynamics.hpp"
#include "voltlab/operators.hpp"
#include "voltlab/pipeline.hpp"
#include "voltlab/probes.hpp"
#include "voltlab/sampling.hpp"
#include "voltlab/weakclosure.hpp"
#include "voltlab/witness.hpp"

using namespace voltlab;

static void BM_kernel_star(benchmark::State& state) {
  Grid g(int(state.range(0)));
  const ConvElement<double> a(g, seeded_positive_kernel(g, 1, kKernelData, 0, 0));
  const ConvElement<double> b(g, seeded_positive_kernel(g, 1, kKernelData, 0, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(star(a, b));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_kernel_star)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

static void BM_operator_apply(benchmark::State& state) {
  Grid g(int(state.range(0)));
  const LinOp<double> v = volterra(g);
  const Vec f = seeded_smooth_field(g, 2, kStartVector, 0, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(v.apply(f));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_operator_apply)->Arg(256)->Arg(1024)->Arg(4096)->Complexity();

static void BM_conv_operator_product(benchmark::State& state) {
  Grid g(int(state.range(0)));
  const LinOp<double> c =
      conv_matrix(ConvElement<double>(g, seeded_positive_kernel(g, 3, kKernelData, 0, 0)));
  const LinOp<double> b =
      conv_matrix(ConvElement<double>(g, seeded_positive_kernel(g, 3, kKernelData, 0, 1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(c * b);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_conv_operator_product)->Arg(256)->Arg(512)->Arg(1024)->Complexity();

static void BM_orbit(benchmark::State& state) {
  Grid g(int(state.range(0)));
  const LinOp<double> v = volterra(g);
  const Vec x0 = Vec::Ones(g.n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(orbit(v, x0, 2.0, g.h, 64));
  }
}
BENCHMARK(BM_orbit)->Arg(256)->Arg(1024);

static void BM_growth_margins(benchmark::State& state) {
  Grid g(256);
  const WitnessSet w = canonical_witness_set(g, volterra(g), Vec::Ones(g.n));
  const Vec h_fun = Vec::Ones(g.n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(functional_growth_report(w, h_fun, 2.0, int(state.range(0))));
  }
}
BENCHMARK(BM_growth_margins)->Arg(25)->Arg(50);

static void BM_joint_commutant(benchmark::State& state) {
  Grid g(int(state.range(0)));
  const Mat a = volterra(g).mat;
  const Mat b = mult_by_x(g).mat;
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_commutant(a, b));
  }
}
BENCHMARK(BM_joint_commutant)->Arg(8)->Arg(16);

static void BM_gaussian_certificate(benchmark::State& state) {
  const int dim = int(state.range(0));
  std::vector<Vec> points;
  points.reserve(std::size_t(dim));
  for (int n = 0; n < dim; ++n) points.push_back(double(n + 1) * Vec::Unit(dim, n));
  const SpaceSpec sp{2.0, 1.0};
  const NormingFamily fam = build_norming_family(points, Vec::Zero(dim), sp, 1.5);
  std::vector<Vec> ds = points;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_certificate(fam, ds, sp, 4, 5, 42));
  }
}
BENCHMARK(BM_gaussian_certificate)->Arg(64)->Arg(200);

BENCHMARK_MAIN();

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "voltlab/weakclosure.hpp"
#include "voltlab/witness.hpp"

namespace voltlab {

struct GrowthRow {
  int n = 0;
  double norm_yn = 0.0;    // ||y_n|| after projective normalization
  double lower = 0.0;      // (n+1) |b| / c_measured
  bool ok = false;         // norm_yn >= lower (up to roundoff slack)
  bool skipped = false;    // <f, x_n> vanished, y_n undefined
};

struct PipelineOptions {
  double p = 2.0;
  double q = 1.5;
  int n_max = 60;
  int k = 3;
  int max_trials = 8;
  std::uint64_t seed = 0;
};

struct PipelineReport {
  double b = 0.0;           // <u, y>, must be nonzero
  Vec u;                    // (C S)^H h, the functional driving the growth
  Vec f;                    // u / b, normalized so <f, y> = 1
  double c_measured = 0.0;  // max_n (n+1) |<u, x_n>| / ||x_n||
  double c_lemma = 0.0;     // a-priori bound ||(B - C M)^H h||_q
  std::vector<GrowthRow> rows;
  NormingFamily family;
  CertificateResult certificate;
  int skipped = 0;
};

/// End-to-end growth argument at desk scale. From the witness family and a
/// probe functional h:
///   u = (C S)^H h,  b = <u, y>  (nonzero required),  f = u / b,
///   x_n = T^n y,    y_n = x_n / <f, x_n>,
/// the measured embedding constant c_measured = max_n (n+1)|<u,x_n>|/||x_n||
/// is compared against the a-priori c_lemma, the normalized sequence must
/// grow at least like (n+1)|b| / c_measured, and the differences y_n - y are
/// handed to the gaussian separation certificate.
///
/// The sequence starts at `start` when given (e.g. R x for a cyclic
/// candidate x), otherwise at the witness vector w.y.
inline PipelineReport run_pipeline(const WitnessSet& w, const Vec& h_fun,
                                   const PipelineOptions& opt,
                                   const Vec* start = nullptr) {
  w.require_clean();
  const SpaceSpec sp{opt.p, w.grid.h};
  const Vec& y0 = start ? *start : w.y;
  if (y0.size() != w.grid.n) {
    throw std::invalid_argument("run_pipeline: start size mismatch");
  }

  PipelineReport rep;
  rep.u = (w.C * w.S).adjoint().apply(h_fun);
  rep.b = pair(rep.u, y0, sp.weight);
  if (rep.b == 0.0) {
    throw std::domain_error("run_pipeline: <u, y> = 0, pick a different probe");
  }
  rep.f = rep.u / rep.b;
  rep.c_lemma = lp_norm((w.B - w.C * w.M).adjoint().apply(h_fun),
                        conjugate_exponent(opt.p), sp.weight);

  // Unrenormalized orbit: factorial decay stays comfortably inside double
  // range for the n this pipeline is meant for (guarded below regardless).
  std::vector<Vec> xs;
  Vec x = y0;
  for (int n = 0; n <= opt.n_max; ++n) {
    if (lp_norm(x, opt.p, sp.weight) == 0.0) break;
    xs.push_back(x);
    x = w.T.apply(x);
  }

  rep.c_measured = 0.0;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const double ratio = double(n + 1) * std::abs(pair(rep.u, xs[n], sp.weight)) /
                         lp_norm(xs[n], opt.p, sp.weight);
    rep.c_measured = std::max(rep.c_measured, ratio);
  }

  std::vector<Vec> points;
  std::vector<int> used;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    GrowthRow row;
    row.n = int(n);
    const double fx = pair(rep.f, xs[n], sp.weight);
    if (fx == 0.0) {
      row.skipped = true;
      rep.skipped += 1;
      rep.rows.push_back(row);
      continue;
    }
    const Vec yn = xs[n] / fx;
    row.norm_yn = lp_norm(yn, opt.p, sp.weight);
    row.lower = rep.c_measured > 0.0 ? double(n + 1) * std::abs(rep.b) / rep.c_measured
                                     : 0.0;
    row.ok = row.norm_yn >= row.lower * (1.0 - 1e-12);
    rep.rows.push_back(row);
    if (row.n >= 1) {  // n = 0 gives y_0 = y: zero difference, not a point
      points.push_back(yn);
      used.push_back(row.n);
    }
  }

  rep.family = build_norming_family(points, y0, sp, opt.q);
  std::vector<Vec> ds;
  ds.reserve(points.size());
  for (const Vec& pnt : points) ds.push_back(pnt - y0);
  rep.certificate =
      gaussian_certificate(rep.family, ds, sp, opt.k, opt.max_trials, opt.seed);
  return rep;
}

}  // namespace voltlab

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "voltlab/grid.hpp"
#include "voltlab/rng.hpp"

namespace voltlab {

/// Random low-frequency field on the grid:
///   1 + 0.25 a_0 + sum_{k=1..4} 0.3 a_k cos(k pi x)
/// with independent standard-normal coefficients a_k drawn from the
/// addressed stream. Smooth, O(1) magnitude, sign not controlled.
inline Vec seeded_smooth_field(Grid g, std::uint64_t seed, StreamDomain domain,
                               std::uint16_t sub, std::uint32_t index) {
  RandomStream rs(seed, StreamId{domain, sub, index});
  Vec v = Vec::Constant(g.n, 1.0 + 0.25 * rs.normal(0));
  for (int k = 1; k <= 4; ++k) {
    const double c = 0.3 * rs.normal(std::uint64_t(k));
    for (int i = 0; i < g.n; ++i) {
      v[i] += c * std::cos(k * std::numbers::pi * g.node(i));
    }
  }
  return v;
}

/// Strictly positive smooth sample: exp of a centered low-frequency field
///   exp( 0.25 a_0 + sum_{k=1..4} (0.3/k) a_k cos(k pi x) ).
/// Values stay within a few multiples of 1 in both directions.
inline Vec seeded_positive_kernel(Grid g, std::uint64_t seed, StreamDomain domain,
                                  std::uint16_t sub, std::uint32_t index) {
  RandomStream rs(seed, StreamId{domain, sub, index});
  Vec s = Vec::Constant(g.n, 0.25 * rs.normal(0));
  for (int k = 1; k <= 4; ++k) {
    const double c = 0.3 / k * rs.normal(std::uint64_t(k));
    for (int i = 0; i < g.n; ++i) {
      s[i] += c * std::cos(k * std::numbers::pi * g.node(i));
    }
  }
  return s.array().exp();
}

}  // namespace voltlab

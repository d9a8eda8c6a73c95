#include "voltlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace voltlab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

inline void philox_round(std::array<std::uint32_t, 4>& ctr, std::uint32_t k0,
                         std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::uint64_t key_hi, std::uint64_t key_lo,
                                        std::uint64_t counter) {
  std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(counter), std::uint32_t(counter >> 32),
      std::uint32_t(key_lo), std::uint32_t(key_lo >> 32)};
  std::uint32_t k0 = std::uint32_t(key_hi);
  std::uint32_t k1 = std::uint32_t(key_hi >> 32);
  for (int r = 0; r < 10; ++r) {
    philox_round(ctr, k0, k1);
    k0 += kWeyl0;
    k1 += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> RandomStream::block(std::uint64_t counter) const {
  return philox4x32(seed_, stream_, counter);
}

double RandomStream::uniform(std::uint64_t i) const {
  // Lane pair (2 of the 4 words) per draw; two draws per block.
  const auto b = block(i / 2);
  const int off = int(i % 2) * 2;
  const std::uint64_t bits =
      (std::uint64_t(b[off + 1]) << 32) | std::uint64_t(b[off]);
  return double(bits + 1) * 0x1p-64;  // in (0, 1]
}

double RandomStream::normal(std::uint64_t i) const {
  const std::uint64_t k = i / 2;
  const double u1 = uniform(2 * k);
  const double u2 = uniform(2 * k + 1);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return (i % 2 == 0) ? r * std::cos(t) : r * std::sin(t);
}

}  // namespace voltlab

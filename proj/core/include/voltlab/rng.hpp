#pragma once

#include <array>
#include <cstdint>

namespace voltlab {

/// Philox4x32-10 counter-based generator. Stateless: every 128-bit output
/// block is a pure function of (key, counter), so any draw in any stream can
/// be regenerated in O(1) and results do not depend on evaluation order.
///
/// Seeding scheme used throughout the library:
///   key     = (master_seed, stream_id)   -- the 2x32 Philox key is the
///             master seed's halves XOR-folded with the stream id
///   counter = (block_index, 0, 0, 0)
/// A stream id packs (domain << 48) | (sub << 32) | index, see StreamId.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key_hi, std::uint64_t key_lo,
                                        std::uint64_t counter);

/// Registered stream domains. Every consumer of randomness in the library
/// draws from its own domain so that adding draws in one place never shifts
/// another's.
enum StreamDomain : std::uint16_t {
  kKernelData = 1,       // random convolution kernels / witness data
  kFunctionalData = 2,   // random dual functionals
  kStartVector = 3,      // random orbit start vectors
  kGaussCertificate = 4, // gaussian coefficients, sub = trial, index = j
  kSmallBall = 5,        // Monte Carlo gaussians for small-ball checks
  kTorusTarget = 6,      // random unimodular targets
  kObstruction = 7,      // sampled (z, n) pairs
};

/// Identifies an independent substream. domain tags the consumer (documented
/// at each call site), sub/index split further (e.g. trial and component).
struct StreamId {
  std::uint16_t domain = 0;
  std::uint16_t sub = 0;
  std::uint32_t index = 0;

  std::uint64_t packed() const {
    return (std::uint64_t(domain) << 48) | (std::uint64_t(sub) << 32) |
           std::uint64_t(index);
  }
};

/// One reproducible stream of scalar draws. Draw i of any stream is
/// addressable directly: uniforms consume one 32-bit lane pair each, normals
/// are produced in Box-Muller pairs from the same lanes.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, StreamId id)
      : seed_(master_seed), stream_(id.packed()) {}
  RandomStream(std::uint64_t master_seed, std::uint64_t raw_stream)
      : seed_(master_seed), stream_(raw_stream) {}

  /// Uniform draw u_i in (0, 1], from the i-th 64-bit lane.
  double uniform(std::uint64_t i) const;

  /// Standard normal draw i (Box-Muller; draws 2k and 2k+1 share a block).
  double normal(std::uint64_t i) const;

  std::uint64_t stream() const { return stream_; }

 private:
  std::array<std::uint32_t, 4> block(std::uint64_t counter) const;

  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace voltlab

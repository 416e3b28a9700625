#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dualpinn {

/// Seedable, splittable 64-bit random stream.
///
/// Every sampling site forks its own substream from (seed, site label), so
/// adding or removing draws at one site never shifts the sequence seen by
/// another site. The engine (mt19937_64) and the uint64->double conversion
/// are both fully specified, so sequences are identical across platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  /// Derives the substream seed for `label` without constructing the stream.
  std::uint64_t derive_seed(std::string_view label) const;

  /// Forks an independent substream keyed by (this stream's seed, label).
  RngStream fork(std::string_view label) const;

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace dualpinn

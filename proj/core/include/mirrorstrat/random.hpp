#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mirrorstrat/linalg.hpp"

namespace mirrorstrat {

/// SplitMix64 step; used for seeding and seed derivation.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

/// Child seed for stream `index` of `master` (trial splitting). Pure function.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// xoshiro256** generator (Blackman & Vigna), state seeded by SplitMix64.
/// Normal deviates use the Marsaglia polar method; the spare deviate is
/// cached, so the stream is a pure function of the seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound) noexcept;
  double normal() noexcept;
  /// +1 or -1 with equal probability.
  double sign() noexcept;

  /// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t count);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// rows x cols matrix of independent standard normal entries, filled in
/// row-major order from Rng(seed).
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
DenseVector gaussian_vector(std::size_t n, Rng& rng, double stddev = 1.0);

}  // namespace mirrorstrat

#include "mirrorstrat/random.hpp"

#include <cmath>
#include <numeric>

#include "mirrorstrat/errors.hpp"

namespace mirrorstrat {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t state = master;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  return splitmix64(state);
}

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t bound) noexcept {
  // Rejection sampling on the top of the range to avoid modulo bias.
  const std::uint64_t limit = bound * (UINT64_MAX / bound);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % bound;
}

double Rng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double Rng::sign() noexcept { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t count) {
  if (count > n) throw ContractViolation("sample_without_replacement: count exceeds population");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw ContractViolation("gaussian_matrix: zero dimension");
  Rng rng(seed);
  std::vector<double> values(rows * cols);
  for (double& v : values) v = rng.normal();
  return DenseMatrix(rows, cols, std::move(values));
}

DenseVector gaussian_vector(std::size_t n, Rng& rng, double stddev) {
  DenseVector v(n);
  for (double& x : v) x = stddev * rng.normal();
  return v;
}

}  // namespace mirrorstrat

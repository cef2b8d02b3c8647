#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace mirrorstrat {

/// R(x) = sum_i |x_i| on R^N.
struct L1Norm {
  std::size_t dimension;
  friend bool operator==(const L1Norm&, const L1Norm&) = default;
};

/// R(x) = sum_B |x_B|_2 over a partition of {0..N-1} into blocks (group Lasso).
class GroupL12Norm {
 public:
  /// Throws ContractViolation unless blocks are nonempty, disjoint and cover
  /// {0..N-1} where N is the total number of indices.
  static GroupL12Norm from_blocks(std::vector<std::vector<std::size_t>> blocks);
  /// Consecutive blocks of equal size; dimension must be a multiple of block_size.
  static GroupL12Norm contiguous(std::size_t dimension, std::size_t block_size);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }

  friend bool operator==(const GroupL12Norm&, const GroupL12Norm&) = default;

 private:
  GroupL12Norm() = default;
  std::vector<std::vector<std::size_t>> blocks_;
  std::size_t dimension_ = 0;
};

/// Nuclear norm of an n x n matrix stored flattened row-major (N = n^2).
struct NuclearNorm {
  std::size_t side;
  friend bool operator==(const NuclearNorm&, const NuclearNorm&) = default;
};

/// Indicator of the unit l-infinity ball [-1, 1]^N.
struct LInfBall {
  std::size_t dimension;
  friend bool operator==(const LInfBall&, const LInfBall&) = default;
};

using RegularizerKind = std::variant<L1Norm, GroupL12Norm, NuclearNorm, LInfBall>;

/// Ambient dimension N of the vectors the regularizer acts on.
std::size_t dimension(const RegularizerKind& kind);
std::string name(const RegularizerKind& kind);

/// Classification thresholds that turn exact strata into finite-precision tests.
struct Tolerances {
  double primal_zero_tol = 1e-8;
  double dual_saturation_tol = 1e-6;

  /// Throws ContractViolation unless both lie in (0, 1e-2].
  void validate() const;
};

}  // namespace mirrorstrat

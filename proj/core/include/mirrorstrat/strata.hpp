#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mirrorstrat/regularizer_kind.hpp"

namespace mirrorstrat {

// Primal strata ------------------------------------------------------------

/// l1 strata: sign orthant faces. Entries in {-1, 0, +1}.
struct SignPattern {
  std::vector<std::int8_t> signs;
  friend bool operator==(const SignPattern&, const SignPattern&) = default;
};

/// l1,2 strata: which blocks are nonzero.
struct BlockSupport {
  std::vector<std::uint8_t> active;
  friend bool operator==(const BlockSupport&, const BlockSupport&) = default;
};

/// Nuclear-norm strata: fixed-rank manifolds of n x n matrices.
struct Rank {
  std::size_t rank;
  std::size_t side;
  friend bool operator==(const Rank&, const Rank&) = default;
};

/// l-infinity ball strata: relative interiors of the faces of [-1,1]^N.
/// +1/-1 marks a coordinate pinned at that bound, 0 a free coordinate.
struct FacePattern {
  std::vector<std::int8_t> saturation;
  friend bool operator==(const FacePattern&, const FacePattern&) = default;
};

using Stratum = std::variant<SignPattern, BlockSupport, Rank, FacePattern>;

// Dual strata ----------------------------------------------------------------

/// l1 dual strata {-1} x ]-1,1[ x {+1} per coordinate.
struct SaturationPattern {
  std::vector<std::int8_t> signs;
  friend bool operator==(const SaturationPattern&, const SaturationPattern&) = default;
};

/// l1,2 dual strata: blocks with |u_B| = 1.
struct BlockSaturation {
  std::vector<std::uint8_t> saturated;
  friend bool operator==(const BlockSaturation&, const BlockSaturation&) = default;
};

/// Nuclear dual strata: sigma_1(U) = ... = sigma_i(U) = 1 > sigma_{i+1}(U).
struct SaturationCount {
  std::size_t count;
  std::size_t side;
  friend bool operator==(const SaturationCount&, const SaturationCount&) = default;
};

/// Dual strata of the l-infinity indicator (strata of the l1 norm R*): the
/// sign pattern of a normal vector.
struct NormalSigns {
  std::vector<std::int8_t> signs;
  friend bool operator==(const NormalSigns&, const NormalSigns&) = default;
};

using DualStratum = std::variant<SaturationPattern, BlockSaturation, SaturationCount, NormalSigns>;

// Order and dimension ----------------------------------------------------------

/// M <= M' iff M is contained in the closure of M'.
/// Throws StratumMismatch on differing variants or sizes.
bool leq(const Stratum& s, const Stratum& t);

/// Complexity dimension: nonzeros, active blocks, rank, or free coordinates
/// of a box face.
std::size_t dim(const Stratum& s);

/// lower <= mid <= upper.
bool sandwich_holds(const Stratum& lower, const Stratum& mid, const Stratum& upper);

/// Descriptor translation of the mirror pairing (primal -> dual). The
/// regularizer-checked entry points are mirror_map / mirror_map_conj.
DualStratum paired_dual(const Stratum& s);
Stratum paired_primal(const DualStratum& d);

/// Dual order transported through the pairing: d <= e iff
/// paired_primal(e) <= paired_primal(d).
bool dual_leq(const DualStratum& d, const DualStratum& e);

/// dim(J_{R*}(dual_upper)) - dim(primal). Throws InconsistentCertificateError
/// when primal is not below the upper stratum, StratumMismatch when
/// dual_upper does not pair with kind.
int delta_star(const Stratum& primal, const DualStratum& dual_upper, const RegularizerKind& kind);

/// True when the descriptor is the variant (and size) produced by `kind`.
bool matches(const RegularizerKind& kind, const Stratum& s);
bool matches(const RegularizerKind& kind, const DualStratum& d);

// Text form --------------------------------------------------------------------

/// Sign/face patterns as strings over {+,0,-}; block bits as {1,0}; ranks and
/// saturation counts as integers.
std::string to_string(const Stratum& s);
std::string to_string(const DualStratum& d);
/// Inverse of to_string for primal strata of the given regularizer.
Stratum parse_stratum(const RegularizerKind& kind, std::string_view text);

}  // namespace mirrorstrat

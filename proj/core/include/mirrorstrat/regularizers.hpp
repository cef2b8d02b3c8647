#pragma once

#include <cstddef>
#include <memory>

#include "mirrorstrat/linalg.hpp"
#include "mirrorstrat/regularizer_kind.hpp"
#include "mirrorstrat/strata.hpp"

namespace mirrorstrat {

// All functions below throw DimensionError when a vector's length does not
// match dimension(kind). Nuclear-norm vectors are n x n matrices flattened
// row-major.

/// R(x); +infinity only for the l-infinity indicator outside its ball.
double evaluate(const RegularizerKind& kind, const DenseVector& x);

/// Fenchel conjugate R*(u). For the three norms this is the indicator of
/// the dual unit ball; for the l-infinity indicator it is |u|_1.
double evaluate_conjugate(const RegularizerKind& kind, const DenseVector& u);

/// Dual norm of u (|u|_inf, max block norm, spectral norm). Not defined for
/// the l-infinity indicator (throws ContractViolation).
double dual_norm(const RegularizerKind& kind, const DenseVector& u);

/// prox_{mu R}(x) = argmin_z 1/2 |z - x|^2 + mu R(z). Requires mu > 0.
DenseVector prox(const RegularizerKind& kind, double mu, const DenseVector& x);

/// prox_{mu R*}(x), through the Moreau decomposition x - mu prox_{R/mu}(x/mu).
DenseVector prox_conjugate(const RegularizerKind& kind, double mu, const DenseVector& x);

/// R_0(x): nonzeros, active blocks, rank, or saturated coordinates.
std::size_t complexity_index(const RegularizerKind& kind, const DenseVector& x,
                             const Tolerances& tol = {});

/// M_x, the stratum containing x.
Stratum primal_stratum(const RegularizerKind& kind, const DenseVector& x,
                       const Tolerances& tol = {});

/// M*_u, the dual stratum containing u. Throws InfeasibleDualError when u
/// leaves dom(dR*) by more than dual_saturation_tol.
DualStratum dual_stratum(const RegularizerKind& kind, const DenseVector& u,
                         const Tolerances& tol = {});

/// J_R on strata. Throws StratumMismatch if s was not produced by kind.
DualStratum mirror_map(const RegularizerKind& kind, const Stratum& s);
/// J_{R*} on strata, inverse of mirror_map.
Stratum mirror_map_conj(const RegularizerKind& kind, const DualStratum& d);

/// Euclidean projection onto the convex set dR(x0), with its
/// x0-dependent data factored once (the nuclear-norm case stores the
/// singular subspaces of x0).
class SubdifferentialProjector {
 public:
  SubdifferentialProjector(const RegularizerKind& kind, const DenseVector& x0,
                           const Tolerances& tol = {});
  ~SubdifferentialProjector();
  SubdifferentialProjector(SubdifferentialProjector&&) noexcept;
  SubdifferentialProjector& operator=(SubdifferentialProjector&&) noexcept;

  DenseVector operator()(const DenseVector& v) const;
  /// |v - P(v)|.
  double distance(const DenseVector& v) const;
  std::size_t dimension() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

DenseVector project_subdifferential(const RegularizerKind& kind, const DenseVector& x0,
                                    const DenseVector& v, const Tolerances& tol = {});

}  // namespace mirrorstrat

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mirrorstrat/linalg.hpp"
#include "mirrorstrat/regularizer_kind.hpp"
#include "mirrorstrat/strata.hpp"

namespace mirrorstrat {

struct GroundTruth {
  DenseVector x0;
  DenseVector y0;  // phi * x0
  DenseVector w;   // noise, y = y0 + w
};

/// min_x E(x) = R(x) + 1/(2 lambda) |y - phi x|^2.
struct ProblemInstance {
  DenseMatrix phi;  // P x N
  DenseVector y;    // length P
  double lambda = 1.0;
  RegularizerKind regularizer = L1Norm{0};
  std::optional<GroundTruth> truth;

  /// Checks sizes, lambda > 0, and the ground-truth identities to 1e-12.
  void validate() const;
  std::size_t measurements() const noexcept { return phi.rows(); }
  std::size_t unknowns() const noexcept { return phi.cols(); }
};

struct SolverParams {
  double gamma = 1.0;
  double tau = 1.0;
  int max_iters = 1000;
  double stop_tol = 1e-9;
};

/// What a solve keeps per iteration.
enum class Recording {
  kFull,     // objective, R_0, stratum and residual every iteration
  kResidual  // residual only (no objective or stratum work)
};

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  std::size_t r0 = 0;
  std::string stratum;
  double residual = 0.0;
};

struct SolverTrace {
  std::vector<IterationRecord> records;
  DenseVector final_iterate;
  /// Last subgradient estimate: u in dR(final_iterate) built from the
  /// iteration itself ((w - x+)/gamma for FB, (z - x)/gamma for DR).
  DenseVector dual_estimate;
  double final_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Called once per iteration with the record and the current iterate.
using IterationHook = std::function<void(const IterationRecord&, const DenseVector&)>;

struct SolveOptions {
  Recording recording = Recording::kFull;
  Tolerances tolerances{};
  IterationHook hook{};
};

/// R(x) + |y - phi x|^2 / (2 lambda).
double objective(const ProblemInstance& problem, const DenseVector& x);

/// Dual objective <q, y> - lambda/2 |q|^2 - R*(phi^T q).
double dual_objective(const ProblemInstance& problem, const DenseVector& q);

/// E(x) - D(q) with q = (y - phi x)/lambda, rescaled into the dual unit ball
/// when phi^T q overshoots it (norm regularizers only).
double duality_gap(const ProblemInstance& problem, const DenseVector& x);

/// Largest admissible FB step: 2 lambda / sigma_max(phi^T phi).
double fb_step_bound(const ProblemInstance& problem);

/// Relaxed forward-backward splitting
///   x+ = (1 - tau) x + tau prox_{gamma R}(x - gamma grad f(x)),
///   grad f(x) = phi^T (phi x - y) / lambda,
/// started at x = 0. Stops when |T(x) - x| <= stop_tol.
/// Throws ContractViolation unless 0 < gamma < 2 lambda / sigma_max and
/// tau in (0, 1].
SolverTrace fb_solve(const ProblemInstance& problem, const SolverParams& params,
                     const SolveOptions& options = {});

/// Which function's prox comes first in the Douglas-Rachford loop.
enum class DrOrder {
  kDataFirst,         // v = prox_{gamma f}(2x - z), x = prox_{gamma R}(z)
  kRegularizerFirst,  // roles of f and R exchanged
};

/// Douglas-Rachford splitting with f = data term and g = R, started at
/// z = 0 with x the second prox of z. The recorded iterate is always the output of the R-prox. The
/// data prox solves (I + gamma/lambda phi^T phi) x = a + gamma/lambda phi^T y
/// with one Cholesky factorization per solve. Residual |z+ - z| / tau.
/// Throws ContractViolation unless gamma > 0 and tau in (0, 2).
SolverTrace dr_solve(const ProblemInstance& problem, const SolverParams& params,
                     const SolveOptions& options = {}, DrOrder order = DrOrder::kDataFirst);

struct ReferenceOptions {
  double tol = 1e-10;
  int max_iters = 200000;
  double step_factor = 1.8;  // gamma = step_factor * lambda / sigma_max
};

/// High-accuracy minimizer by unrelaxed FB. Throws NumericalError with the
/// achieved residual when the budget runs out.
DenseVector reference_solve(const ProblemInstance& problem, const ReferenceOptions& options = {});

/// The FB run behind reference_solve, returned as is (residual recording
/// only, no throw on an exhausted budget).
SolverTrace reference_trace(const ProblemInstance& problem, const ReferenceOptions& options = {});

}  // namespace mirrorstrat

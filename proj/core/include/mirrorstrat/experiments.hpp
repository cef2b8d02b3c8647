#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mirrorstrat/certificates.hpp"
#include "mirrorstrat/linalg.hpp"
#include "mirrorstrat/regularizer_kind.hpp"
#include "mirrorstrat/solvers.hpp"
#include "mirrorstrat/strata.hpp"

namespace mirrorstrat {

enum class RegularizerFamily { kL1, kGroup, kNuclear };
enum class SolverChoice { kForwardBackward, kDouglasRachford };
enum class LambdaRule { kFixed, kProportional };

/// How the sensing matrix is scaled: unit-variance entries, or variance
/// 1/P (columns of unit norm in expectation).
enum class PhiScaling { kUnit, kNormalized };

struct ExperimentConfig {
  RegularizerFamily family = RegularizerFamily::kL1;
  std::size_t unknowns = 100;     // N; for nuclear derived as side^2
  std::size_t measurements = 50;  // P
  std::size_t block_size = 1;     // group only
  std::size_t side = 0;           // nuclear only
  std::size_t r0_target = 10;     // nonzeros, active blocks or rank
  double noise_std = 0.1;
  LambdaRule lambda_rule = LambdaRule::kFixed;
  double lambda = 0.28;
  double c0 = 0.4;
  double lambda_floor = 1e-6;
  int trials = 200;
  std::uint64_t master_seed = 1;
  PhiScaling phi_scaling = PhiScaling::kUnit;

  SolverChoice solver = SolverChoice::kForwardBackward;
  double gamma_factor = 1.8;  // gamma = gamma_factor * lambda / sigma_max(phi^T phi)
  double tau = 1.0;
  int path_iters = 2000;
  double stop_tol = 1e-9;

  double reference_tol = 1e-10;
  int reference_max_iters = 200000;
  CertificateOptions certificate{};
  Tolerances tolerances{};
  double injectivity_threshold = 1e-8;

  std::vector<int> r0_grid;
  std::vector<int> delta_grid;

  /// Throws ConfigError on any violated invariant.
  void validate() const;
  RegularizerKind regularizer() const;
  /// Largest admissible r0_target (N, block count or side).
  std::size_t r0_range() const;

  /// (N, P) = (100, 50), 10 nonzeros, noise 0.1, lambda = 0.28.
  static ExperimentConfig l1_default();
  /// n = 20, P = 300, rank 4, noise 0.1, lambda = 10.
  static ExperimentConfig nuclear_default();
};

std::string family_name(RegularizerFamily f);
std::string solver_name(SolverChoice s);

/// Phi from derive_seed(trial_seed, 0), x0 from stream 1, w from stream 2.
/// Throws ConfigError when r0_target does not fit the dimensions.
ProblemInstance gen_instance(const ExperimentConfig& config, std::uint64_t trial_seed,
                             bool noiseless = false);

/// Fixed rule: config.lambda. Proportional: c0 |w|, floored at lambda_floor.
double lambda_select(const ExperimentConfig& config, const DenseVector& w);

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  bool valid = false;  // reference solve converged
  std::size_t r0_x0 = 0;
  std::size_t r0_hat = 0;
  int delta = 0;
  std::optional<int> delta_star;  // absent when the certificate failed
  bool unique = false;
  std::optional<bool> sandwich;  // absent unless the certificate exists
  int iterations = 0;
  double lambda = 0.0;
  std::string stratum_x0;
  std::string stratum_hat;
  std::string stratum_upper;
  std::string error;
};

struct PathTrace {
  int trial = 0;
  std::vector<std::size_t> r0;
  std::vector<std::string> strata;
  std::size_t lower_bound = 0;                // R0(x0)
  std::optional<std::size_t> upper_bound;     // dim of the upper stratum
};

struct PhaseRow {
  int r0 = 0;
  int delta = 0;
  double rho = 0.0;
  int n_certified = 0;
  int n_trials = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  std::map<int, int> histogram;  // delta -> count over valid trials
  std::vector<PathTrace> paths;
  std::vector<PhaseRow> phase;
};

/// Per trial: instance, reference solve, delta, certificate, sandwich.
ExperimentResult run_histogram(const ExperimentConfig& config);

/// Per trial: config.path_iters iterations of the configured solver,
/// recording R0 and the stratum of every iterate.
ExperimentResult run_iteration_path(const ExperimentConfig& config);

/// rho(r0, delta) over noiseless instances; uses config.r0_grid and
/// config.delta_grid. Certificate failures count as not certified.
ExperimentResult run_phase_transition(const ExperimentConfig& config);

/// Grids used when a configuration leaves them empty: L1 and group
/// complexities spanning 1..range in about 25 steps, every rank 1..n for
/// nuclear; delta from 0 up to the largest achievable excess.
std::vector<int> default_r0_grid(const ExperimentConfig& config);
std::vector<int> default_delta_grid(const ExperimentConfig& config);

/// Integer-binned histogram covering [min delta, max delta] of the valid trials.
std::map<int, int> delta_histogram(const std::vector<TrialRecord>& trials);

struct ProjectionDemoReport {
  DenseVector x_hat;  // clip(p0)
  DenseVector u_hat;  // p0 - x_hat
  std::string lower;  // stratum of x_hat
  std::string upper;  // J_{R*}(M*_{u_hat})
  std::map<std::string, int> observed;  // stratum -> count
  int samples = 0;
  int sandwich_passes = 0;
};

/// Projection onto the unit l-infinity ball under perturbations of p0
/// drawn uniformly from the Euclidean ball of the given radius.
ProjectionDemoReport projection_demo(const DenseVector& p0, double radius, int samples,
                                     std::uint64_t seed);

/// Runs body(i) for i in [0, count) on up to `workers` threads (0 = hardware
/// concurrency). Exceptions are rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace mirrorstrat

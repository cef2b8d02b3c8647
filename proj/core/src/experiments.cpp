#include "mirrorstrat/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/random.hpp"
#include "mirrorstrat/regularizers.hpp"

namespace mirrorstrat {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

DenseVector draw_truth(const ExperimentConfig& config, std::size_t r0, Rng& rng) {
  DenseVector x0(config.unknowns);
  switch (config.family) {
    case RegularizerFamily::kL1: {
      for (std::size_t i : rng.sample_without_replacement(config.unknowns, r0)) x0[i] = rng.sign();
      break;
    }
    case RegularizerFamily::kGroup: {
      const auto kind = GroupL12Norm::contiguous(config.unknowns, config.block_size);
      for (std::size_t b : rng.sample_without_replacement(kind.block_count(), r0)) {
        const auto& block = kind.blocks()[b];
        DenseVector content = gaussian_vector(block.size(), rng);
        const double nrm = norm2(content.span());
        for (std::size_t j = 0; j < block.size(); ++j) x0[block[j]] = content[j] / nrm;
      }
      break;
    }
    case RegularizerFamily::kNuclear: {
      if (r0 == 0) break;
      const std::size_t n = config.side;
      DenseMatrix a(n, r0), b(n, r0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r0; ++j) a(i, j) = rng.normal();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < r0; ++j) b(i, j) = rng.normal();
      SvdFactorization f = svd(matmul(a, b.transpose()));
      for (std::size_t k = 0; k < n; ++k) f.singular_values[k] = k < r0 ? 1.0 : 0.0;
      x0 = f.reconstruct().flatten();
      break;
    }
  }
  return x0;
}

ReferenceOptions reference_options(const ExperimentConfig& config) {
  return {config.reference_tol, config.reference_max_iters, config.gamma_factor};
}

std::uint64_t phase_seed(std::uint64_t master, int r0, int trial) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(r0)),
                     static_cast<std::uint64_t>(trial));
}

TrialRecord histogram_trial(const ExperimentConfig& config, const RegularizerKind& kind, int i) {
  TrialRecord rec;
  rec.trial = i;
  rec.seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(i));
  const ProblemInstance inst = gen_instance(config, rec.seed);
  const DenseVector& x0 = inst.truth->x0;
  rec.lambda = inst.lambda;
  rec.r0_x0 = complexity_index(kind, x0, config.tolerances);
  rec.stratum_x0 = to_string(primal_stratum(kind, x0, config.tolerances));

  const SolverTrace trace = reference_trace(inst, reference_options(config));
  rec.iterations = trace.iterations;
  const Stratum hat = primal_stratum(kind, trace.final_iterate, config.tolerances);
  rec.r0_hat = complexity_index(kind, trace.final_iterate, config.tolerances);
  rec.delta = static_cast<int>(rec.r0_hat) - static_cast<int>(rec.r0_x0);
  rec.stratum_hat = to_string(hat);
  if (!trace.converged) {
    rec.error = "reference solve: residual " + std::to_string(trace.final_residual);
    return rec;
  }
  rec.valid = true;

  try {
    const Certificate cert = min_norm_certificate(inst.phi, x0, kind, config.certificate);
    rec.delta_star = cert.delta_star;
    rec.stratum_upper = to_string(cert.upper_stratum);
    rec.unique = uniqueness_check(inst.phi, x0, cert, kind, 1e-6, config.injectivity_threshold);
    rec.sandwich = sandwich_holds(cert.primal_stratum, hat, cert.upper_stratum);
  } catch (const CertificateError& e) {
    rec.error = e.what();
  }
  return rec;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(trials >= 1, "trials must be >= 1");
  require(noise_std >= 0.0 && std::isfinite(noise_std), "noise_std must be >= 0");
  require(measurements >= 1, "P must be >= 1");
  switch (family) {
    case RegularizerFamily::kL1:
      require(unknowns >= 1, "N must be >= 1");
      break;
    case RegularizerFamily::kGroup:
      require(unknowns >= 1 && block_size >= 1 && unknowns % block_size == 0,
              "N must be a positive multiple of block_size");
      break;
    case RegularizerFamily::kNuclear:
      require(side >= 1 && unknowns == side * side, "nuclear needs side >= 1 and N = side^2");
      break;
  }
  require(r0_target <= r0_range(), "r0_target " + std::to_string(r0_target) +
                                        " outside [0, " + std::to_string(r0_range()) + "]");
  require(lambda_rule == LambdaRule::kProportional || lambda > 0.0, "lambda must be positive");
  require(lambda_rule == LambdaRule::kFixed || c0 > 0.0, "c0 must be positive");
  require(lambda_floor > 0.0, "lambda_floor must be positive");
  require(gamma_factor > 0.0, "gamma_factor must be positive");
  require(solver == SolverChoice::kDouglasRachford || gamma_factor < 2.0,
          "gamma_factor must be below 2 for FB");
  if (solver == SolverChoice::kForwardBackward) {
    require(tau > 0.0 && tau <= 1.0, "tau must lie in (0, 1] for FB");
  } else {
    require(tau > 0.0 && tau < 2.0, "tau must lie in (0, 2) for DR");
  }
  require(path_iters >= 1, "path_iters must be >= 1");
  require(stop_tol >= 0.0, "stop_tol must be >= 0");
  require(reference_tol > 0.0 && reference_max_iters >= 1, "reference tolerance and budget");
  require(certificate.max_iters >= 1 && certificate.tol > 0.0, "certificate tolerance and budget");
  require(injectivity_threshold >= 0.0, "injectivity_threshold must be >= 0");
  try {
    tolerances.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (int r : r0_grid) require(r >= 0 && static_cast<std::size_t>(r) <= r0_range(), "r0_grid entry out of range");
  for (int d : delta_grid) require(d >= 0, "delta_grid entries must be >= 0");
}

RegularizerKind ExperimentConfig::regularizer() const {
  switch (family) {
    case RegularizerFamily::kL1:
      return L1Norm{unknowns};
    case RegularizerFamily::kGroup:
      return GroupL12Norm::contiguous(unknowns, block_size);
    case RegularizerFamily::kNuclear:
      return NuclearNorm{side};
  }
  throw ConfigError("config: unknown regularizer");
}

std::size_t ExperimentConfig::r0_range() const {
  switch (family) {
    case RegularizerFamily::kL1:
      return unknowns;
    case RegularizerFamily::kGroup:
      return block_size == 0 ? 0 : unknowns / block_size;
    case RegularizerFamily::kNuclear:
      return side;
  }
  return 0;
}

ExperimentConfig ExperimentConfig::l1_default() { return {}; }

ExperimentConfig ExperimentConfig::nuclear_default() {
  ExperimentConfig c;
  c.family = RegularizerFamily::kNuclear;
  c.side = 20;
  c.unknowns = 400;
  c.measurements = 300;
  c.r0_target = 4;
  c.lambda = 10.0;
  return c;
}

std::string family_name(RegularizerFamily f) {
  switch (f) {
    case RegularizerFamily::kL1:
      return "l1";
    case RegularizerFamily::kGroup:
      return "group";
    case RegularizerFamily::kNuclear:
      return "nuclear";
  }
  return "?";
}

std::string solver_name(SolverChoice s) { return s == SolverChoice::kForwardBackward ? "fb" : "dr"; }

ProblemInstance gen_instance(const ExperimentConfig& config, std::uint64_t trial_seed,
                             bool noiseless) {
  config.validate();
  ProblemInstance inst;
  inst.regularizer = config.regularizer();
  inst.phi = gaussian_matrix(config.measurements, config.unknowns, derive_seed(trial_seed, 0));
  if (config.phi_scaling == PhiScaling::kNormalized) {
    const double s = 1.0 / std::sqrt(static_cast<double>(config.measurements));
    for (double& v : std::span<double>(inst.phi.data(), config.measurements * config.unknowns)) v *= s;
  }
  Rng truth_rng(derive_seed(trial_seed, 1));
  GroundTruth truth;
  truth.x0 = draw_truth(config, config.r0_target, truth_rng);
  truth.y0 = multiply(inst.phi, truth.x0);
  if (noiseless || config.noise_std == 0.0) {
    truth.w = DenseVector(config.measurements);
  } else {
    Rng noise_rng(derive_seed(trial_seed, 2));
    truth.w = gaussian_vector(config.measurements, noise_rng, config.noise_std);
  }
  inst.y = truth.y0 + truth.w;
  inst.lambda = lambda_select(config, truth.w);
  inst.truth = std::move(truth);
  return inst;
}

double lambda_select(const ExperimentConfig& config, const DenseVector& w) {
  if (config.lambda_rule == LambdaRule::kFixed) return config.lambda;
  const double nw = norm2(w.span());
  return nw > 0.0 ? std::max(config.c0 * nw, config.lambda_floor) : config.lambda_floor;
}

std::vector<int> default_r0_grid(const ExperimentConfig& config) {
  const int range = static_cast<int>(config.family == RegularizerFamily::kL1
                                         ? std::min(config.unknowns, config.measurements)
                                         : config.r0_range());
  const int step = config.family == RegularizerFamily::kNuclear ? 1 : std::max(1, range / 25);
  std::vector<int> grid;
  for (int r = 1; r <= range; r += step) grid.push_back(r);
  if (grid.empty() || grid.back() != range) grid.push_back(range);
  return grid;
}

std::vector<int> default_delta_grid(const ExperimentConfig& config) {
  // Largest possible delta*: the full space for L1 and group, n for nuclear.
  const int top = static_cast<int>(config.family == RegularizerFamily::kNuclear
                                       ? config.side
                                       : config.r0_range());
  std::vector<int> grid{0};
  for (int d : {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000}) {
    if (d >= top) break;
    grid.push_back(d);
  }
  grid.push_back(top);
  return grid;
}

std::map<int, int> delta_histogram(const std::vector<TrialRecord>& trials) {
  std::map<int, int> bins;
  for (const auto& t : trials)
    if (t.valid) ++bins[t.delta];
  if (bins.empty()) return bins;
  const int lo = bins.begin()->first;
  const int hi = bins.rbegin()->first;
  for (int d = lo; d <= hi; ++d) bins.try_emplace(d, 0);
  return bins;
}

ExperimentResult run_histogram(const ExperimentConfig& config) {
  config.validate();
  const RegularizerKind kind = config.regularizer();
  ExperimentResult result;
  result.config = config;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  parallel_for(result.trials.size(), [&](std::size_t i) {
    result.trials[i] = histogram_trial(config, kind, static_cast<int>(i));
  });
  result.histogram = delta_histogram(result.trials);
  return result;
}

ExperimentResult run_iteration_path(const ExperimentConfig& config) {
  config.validate();
  const RegularizerKind kind = config.regularizer();
  ExperimentResult result;
  result.config = config;
  result.trials.resize(static_cast<std::size_t>(config.trials));
  result.paths.resize(static_cast<std::size_t>(config.trials));

  parallel_for(result.trials.size(), [&](std::size_t i) {
    TrialRecord& rec = result.trials[i];
    PathTrace& path = result.paths[i];
    rec.trial = path.trial = static_cast<int>(i);
    rec.seed = derive_seed(config.master_seed, i);
    const ProblemInstance inst = gen_instance(config, rec.seed);
    const DenseVector& x0 = inst.truth->x0;
    rec.lambda = inst.lambda;
    rec.r0_x0 = path.lower_bound = complexity_index(kind, x0, config.tolerances);
    rec.stratum_x0 = to_string(primal_stratum(kind, x0, config.tolerances));

    SolverParams params;
    params.gamma = config.gamma_factor * fb_step_bound(inst) / 2.0;
    params.tau = config.tau;
    params.max_iters = config.path_iters;
    params.stop_tol = 0.0;  // record the full requested path
    SolveOptions options;
    options.recording = Recording::kResidual;
    options.tolerances = config.tolerances;
    options.hook = [&](const IterationRecord&, const DenseVector& x) {
      const Stratum s = primal_stratum(kind, x, config.tolerances);
      path.r0.push_back(dim(s));
      path.strata.push_back(to_string(s));
    };
    const SolverTrace trace = config.solver == SolverChoice::kForwardBackward
                                  ? fb_solve(inst, params, options)
                                  : dr_solve(inst, params, options);
    rec.iterations = trace.iterations;
    rec.valid = true;
    const Stratum hat = primal_stratum(kind, trace.final_iterate, config.tolerances);
    rec.r0_hat = complexity_index(kind, trace.final_iterate, config.tolerances);
    rec.delta = static_cast<int>(rec.r0_hat) - static_cast<int>(rec.r0_x0);
    rec.stratum_hat = to_string(hat);
    try {
      const Certificate cert = min_norm_certificate(inst.phi, x0, kind, config.certificate);
      rec.delta_star = cert.delta_star;
      rec.stratum_upper = to_string(cert.upper_stratum);
      rec.unique = uniqueness_check(inst.phi, x0, cert, kind, 1e-6, config.injectivity_threshold);
      rec.sandwich = sandwich_holds(cert.primal_stratum, hat, cert.upper_stratum);
      path.upper_bound = dim(cert.upper_stratum);
    } catch (const CertificateError& e) {
      rec.error = e.what();
    }
  });
  result.histogram = delta_histogram(result.trials);
  return result;
}

ExperimentResult run_phase_transition(const ExperimentConfig& config) {
  config.validate();
  if (config.r0_grid.empty() || config.delta_grid.empty()) {
    throw ConfigError("config: phase transition needs nonempty r0_grid and delta_grid");
  }
  ExperimentResult result;
  result.config = config;
  const std::size_t per_point = static_cast<std::size_t>(config.trials);
  result.trials.resize(config.r0_grid.size() * per_point);

  parallel_for(result.trials.size(), [&](std::size_t idx) {
    const int r0 = config.r0_grid[idx / per_point];
    const int t = static_cast<int>(idx % per_point);
    ExperimentConfig local = config;
    local.r0_target = static_cast<std::size_t>(r0);
    const RegularizerKind kind = local.regularizer();
    TrialRecord& rec = result.trials[idx];
    rec.trial = t;
    rec.seed = phase_seed(config.master_seed, r0, t);
    const ProblemInstance inst = gen_instance(local, rec.seed, true);
    const DenseVector& x0 = inst.truth->x0;
    rec.valid = true;
    rec.r0_x0 = rec.r0_hat = complexity_index(kind, x0, config.tolerances);
    rec.stratum_x0 = rec.stratum_hat = to_string(primal_stratum(kind, x0, config.tolerances));
    try {
      const Certificate cert = min_norm_certificate(inst.phi, x0, kind, config.certificate);
      rec.delta_star = cert.delta_star;
      rec.stratum_upper = to_string(cert.upper_stratum);
      rec.iterations = cert.solver_iterations;
      rec.unique = uniqueness_check(inst.phi, x0, cert, kind, 1e-6, config.injectivity_threshold);
    } catch (const CertificateError& e) {
      rec.iterations = config.certificate.max_iters;
      rec.error = e.what();
    }
  });

  for (std::size_t g = 0; g < config.r0_grid.size(); ++g) {
    const auto first = result.trials.begin() + static_cast<std::ptrdiff_t>(g * per_point);
    const auto last = first + static_cast<std::ptrdiff_t>(per_point);
    const int certified = static_cast<int>(std::count_if(first, last, [](const TrialRecord& r) { return r.unique; }));
    for (int delta : config.delta_grid) {
      const int hits = static_cast<int>(std::count_if(first, last, [&](const TrialRecord& r) {
        return r.unique && r.delta_star && *r.delta_star <= delta;
      }));
      result.phase.push_back({config.r0_grid[g], delta,
                              static_cast<double>(hits) / static_cast<double>(per_point), certified,
                              static_cast<int>(per_point)});
    }
  }
  return result;
}

ProjectionDemoReport projection_demo(const DenseVector& p0, double radius, int samples,
                                     std::uint64_t seed) {
  if (!(radius > 0.0)) throw ContractViolation("projection_demo: radius must be positive");
  if (samples < 1) throw ContractViolation("projection_demo: samples must be >= 1");
  if (p0.size() == 0) throw DimensionError("projection_demo: empty p0");
  const std::size_t n = p0.size();
  const RegularizerKind kind = LInfBall{n};
  const Tolerances tol{};

  ProjectionDemoReport report;
  report.samples = samples;
  // Projection onto the ball is prox of its indicator.
  report.x_hat = prox(kind, 1.0, p0);
  report.u_hat = p0 - report.x_hat;
  const Stratum lower = primal_stratum(kind, report.x_hat, tol);
  const Stratum upper = mirror_map_conj(kind, dual_stratum(kind, report.u_hat, tol));
  report.lower = to_string(lower);
  report.upper = to_string(upper);

  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    // Uniform in the ball: Gaussian direction, radius scaled by U^(1/n).
    DenseVector dir = gaussian_vector(n, rng);
    const double nd = norm2(dir.span());
    const double rad = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(n));
    DenseVector p = p0;
    for (std::size_t i = 0; i < n; ++i) p[i] += rad * dir[i] / nd;
    const Stratum mid = primal_stratum(kind, prox(kind, 1.0, p), tol);
    ++report.observed[to_string(mid)];
    if (sandwich_holds(lower, mid, upper)) ++report.sandwich_passes;
  }
  return report;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned workers) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            const std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = count;
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mirrorstrat

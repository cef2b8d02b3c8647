// Command line front end: single solves, certificates, the three
// experiments and the projection demo.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mirrorstrat/certificates.hpp"
#include "mirrorstrat/config.hpp"
#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/experiments.hpp"
#include "mirrorstrat/random.hpp"
#include "mirrorstrat/regularizers.hpp"
#include "mirrorstrat/report.hpp"
#include "mirrorstrat/solvers.hpp"

namespace fs = std::filesystem;
using namespace mirrorstrat;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> solver;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_trials) {
  cmd->add_option("--config", o.config_path, "Configuration file (key = value)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides the config)");
  if (with_trials) cmd->add_option("--trials", o.trials, "Trial count (overrides the config)")->check(CLI::PositiveNumber);
  cmd->add_option("--solver", o.solver, "Solver (overrides the config)")
      ->check(CLI::IsMember({"fb", "dr"}));
}

ExperimentConfig resolve(const Overrides& o, const ExperimentConfig& fallback = {}) {
  ExperimentConfig c = o.config_path.empty() ? fallback : load_config(o.config_path);
  if (o.seed) c.master_seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.solver) c.solver = *o.solver == "fb" ? SolverChoice::kForwardBackward : SolverChoice::kDouglasRachford;
  c.validate();
  return c;
}

int run_solve(const ExperimentConfig& c, int trial, const fs::path& out) {
  const ProblemInstance inst = gen_instance(c, derive_seed(c.master_seed, static_cast<std::uint64_t>(trial)));
  SolverParams params;
  params.gamma = c.gamma_factor * fb_step_bound(inst) / 2.0;
  params.tau = c.tau;
  params.max_iters = c.path_iters;
  params.stop_tol = c.stop_tol;
  SolveOptions options;
  options.tolerances = c.tolerances;
  const SolverTrace trace = c.solver == SolverChoice::kForwardBackward ? fb_solve(inst, params, options)
                                                                       : dr_solve(inst, params, options);
  write_text(out, trace_csv(trace));
  fs::path svg = out;
  svg.replace_extension(".svg");
  write_text(svg, trace_svg(trace));

  const RegularizerKind kind = c.regularizer();
  std::printf("solver %s, %d iterations, residual %.3e%s\n", solver_name(c.solver).c_str(), trace.iterations,
              trace.final_residual, trace.converged ? "" : " (not converged)");
  std::printf("objective %.12g, duality gap %.3e\n", objective(inst, trace.final_iterate),
              duality_gap(inst, trace.final_iterate));
  std::printf("R0(x0) = %zu, R0(x) = %zu\n", complexity_index(kind, inst.truth->x0, c.tolerances),
              complexity_index(kind, trace.final_iterate, c.tolerances));
  std::printf("wrote %s and %s\n", out.string().c_str(), svg.string().c_str());
  return 0;
}

int run_certificate(const ExperimentConfig& c, int trial, bool include_q) {
  const ProblemInstance inst =
      gen_instance(c, derive_seed(c.master_seed, static_cast<std::uint64_t>(trial)), true);
  const RegularizerKind kind = c.regularizer();
  const Certificate cert = min_norm_certificate(inst.phi, inst.truth->x0, kind, c.certificate);
  const bool unique = uniqueness_check(inst.phi, inst.truth->x0, cert, kind, 1e-6, c.injectivity_threshold);
  std::cout << certificate_json(cert, unique, include_q) << "\n";
  return 0;
}

int run_experiment(const std::string& which, ExperimentConfig c, const fs::path& out_dir) {
  ExperimentResult result;
  if (which == "hist") {
    result = run_histogram(c);
  } else if (which == "path") {
    result = run_iteration_path(c);
  } else {
    if (c.r0_grid.empty()) c.r0_grid = default_r0_grid(c);
    if (c.delta_grid.empty()) c.delta_grid = default_delta_grid(c);
    result = run_phase_transition(c);
  }
  for (const auto& p : write_experiment(out_dir, which, result)) std::printf("wrote %s\n", p.string().c_str());

  int valid = 0;
  for (const auto& t : result.trials) valid += t.valid ? 1 : 0;
  std::printf("%d of %zu trials valid\n", valid, result.trials.size());
  return valid == 0 ? 1 : 0;
}

int run_demo(const std::vector<double>& p0, double radius, int samples, std::uint64_t seed) {
  const ProjectionDemoReport r = projection_demo(DenseVector(p0), radius, samples, seed);
  std::printf("x_hat(p0) stratum %s, upper stratum %s\n", r.lower.c_str(), r.upper.c_str());
  for (const auto& [stratum, count] : r.observed) std::printf("  observed %s  x%d\n", stratum.c_str(), count);
  std::printf("%zu distinct strata, sandwich holds in %d of %d samples\n", r.observed.size(), r.sandwich_passes,
              r.samples);
  return r.sandwich_passes == r.samples ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror-stratifiable regularizers: solvers, certificates and experiments"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  Overrides solve_opts;
  fs::path trace_out = "trace.csv";
  int solve_trial = 0;
  auto* solve = app.add_subcommand("solve", "Solve one generated instance and write its trace");
  add_overrides(solve, solve_opts, false);
  solve->add_option("--out", trace_out, "Trace CSV path");
  solve->add_option("--trial", solve_trial, "Trial index used to derive the instance seed")->check(CLI::NonNegativeNumber);

  Overrides cert_opts;
  int cert_trial = 0;
  bool include_q = false;
  auto* cert = app.add_subcommand("certificate", "Minimum-norm certificate of a noiseless generated instance");
  add_overrides(cert, cert_opts, false);
  cert->add_option("--trial", cert_trial, "Trial index used to derive the instance seed")->check(CLI::NonNegativeNumber);
  cert->add_flag("--include-q", include_q, "Print the certificate vector");

  Overrides exp_opts;
  std::string which;
  fs::path out_dir = "results";
  auto* experiment = app.add_subcommand("experiment", "Run an experiment and write CSV, SVG and meta.json");
  experiment->add_option("kind", which, "hist | path | transition")
      ->required()
      ->check(CLI::IsMember({"hist", "path", "transition"}));
  add_overrides(experiment, exp_opts, true);
  experiment->add_option("--out-dir", out_dir, "Output directory");

  std::string demo_name;
  std::vector<double> p0{2.0, 1.0};
  double radius = 0.2;
  int samples = 1000;
  std::uint64_t demo_seed = 1;
  auto* demo = app.add_subcommand("demo", "Projection onto the l-infinity ball under perturbation");
  demo->add_option("name", demo_name, "projection")->required()->check(CLI::IsMember({"projection"}));
  demo->add_option("--p0", p0, "Unperturbed point")->expected(1, -1);
  demo->add_option("--radius", radius, "Perturbation radius")->check(CLI::PositiveNumber);
  demo->add_option("--samples", samples, "Number of perturbations")->check(CLI::PositiveNumber);
  demo->add_option("--seed", demo_seed, "Sampling seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return run_solve(resolve(solve_opts), solve_trial, trace_out);
    if (*cert) return run_certificate(resolve(cert_opts), cert_trial, include_q);
    if (*experiment) return run_experiment(which, resolve(exp_opts), out_dir);
    if (*demo) return run_demo(p0, radius, samples, demo_seed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

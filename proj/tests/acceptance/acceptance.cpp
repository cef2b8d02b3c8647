// End-to-end acceptance checks. One PASS/FAIL line per criterion, also
// written to <work-dir>/acceptance_report.txt; exit status is 0 when every
// criterion outside --known-unattainable passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mirrorstrat/certificates.hpp"
#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/experiments.hpp"
#include "mirrorstrat/random.hpp"
#include "mirrorstrat/regularizers.hpp"
#include "mirrorstrat/solvers.hpp"
#include "oracles.hpp"

using namespace mirrorstrat;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

char buf[512];

template <class... Args>
std::string fmt(const char* f, Args... args) {
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// 1. prox against grid refinement, small dimensions, under 30 s.
Outcome prox_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<RegularizerKind> kinds = {L1Norm{3}, GroupL12Norm::from_blocks({{0}, {1, 2}}), NuclearNorm{2},
                                              LInfBall{3}};
  Rng rng(101);
  double worst = 0.0;
  int cases = 0;
  for (const auto& kind : kinds) {
    for (int t = 0; t < 100; ++t, ++cases) {
      const DenseVector x = gaussian_vector(dimension(kind), rng, 1.5);
      const double mu = 0.05 + 2.0 * rng.uniform();
      const DenseVector z = prox(kind, mu, x);
      const auto ref = oracle::brute_force_prox(kind, mu, x.values());
      for (std::size_t i = 0; i < z.size(); ++i) worst = std::max(worst, std::abs(z[i] - ref[i]));
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-3 && elapsed < 30.0,
          fmt("%d cases, max abs error %.2e (limit 1e-3), %.1f s (limit 30 s)", cases, worst, elapsed)};
}

// 2. Moreau identity.
Outcome moreau() {
  const std::vector<RegularizerKind> kinds = {L1Norm{8}, GroupL12Norm::contiguous(8, 2), NuclearNorm{4},
                                              LInfBall{8}};
  Rng rng(202);
  double worst = 0.0;
  for (const auto& kind : kinds) {
    for (int t = 0; t < 1000; ++t) {
      const DenseVector x = gaussian_vector(dimension(kind), rng, 2.0);
      const DenseVector sum = prox(kind, 1.0, x) + prox_conjugate(kind, 1.0, x);
      for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(sum[i] - x[i]));
    }
  }
  return {worst <= 1e-12, fmt("4 x 1000 points, max deviation %.2e (limit 1e-12)", worst)};
}

// 3. SVD accuracy on random matrices up to 20 x 20.
Outcome svd_accuracy() {
  Rng rng(303);
  double worst_rec = 0.0, worst_orth = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + rng.uniform_index(20), n = 1 + rng.uniform_index(20);
    const DenseMatrix a = gaussian_matrix(m, n, derive_seed(303, static_cast<std::uint64_t>(t)));
    const SvdFactorization f = svd(a);
    worst_rec = std::max(worst_rec, frobenius_norm(f.reconstruct() - a) / frobenius_norm(a));
    for (const DenseMatrix* q : {&f.left_factors, &f.right_factors}) {
      const DenseMatrix g = gram(*q);
      worst_orth = std::max(worst_orth, frobenius_norm(g - DenseMatrix::identity(g.rows())));
    }
  }
  return {worst_rec <= 1e-8 && worst_orth <= 1e-10,
          fmt("100 matrices, reconstruction %.2e (limit 1e-8), orthogonality %.2e (limit 1e-10)", worst_rec,
              worst_orth)};
}

ExperimentConfig small_l1_config() {
  ExperimentConfig c;
  c.unknowns = 40;
  c.measurements = 20;
  c.r0_target = 4;
  return c;
}

// 4. FB and DR agree; FB objective and DR residual never increase.
Outcome solver_agreement() {
  const ExperimentConfig c = small_l1_config();
  double worst = 0.0;
  int fb_violations = 0, dr_violations = 0, unconverged = 0;
  for (int t = 0; t < 50; ++t) {
    const ProblemInstance inst = gen_instance(c, derive_seed(404, static_cast<std::uint64_t>(t)));
    SolverParams fp;
    fp.gamma = 1.8 * fb_step_bound(inst) / 2.0;
    fp.max_iters = 200000;
    fp.stop_tol = 1e-10;
    const SolverTrace fb = fb_solve(inst, fp);
    SolverParams dp;
    dp.gamma = inst.lambda;
    dp.max_iters = 200000;
    dp.stop_tol = 1e-10;
    const SolverTrace dr = dr_solve(inst, dp, {Recording::kResidual});
    unconverged += (fb.converged && dr.converged) ? 0 : 1;
    worst = std::max(worst, rel_err(objective(inst, dr.final_iterate), objective(inst, fb.final_iterate)));
    for (std::size_t k = 1; k < fb.records.size(); ++k)
      if (fb.records[k].objective > fb.records[k - 1].objective * (1 + 1e-14) + 1e-300) ++fb_violations;
    for (std::size_t k = 1; k < dr.records.size(); ++k)
      if (dr.records[k].residual > dr.records[k - 1].residual * (1 + 1e-12) + 1e-300) ++dr_violations;
  }
  return {worst <= 1e-6 && fb_violations == 0 && dr_violations == 0,
          fmt("50 instances, objective rel diff %.2e (limit 1e-6), FB increases %d, DR residual increases %d, "
              "unconverged %d",
              worst, fb_violations, dr_violations, unconverged)};
}

// 5. Duality gap of the reference solve.
Outcome duality_gap_check() {
  const ExperimentConfig c = small_l1_config();
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const ProblemInstance inst = gen_instance(c, derive_seed(404, static_cast<std::uint64_t>(t)));
    worst = std::max(worst, duality_gap(inst, reference_solve(inst)));
  }
  return {worst <= 1e-6, fmt("50 instances, max gap %.2e (limit 1e-6)", worst)};
}

// 6. Certificate norm against the exhaustive active-set oracle.
Outcome certificate_oracle() {
  double worst = 0.0, worst_feas = 0.0;
  int done = 0, skipped = 0;
  for (std::uint64_t seed = 1; done < 20 && seed < 1000; ++seed) {
    const std::size_t p = 5 + seed % 4, n = 8 + seed % 5;  // P <= 8, N <= 12
    const DenseMatrix phi = gaussian_matrix(p, n, derive_seed(606, seed));
    Rng rng(derive_seed(607, seed));
    DenseVector x0(n);
    for (std::size_t i : rng.sample_without_replacement(n, 2)) x0[i] = rng.sign();
    const auto ref = oracle::l1_min_norm_certificate(oracle::to_eigen(phi), oracle::to_eigen(x0));
    if (!ref) {
      ++skipped;
      continue;
    }
    const Certificate cert = min_norm_certificate(phi, x0, L1Norm{n});
    worst = std::max(worst, std::abs(norm2(cert.q_bar.span()) - ref->norm()) / ref->norm());
    worst_feas = std::max(worst_feas, cert.feasibility_residual);
    ++done;
  }
  return {done == 20 && worst <= 1e-4 && worst_feas <= 1e-7,
          fmt("%d instances (%d without a certificate skipped), |q| rel error %.2e (limit 1e-4), feasibility "
              "%.2e (limit 1e-7)",
              done, skipped, worst, worst_feas)};
}

// 7. Sandwich on the noisy L1 configuration.
Outcome enlarged_identification() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = ExperimentConfig::l1_default();
  c.trials = 100;
  const ExperimentResult r = run_histogram(c);
  int unique = 0, sandwich = 0, positive = 0, valid = 0, bounded = 0;
  for (const auto& t : r.trials) {
    if (!t.valid) continue;
    ++valid;
    positive += t.delta > 0 ? 1 : 0;
    if (!t.unique) continue;
    ++unique;
    sandwich += t.sandwich.value_or(false) ? 1 : 0;
    bounded += (t.delta_star && t.delta <= *t.delta_star) ? 1 : 0;
  }
  const double frac = unique > 0 ? static_cast<double>(sandwich) / unique : 0.0;
  const double elapsed = seconds_since(t0);
  return {unique > 0 && frac >= 0.9 && elapsed < 300.0,
          fmt("sandwich in %d of %d certified-unique trials (%.0f%%, need 90%%); delta > 0 in %d of %d valid; "
              "delta <= delta* in %d of %d; %.1f s (limit 300 s)",
              sandwich, unique, 100.0 * frac, positive, valid, bounded, unique, elapsed)};
}

// 8. Nuclear configuration.
Outcome nuclear_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig c = ExperimentConfig::nuclear_default();
  c.trials = 50;
  const ExperimentResult r = run_histogram(c);
  int valid = 0, nonneg = 0, certified = 0, bounded = 0;
  for (const auto& t : r.trials) {
    if (!t.valid) continue;
    ++valid;
    nonneg += t.delta >= 0 ? 1 : 0;
    if (!t.unique || !t.delta_star) continue;
    ++certified;
    bounded += static_cast<int>(t.r0_hat) <= 4 + *t.delta_star ? 1 : 0;
  }
  const double f_nonneg = valid > 0 ? static_cast<double>(nonneg) / valid : 0.0;
  const double f_bounded = certified > 0 ? static_cast<double>(bounded) / certified : 0.0;
  const double elapsed = seconds_since(t0);
  return {valid > 0 && certified > 0 && f_nonneg >= 0.95 && f_bounded >= 0.9 && elapsed < 600.0,
          fmt("delta >= 0 in %d of %d (need 95%%); rank <= 4 + delta* in %d of %d certified (need 90%%); "
              "%.1f s (limit 600 s)",
              nonneg, valid, bounded, certified, elapsed)};
}

// 9. Phase transition structure.
Outcome phase_transition() {
  ExperimentConfig c = ExperimentConfig::l1_default();
  c.trials = 100;
  c.r0_grid = {5, 40};
  c.delta_grid = default_delta_grid(c);
  const ExperimentResult r = run_phase_transition(c);
  bool monotone = true;
  double rho5 = -1.0, rho40 = -1.0;
  for (int r0 : c.r0_grid) {
    double prev = -1.0;
    for (const auto& row : r.phase) {
      if (row.r0 != r0) continue;
      monotone = monotone && row.rho >= prev;
      prev = row.rho;
      if (row.delta == 0 && r0 == 5) rho5 = row.rho;
      if (row.delta == 0 && r0 == 40) rho40 = row.rho;
    }
  }
  return {monotone && rho5 >= 0.9 && rho40 >= 0.0 && rho40 <= 0.1,
          fmt("monotone in delta: %s; rho(5,0) = %.2f (need >= 0.9); rho(40,0) = %.2f (need <= 0.1)",
              monotone ? "yes" : "no", rho5, rho40)};
}

// 10. Projection demo.
Outcome projection() {
  const auto t0 = std::chrono::steady_clock::now();
  const ProjectionDemoReport deg = projection_demo(DenseVector{2.0, 1.0}, 0.2, 1000, 1);
  const ProjectionDemoReport gen = projection_demo(DenseVector{2.0, 0.5}, 0.2, 1000, 1);
  const double elapsed = seconds_since(t0);
  return {deg.observed.size() == 2 && deg.sandwich_passes == deg.samples && gen.observed.size() == 1 &&
              gen.sandwich_passes == gen.samples && elapsed < 1.0,
          fmt("p0=(2,1): %zu strata, sandwich %d/%d; p0=(2,0.5): %zu stratum, sandwich %d/%d; %.3f s (limit 1 s)",
              deg.observed.size(), deg.sandwich_passes, deg.samples, gen.observed.size(), gen.sandwich_passes,
              gen.samples, elapsed)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 11. Two CLI runs with the same config and seed give identical CSVs.
Outcome determinism(const std::string& cli, const fs::path& work) {
  if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not available"};
  fs::remove_all(work / "determinism");
  fs::create_directories(work / "determinism");
  const fs::path cfg = work / "determinism" / "config.toml";
  std::ofstream(cfg) << "regularizer = \"l1\"\ntrials = 20\nmaster_seed = 7\n";
  std::vector<std::string> names;
  for (const char* run : {"a", "b"}) {
    const fs::path out = work / "determinism" / run;
    const std::string cmd = "\"" + cli + "\" experiment hist --config \"" + cfg.string() + "\" --out-dir \"" +
                            out.string() + "\" > \"" + (work / "determinism" / run).string() + ".log\" 2>&1";
    if (std::system(cmd.c_str()) != 0) return {false, std::string("CLI run ") + run + " failed"};
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(work / "determinism" / "a")) {
    if (entry.path().extension() != ".csv") continue;
    const fs::path other = work / "determinism" / "b" / entry.path().filename();
    if (read_file(entry.path()) != read_file(other))
      return {false, entry.path().filename().string() + " differs between runs"};
    ++compared;
  }
  return {compared >= 2, fmt("%d CSV files byte-identical across two runs", compared)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string cli;
  fs::path work = fs::temp_directory_path() / "mirrorstrat_acceptance";
  std::vector<int> known;
  app.add_option("--cli", cli, "Path to the mirrorstrat binary");
  app.add_option("--work-dir", work, "Scratch directory");
  app.add_option("--known-unattainable", known, "Criteria expected to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"prox oracle equivalence", prox_oracle},
      {"Moreau identity", moreau},
      {"SVD accuracy", svd_accuracy},
      {"FB/DR cross-agreement and monotonicity", solver_agreement},
      {"reference duality gap", duality_gap_check},
      {"certificate vs active-set oracle", certificate_oracle},
      {"enlarged identification sandwich (L1)", enlarged_identification},
      {"nuclear-norm reproduction", nuclear_reproduction},
      {"phase-transition structure", phase_transition},
      {"projection demo", projection},
      {"determinism of experiment hist", [&] { return determinism(cli, work); }},
  };

  const std::set<int> expected_fail(known.begin(), known.end());
  int unexpected = 0;
  std::vector<int> failed_known;
  std::string report;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::string line = fmt("%s  [%d] %s: ", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str());
    line += o.detail;
    line += fmt(" (%.1f s)\n", seconds_since(t0));
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    report += line;
    if (!o.pass) (expected_fail.count(id) ? failed_known.push_back(id) : void(++unexpected));
  }
  std::string list;
  for (int id : failed_known) list += (list.empty() ? "" : ",") + std::to_string(id);
  const std::string summary = fmt("summary: %d unexpected failure(s); known-unattainable criteria failing: %s\n",
                                  unexpected, list.empty() ? "none" : list.c_str());
  std::fputs(summary.c_str(), stdout);
  std::ofstream(work / "acceptance_report.txt") << report << summary;
  return unexpected == 0 ? 0 : 1;
}

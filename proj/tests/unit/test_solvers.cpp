#include <gtest/gtest.h>

#include <cmath>

#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/random.hpp"
#include "mirrorstrat/regularizers.hpp"
#include "mirrorstrat/solvers.hpp"

using namespace mirrorstrat;

namespace {

ProblemInstance random_instance(std::size_t p, std::size_t n, std::uint64_t seed, double lambda,
                                RegularizerKind kind) {
  ProblemInstance inst;
  inst.phi = gaussian_matrix(p, n, seed);
  Rng rng(seed + 1000);
  inst.y = gaussian_vector(p, rng, 3.0);
  inst.lambda = lambda;
  inst.regularizer = std::move(kind);
  return inst;
}

double rel_diff(const DenseVector& a, const DenseVector& b) {
  return norm2((a - b).span()) / std::max(1.0, norm2(b.span()));
}

SolverParams fb_params(const ProblemInstance& inst, int iters, double tol) {
  SolverParams p;
  p.gamma = 0.9 * fb_step_bound(inst);
  p.max_iters = iters;
  p.stop_tol = tol;
  return p;
}

}  // namespace

TEST(Objective, Examples) {
  ProblemInstance inst;
  inst.phi = DenseMatrix::identity(2);
  inst.y = DenseVector{1.0, 0.0};
  inst.lambda = 0.5;
  inst.regularizer = L1Norm{2};
  EXPECT_DOUBLE_EQ(objective(inst, DenseVector{0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(objective(inst, DenseVector{1.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(objective(inst, DenseVector{0.5, 0.0}), 0.75);
}

TEST(Instance, ValidateRejectsBadInput) {
  ProblemInstance inst = random_instance(3, 4, 1, 1.0, L1Norm{4});
  EXPECT_NO_THROW(inst.validate());
  inst.lambda = 0.0;
  EXPECT_THROW(inst.validate(), ContractViolation);
  inst.lambda = 1.0;
  inst.regularizer = L1Norm{5};
  EXPECT_THROW(inst.validate(), DimensionError);
}

TEST(ForwardBackward, OrthogonalDesignIsSoftThreshold) {
  ProblemInstance inst;
  inst.phi = DenseMatrix::identity(4);
  inst.y = DenseVector{2.0, -0.3, 0.0, -5.0};
  inst.lambda = 0.5;
  inst.regularizer = L1Norm{4};
  SolverParams p;
  p.gamma = inst.lambda;  // one step lands on prox_{lambda R}(y)
  p.max_iters = 10;
  p.stop_tol = 1e-14;
  const SolverTrace t = fb_solve(inst, p);
  const DenseVector expected{1.5, 0.0, 0.0, -4.5};
  EXPECT_LE(rel_diff(t.final_iterate, expected), 1e-15);
  EXPECT_TRUE(t.converged);
  EXPECT_LE(t.iterations, 2);
}

TEST(ForwardBackward, RejectsStepOutOfRange) {
  const ProblemInstance inst = random_instance(5, 8, 2, 1.0, L1Norm{8});
  SolverParams p;
  p.gamma = fb_step_bound(inst) * 1.01;
  EXPECT_THROW(fb_solve(inst, p), ContractViolation);
  p.gamma = 0.0;
  EXPECT_THROW(fb_solve(inst, p), ContractViolation);
  p.gamma = 0.5 * fb_step_bound(inst);
  p.tau = 1.5;
  EXPECT_THROW(fb_solve(inst, p), ContractViolation);
}

TEST(DouglasRachford, RejectsBadRelaxation) {
  const ProblemInstance inst = random_instance(5, 8, 2, 1.0, L1Norm{8});
  SolverParams p;
  p.tau = 2.0;
  EXPECT_THROW(dr_solve(inst, p), ContractViolation);
  p.tau = 1.0;
  p.gamma = -1.0;
  EXPECT_THROW(dr_solve(inst, p), ContractViolation);
}

TEST(ForwardBackward, ObjectiveNonincreasing) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ProblemInstance inst = random_instance(20, 40, seed, 1.0, L1Norm{40});
    const SolverTrace t = fb_solve(inst, fb_params(inst, 500, 0.0));
    for (std::size_t k = 1; k < t.records.size(); ++k)
      EXPECT_LE(t.records[k].objective, t.records[k - 1].objective + 1e-12 * std::abs(t.records[k - 1].objective));
  }
}

TEST(DouglasRachford, ResidualNonincreasing) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ProblemInstance inst = random_instance(20, 40, seed, 1.0, L1Norm{40});
    SolverParams p;
    p.gamma = 1.0;
    p.max_iters = 500;
    p.stop_tol = 0.0;
    SolveOptions o;
    o.recording = Recording::kResidual;
    const SolverTrace t = dr_solve(inst, p, o);
    for (std::size_t k = 1; k < t.records.size(); ++k)
      EXPECT_LE(t.records[k].residual, t.records[k - 1].residual * (1 + 1e-10) + 1e-15);
  }
}

TEST(Solvers, FbAndDrAgree) {
  const std::vector<RegularizerKind> kinds = {L1Norm{40}, GroupL12Norm::contiguous(40, 4)};
  for (const auto& kind : kinds) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const ProblemInstance inst = random_instance(20, 40, seed, 1.0, kind);
      const SolverTrace fb = fb_solve(inst, fb_params(inst, 200000, 1e-11), {Recording::kResidual});
      SolverParams p;
      p.gamma = 1.0;
      p.max_iters = 200000;
      p.stop_tol = 1e-11;
      const SolverTrace dr = dr_solve(inst, p, {Recording::kResidual});
      const SolverTrace dr_rev = dr_solve(inst, p, {Recording::kResidual}, DrOrder::kRegularizerFirst);
      ASSERT_TRUE(fb.converged && dr.converged && dr_rev.converged);
      EXPECT_LE(rel_diff(dr.final_iterate, fb.final_iterate), 1e-8);
      EXPECT_LE(rel_diff(dr_rev.final_iterate, fb.final_iterate), 1e-8);
    }
  }
}

TEST(Solvers, NuclearFbAndDrAgree) {
  const ProblemInstance inst = random_instance(12, 16, 9, 2.0, NuclearNorm{4});
  const SolverTrace fb = fb_solve(inst, fb_params(inst, 200000, 1e-11), {Recording::kResidual});
  SolverParams p;
  p.gamma = 2.0;
  p.max_iters = 200000;
  p.stop_tol = 1e-11;
  const SolverTrace dr = dr_solve(inst, p, {Recording::kResidual});
  ASSERT_TRUE(fb.converged && dr.converged);
  EXPECT_LE(rel_diff(dr.final_iterate, fb.final_iterate), 1e-7);
}

TEST(Reference, SmallDualityGap) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ProblemInstance inst = random_instance(20, 40, seed, 0.5, L1Norm{40});
    const DenseVector x = reference_solve(inst);
    EXPECT_LE(duality_gap(inst, x), 1e-6);
    EXPECT_GE(duality_gap(inst, x), -1e-10);
  }
}

TEST(Reference, ThrowsWhenBudgetRunsOut) {
  const ProblemInstance inst = random_instance(20, 40, 3, 0.5, L1Norm{40});
  ReferenceOptions o;
  o.max_iters = 3;
  EXPECT_THROW(reference_solve(inst, o), NumericalError);
  const SolverTrace t = reference_trace(inst, o);
  EXPECT_FALSE(t.converged);
  EXPECT_EQ(t.iterations, 3);
}

TEST(DualityGap, WeakDualityAtArbitraryPoints) {
  Rng rng(4);
  const ProblemInstance inst = random_instance(10, 15, 4, 1.0, L1Norm{15});
  for (int t = 0; t < 20; ++t) EXPECT_GE(duality_gap(inst, gaussian_vector(15, rng)), -1e-12);
}

TEST(Solvers, DualEstimateIsSubgradientAtConvergence) {
  const ProblemInstance inst = random_instance(20, 40, 6, 1.0, L1Norm{40});
  const SolverTrace t = fb_solve(inst, fb_params(inst, 100000, 1e-11), {Recording::kResidual});
  ASSERT_TRUE(t.converged);
  const DenseVector& u = t.dual_estimate;
  const DenseVector projected = project_subdifferential(inst.regularizer, t.final_iterate, u);
  EXPECT_LE(norm2((projected - u).span()), 1e-8);
  // u also matches -grad f at the limit.
  DenseVector grad = multiply_transpose(inst.phi, multiply(inst.phi, t.final_iterate) - inst.y);
  grad *= -1.0 / inst.lambda;
  EXPECT_LE(norm2((grad - u).span()), 1e-8);
}

TEST(Solvers, FiniteIdentificationOfTheLimitStratum) {
  // Late iterates live between the limit stratum and the one paired with
  // -grad f(x_hat), and eventually in the limit stratum itself.
  const ProblemInstance inst = random_instance(20, 40, 8, 1.0, L1Norm{40});
  const DenseVector x_hat = reference_solve(inst);
  const Stratum lower = primal_stratum(inst.regularizer, x_hat);
  DenseVector u = multiply_transpose(inst.phi, inst.y - multiply(inst.phi, x_hat));
  u *= 1.0 / inst.lambda;
  const Stratum upper = mirror_map_conj(inst.regularizer, dual_stratum(inst.regularizer, u));
  std::vector<std::string> strata;
  SolveOptions o;
  o.hook = [&](const IterationRecord& r, const DenseVector&) { strata.push_back(r.stratum); };
  const SolverTrace t = fb_solve(inst, fb_params(inst, 3000, 0.0), o);
  ASSERT_EQ(strata.size(), 3000u);
  for (std::size_t k = strata.size() - 100; k < strata.size(); ++k) {
    const Stratum s = parse_stratum(inst.regularizer, strata[k]);
    EXPECT_TRUE(sandwich_holds(lower, s, upper));
  }
  EXPECT_EQ(strata.back(), to_string(lower));
}

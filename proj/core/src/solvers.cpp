#include "mirrorstrat/solvers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/regularizers.hpp"

namespace mirrorstrat {

namespace {

struct PointSummary {
  double regularizer_value;
  std::size_t r0;
  std::string stratum;
};

// R(x), R_0(x) and the stratum text; nuclear norm reuses one spectrum.
PointSummary summarize(const RegularizerKind& kind, const DenseVector& x, const Tolerances& tol) {
  if (const auto* nuc = std::get_if<NuclearNorm>(&kind)) {
    const DenseVector sigma = singular_values(DenseMatrix::from_flat(x, nuc->side));
    double value = 0.0;
    std::size_t rank = 0;
    for (double s : sigma) {
      value += s;
      if (s > tol.primal_zero_tol) ++rank;
    }
    return {value, rank, std::to_string(rank)};
  }
  return {evaluate(kind, x), complexity_index(kind, x, tol),
          to_string(primal_stratum(kind, x, tol))};
}

double data_term(const ProblemInstance& problem, const DenseVector& x) {
  DenseVector r = multiply(problem.phi, x);
  r -= problem.y;
  const double nr = norm2(r.span());
  return nr * nr / (2.0 * problem.lambda);
}

IterationRecord make_record(const ProblemInstance& problem, const DenseVector& x, int k,
                            double residual, const SolveOptions& options) {
  IterationRecord rec;
  rec.k = k;
  rec.residual = residual;
  if (options.recording == Recording::kFull) {
    const PointSummary s = summarize(problem.regularizer, x, options.tolerances);
    rec.objective = s.regularizer_value + data_term(problem, x);
    rec.r0 = s.r0;
    rec.stratum = s.stratum;
  }
  return rec;
}

void emit(SolverTrace& trace, IterationRecord rec, const DenseVector& x,
          const SolveOptions& options) {
  if (options.hook) options.hook(rec, x);
  if (options.recording == Recording::kFull) trace.records.push_back(std::move(rec));
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void ProblemInstance::validate() const {
  if (phi.rows() == 0 || phi.cols() == 0) throw DimensionError("ProblemInstance: empty phi");
  if (y.size() != phi.rows()) throw DimensionError("ProblemInstance: y length differs from rows of phi");
  if (dimension(regularizer) != phi.cols()) {
    throw DimensionError("ProblemInstance: regularizer dimension differs from columns of phi");
  }
  if (!(lambda > 0.0)) throw ContractViolation("ProblemInstance: lambda must be positive");
  if (!phi.all_finite() || !y.all_finite()) throw ContractViolation("ProblemInstance: non-finite data");
  if (truth) {
    const DenseVector y0 = multiply(phi, truth->x0);
    if (truth->y0.size() != y.size() || truth->w.size() != y.size()) {
      throw DimensionError("ProblemInstance: ground truth sizes");
    }
    const double scale = std::max(1.0, norm2(y.span()));
    if (distance(y0.span(), truth->y0.span()) > 1e-12 * scale ||
        distance((truth->y0 + truth->w).span(), y.span()) > 1e-12 * scale) {
      throw ContractViolation("ProblemInstance: ground truth violates y = phi x0 + w");
    }
  }
}

double objective(const ProblemInstance& problem, const DenseVector& x) {
  const double r = evaluate(problem.regularizer, x);
  if (std::isinf(r)) return r;
  return r + data_term(problem, x);
}

double dual_objective(const ProblemInstance& problem, const DenseVector& q) {
  const DenseVector u = multiply_transpose(problem.phi, q);
  const double conj = evaluate_conjugate(problem.regularizer, u);
  const double nq = norm2(q.span());
  return dot(q.span(), problem.y.span()) - 0.5 * problem.lambda * nq * nq - conj;
}

double duality_gap(const ProblemInstance& problem, const DenseVector& x) {
  DenseVector q = problem.y - multiply(problem.phi, x);
  q *= 1.0 / problem.lambda;
  if (std::holds_alternative<LInfBall>(problem.regularizer)) {
    return objective(problem, x) - dual_objective(problem, q);
  }
  // For norms R* is the indicator of the dual ball; after rescaling q is
  // feasible by construction, so R*(phi^T q) = 0 without a rounding-sensitive test.
  const double dn = dual_norm(problem.regularizer, multiply_transpose(problem.phi, q));
  if (dn > 1.0) q *= 1.0 / dn;
  const double nq = norm2(q.span());
  const double dual = dot(q.span(), problem.y.span()) - 0.5 * problem.lambda * nq * nq;
  return objective(problem, x) - dual;
}

double fb_step_bound(const ProblemInstance& problem) {
  const double l = spectral_norm_sq(problem.phi, 1e-12);
  if (l == 0.0) return std::numeric_limits<double>::infinity();
  return 2.0 * problem.lambda / l;
}

SolverTrace fb_solve(const ProblemInstance& problem, const SolverParams& params,
                     const SolveOptions& options) {
  problem.validate();
  if (params.max_iters < 1) throw ContractViolation("fb_solve: max_iters must be >= 1");
  if (!(params.tau > 0.0 && params.tau <= 1.0)) throw ContractViolation("fb_solve: tau must lie in (0, 1]");
  const double bound = fb_step_bound(problem);
  if (!(params.gamma > 0.0 && params.gamma < bound)) {
    throw ContractViolation("fb_solve: gamma " + std::to_string(params.gamma) +
                            " outside (0, 2 lambda / sigma_max) = (0, " + std::to_string(bound) + ")");
  }

  const std::size_t n = problem.unknowns();
  const double step = params.gamma / problem.lambda;
  DenseVector x(n);
  DenseVector residual_vec(problem.measurements());
  DenseVector grad(n);
  DenseVector forward(n);

  SolverTrace trace;
  for (int k = 1; k <= params.max_iters; ++k) {
    multiply_into(problem.phi, x.span(), residual_vec.span());
    residual_vec -= problem.y;
    multiply_transpose_into(problem.phi, residual_vec.span(), grad.span());
    for (std::size_t i = 0; i < n; ++i) forward[i] = x[i] - step * grad[i];
    const DenseVector p = prox(problem.regularizer, params.gamma, forward);
    const double res = distance(p.span(), x.span());

    if (params.tau == 1.0) {
      x = p;
    } else {
      for (std::size_t i = 0; i < n; ++i) x[i] += params.tau * (p[i] - x[i]);
    }
    trace.iterations = k;
    trace.final_residual = res;
    trace.dual_estimate = forward - p;
    trace.dual_estimate *= 1.0 / params.gamma;
    emit(trace, make_record(problem, x, k, res, options), x, options);
    if (res <= params.stop_tol) {
      trace.converged = true;
      break;
    }
  }
  trace.final_iterate = std::move(x);
  return trace;
}

SolverTrace dr_solve(const ProblemInstance& problem, const SolverParams& params,
                     const SolveOptions& options, DrOrder order) {
  problem.validate();
  if (params.max_iters < 1) throw ContractViolation("dr_solve: max_iters must be >= 1");
  if (!(params.gamma > 0.0)) throw ContractViolation("dr_solve: gamma must be positive");
  if (!(params.tau > 0.0 && params.tau < 2.0)) throw ContractViolation("dr_solve: tau must lie in (0, 2)");

  const std::size_t n = problem.unknowns();
  const double ratio = params.gamma / problem.lambda;
  DenseMatrix system = gram(problem.phi);
  for (double& v : std::span<double>(system.data(), n * n)) v *= ratio;
  for (std::size_t i = 0; i < n; ++i) system(i, i) += 1.0;
  const Cholesky factor(system);
  DenseVector data_shift = multiply_transpose(problem.phi, problem.y);
  data_shift *= ratio;

  auto prox_data = [&](DenseVector a) {
    a += data_shift;
    factor.solve_in_place(a.span());
    return a;
  };
  auto prox_reg = [&](const DenseVector& a) { return prox(problem.regularizer, params.gamma, a); };

  DenseVector z(n);
  DenseVector x = order == DrOrder::kDataFirst ? prox_reg(z) : prox_data(z);
  DenseVector tracked(n);  // output of the R-prox
  SolverTrace trace;
  for (int k = 1; k <= params.max_iters; ++k) {
    DenseVector reflected = 2.0 * x;
    reflected -= z;
    DenseVector v = order == DrOrder::kDataFirst ? prox_data(reflected) : prox_reg(reflected);
    DenseVector z_next = z;
    for (std::size_t i = 0; i < n; ++i) z_next[i] += params.tau * (v[i] - x[i]);
    const double res = distance(z_next.span(), z.span()) / params.tau;

    if (order == DrOrder::kDataFirst) {
      x = prox_reg(z_next);
      tracked = x;
      trace.dual_estimate = z_next - x;
    } else {
      tracked = v;
      trace.dual_estimate = reflected - v;
      x = prox_data(z_next);
    }
    trace.dual_estimate *= 1.0 / params.gamma;
    z = std::move(z_next);
    trace.iterations = k;
    trace.final_residual = res;
    emit(trace, make_record(problem, tracked, k, res, options), tracked, options);
    if (res <= params.stop_tol) {
      trace.converged = true;
      break;
    }
  }
  trace.final_iterate = std::move(tracked);
  return trace;
}

SolverTrace reference_trace(const ProblemInstance& problem, const ReferenceOptions& options) {
  if (!(options.tol > 0.0)) throw ContractViolation("reference_solve: tol must be positive");
  const double bound = fb_step_bound(problem);
  SolverParams params;
  params.gamma = options.step_factor * bound / 2.0;
  params.tau = 1.0;
  params.max_iters = options.max_iters;
  params.stop_tol = options.tol;
  SolveOptions solve_options;
  solve_options.recording = Recording::kResidual;
  return fb_solve(problem, params, solve_options);
}

DenseVector reference_solve(const ProblemInstance& problem, const ReferenceOptions& options) {
  SolverTrace trace = reference_trace(problem, options);
  if (!trace.converged) {
    throw NumericalError("reference_solve: residual " + std::to_string(trace.final_residual) +
                             " after " + std::to_string(trace.iterations) + " iterations",
                         trace.final_residual);
  }
  return std::move(trace.final_iterate);
}

}  // namespace mirrorstrat

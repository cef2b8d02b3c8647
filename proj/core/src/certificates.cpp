#include "mirrorstrat/certificates.hpp"

#include <cmath>
#include <string>

#include <json.hpp>

#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/regularizers.hpp"

namespace mirrorstrat {

namespace {

constexpr int kCheckEvery = 10;

struct Residuals {
  double feasibility;
  double optimality;
};

// Feasibility dist(phi^T q, C) and complementarity |P_C(phi^T q + v) - phi^T q|
// for q = -phi v (so stationarity q + phi v = 0 holds exactly).
Residuals residuals(const DenseMatrix& phi, const SubdifferentialProjector& project,
                    const DenseVector& v, DenseVector& q, DenseVector& u) {
  multiply_into(phi, v.span(), q.span());
  q *= -1.0;
  multiply_transpose_into(phi, q.span(), u.span());
  const double feasibility = project.distance(u);
  const DenseVector shifted = project(u + v);
  return {feasibility, norm2((shifted - u).span())};
}

// Columns of phi selected by `columns`, as a P x |columns| matrix.
DenseMatrix select_columns(const DenseMatrix& phi, const std::vector<std::size_t>& columns) {
  DenseMatrix out(phi.rows(), columns.size());
  for (std::size_t i = 0; i < phi.rows(); ++i)
    for (std::size_t j = 0; j < columns.size(); ++j) out(i, j) = phi(i, columns[j]);
  return out;
}

double min_singular_value(const DenseMatrix& m) {
  if (m.cols() == 0) return std::numeric_limits<double>::infinity();
  if (m.cols() > m.rows()) return 0.0;
  const DenseVector s = singular_values(m, SvdOptions{60, 1e-12});
  return s[s.size() - 1];
}

// phi restricted to the tangent space {U_i A^T + B V_i^T} of rank-i
// matrices, in the orthonormal basis u_a v_b^T with a < i or b < i.
DenseMatrix nuclear_tangent_operator(const DenseMatrix& phi, const DenseVector& u_bar,
                                     std::size_t side, std::size_t saturated) {
  const SvdFactorization f = svd(DenseMatrix::from_flat(u_bar, side));
  const std::size_t n = side;
  const std::size_t p = phi.rows();
  const std::size_t model_dim = saturated * (2 * n - saturated);
  DenseMatrix out(p, model_dim);
  // partial[a] = sum_r U(r, a) phi(:, r n + c), a P x n matrix per left vector.
  std::vector<DenseMatrix> partial(n, DenseMatrix(p, n));
  for (std::size_t a = 0; a < n; ++a) {
    DenseMatrix& m = partial[a];
    for (std::size_t row = 0; row < p; ++row) {
      auto prow = phi.row(row);
      auto mrow = m.row(row);
      for (std::size_t r = 0; r < n; ++r) {
        const double w = f.left_factors(r, a);
        for (std::size_t c = 0; c < n; ++c) mrow[c] += w * prow[r * n + c];
      }
    }
  }
  std::size_t col = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a >= saturated && b >= saturated) continue;
      for (std::size_t row = 0; row < p; ++row) {
        double acc = 0.0;
        auto mrow = partial[a].row(row);
        for (std::size_t c = 0; c < n; ++c) acc += mrow[c] * f.right_factors(c, b);
        out(row, col) = acc;
      }
      ++col;
    }
  }
  return out;
}

}  // namespace

Certificate min_norm_certificate(const DenseMatrix& phi, const DenseVector& x0,
                                 const RegularizerKind& kind, const CertificateOptions& options) {
  options.tolerances.validate();
  if (x0.size() != phi.cols() || dimension(kind) != phi.cols()) {
    throw DimensionError("min_norm_certificate: x0, phi and regularizer dimensions differ");
  }
  if (options.max_iters < 1 || !(options.tol > 0.0)) {
    throw ContractViolation("min_norm_certificate: need max_iters >= 1 and tol > 0");
  }
  const SubdifferentialProjector project(kind, x0, options.tolerances);
  const std::size_t n = phi.cols();
  const std::size_t p = phi.rows();

  const double lipschitz = spectral_norm_sq(phi, 1e-10);
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  // Dual problem: min_v 1/2 |phi v|^2 + sigma_C(v), C = dR(x0).
  DenseVector v(n), v_prev(n), extrapolated(n);
  DenseVector phi_y(p), grad(n), a(n);
  DenseVector q(p), u(n);
  double momentum = 1.0;
  Residuals res{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  int iterations = 0;
  bool converged = false;

  for (int it = 1; it <= options.max_iters; ++it) {
    iterations = it;
    multiply_into(phi, extrapolated.span(), phi_y.span());
    multiply_transpose_into(phi, phi_y.span(), grad.span());
    for (std::size_t i = 0; i < n; ++i) a[i] = extrapolated[i] - step * grad[i];
    // prox_{step sigma_C}(a) = a - step P_C(a / step)
    const DenseVector projected = project((1.0 / step) * a);
    v_prev = v;
    for (std::size_t i = 0; i < n; ++i) v[i] = a[i] - step * projected[i];

    // Gradient-based restart (O'Donoghue & Candes).
    double restart_test = 0.0;
    for (std::size_t i = 0; i < n; ++i) restart_test += (extrapolated[i] - v[i]) * (v[i] - v_prev[i]);
    if (restart_test > 0.0) momentum = 1.0;
    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_momentum;
    for (std::size_t i = 0; i < n; ++i) extrapolated[i] = v[i] + beta * (v[i] - v_prev[i]);
    momentum = next_momentum;

    if (it % kCheckEvery == 0 || it == options.max_iters) {
      res = residuals(phi, project, v, q, u);
      if (res.feasibility <= options.tol && res.optimality <= options.tol) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    const double worst = std::max(res.feasibility, res.optimality);
    throw CertificateError("min_norm_certificate: residual " + std::to_string(worst) + " after " +
                               std::to_string(iterations) + " iterations",
                           worst);
  }

  Certificate cert;
  cert.q_bar = q;
  cert.u_bar = u;
  cert.primal_stratum = primal_stratum(kind, x0, options.tolerances);
  cert.dual_stratum_of_u = dual_stratum(kind, u, options.tolerances);
  cert.upper_stratum = mirror_map_conj(kind, cert.dual_stratum_of_u);
  cert.delta_star = delta_star(cert.primal_stratum, cert.dual_stratum_of_u, kind);
  cert.feasibility_residual = res.feasibility;
  cert.optimality_residual = res.optimality;
  cert.solver_iterations = iterations;
  cert.saturation_tol = options.tolerances.dual_saturation_tol;
  return cert;
}

double restricted_injectivity(const DenseMatrix& phi, const Certificate& cert,
                              const RegularizerKind& kind) {
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        std::vector<std::size_t> columns;
        if constexpr (std::is_same_v<K, L1Norm>) {
          const auto& signs = std::get<SaturationPattern>(cert.dual_stratum_of_u).signs;
          for (std::size_t i = 0; i < signs.size(); ++i)
            if (signs[i] != 0) columns.push_back(i);
        } else if constexpr (std::is_same_v<K, GroupL12Norm>) {
          const auto& bits = std::get<BlockSaturation>(cert.dual_stratum_of_u).saturated;
          for (std::size_t b = 0; b < bits.size(); ++b)
            if (bits[b]) columns.insert(columns.end(), k.blocks()[b].begin(), k.blocks()[b].end());
        } else if constexpr (std::is_same_v<K, NuclearNorm>) {
          const std::size_t i = std::get<SaturationCount>(cert.dual_stratum_of_u).count;
          if (i == 0) return std::numeric_limits<double>::infinity();
          if (i * (2 * k.side - i) > phi.rows()) return 0.0;
          return min_singular_value(nuclear_tangent_operator(phi, cert.u_bar, k.side, i));
        } else {
          // Box face: free coordinates of the upper face.
          const auto& sat = std::get<FacePattern>(cert.upper_stratum).saturation;
          for (std::size_t i = 0; i < sat.size(); ++i)
            if (sat[i] == 0) columns.push_back(i);
        }
        if (columns.size() > phi.rows()) return 0.0;
        return min_singular_value(select_columns(phi, columns));
      },
      kind);
}

bool uniqueness_check(const DenseMatrix& phi, const DenseVector& x0, const Certificate& cert,
                      const RegularizerKind& kind, double feasibility_tol,
                      double injectivity_threshold) {
  if (x0.size() != phi.cols()) throw DimensionError("uniqueness_check: x0 length");
  if (!(cert.feasibility_residual <= feasibility_tol)) return false;
  return restricted_injectivity(phi, cert, kind) > injectivity_threshold;
}

std::string certificate_json(const Certificate& cert, std::optional<bool> unique, bool include_q) {
  nlohmann::ordered_json j;
  j["primal_stratum"] = to_string(cert.primal_stratum);
  j["dual_stratum"] = to_string(cert.dual_stratum_of_u);
  j["upper_stratum"] = to_string(cert.upper_stratum);
  j["dim_primal"] = dim(cert.primal_stratum);
  j["dim_upper"] = dim(cert.upper_stratum);
  j["delta_star"] = cert.delta_star;
  j["q_norm"] = norm2(cert.q_bar.span());
  j["feasibility_residual"] = cert.feasibility_residual;
  j["optimality_residual"] = cert.optimality_residual;
  j["solver_iterations"] = cert.solver_iterations;
  j["saturation_tol"] = cert.saturation_tol;
  if (unique) {
    j["uniqueness"] = *unique ? "certified-unique" : "not-certified";
  } else {
    j["uniqueness"] = nullptr;
  }
  if (include_q) j["q_bar"] = cert.q_bar.values();
  return j.dump(2);
}

}  // namespace mirrorstrat

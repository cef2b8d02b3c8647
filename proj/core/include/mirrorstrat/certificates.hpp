#pragma once

#include <optional>
#include <string>

#include "mirrorstrat/linalg.hpp"
#include "mirrorstrat/regularizer_kind.hpp"
#include "mirrorstrat/strata.hpp"

namespace mirrorstrat {

struct CertificateOptions {
  int max_iters = 50000;
  double tol = 1e-7;
  Tolerances tolerances{};
};

/// Minimum-norm dual certificate q_bar = argmin { |q| : phi^T q in dR(x0) }
/// together with the strata it determines.
struct Certificate {
  DenseVector q_bar;
  DenseVector u_bar;  // phi^T q_bar
  Stratum primal_stratum;       // M_{x0}
  DualStratum dual_stratum_of_u;  // M*_{u_bar}
  Stratum upper_stratum;        // J_{R*}(M*_{u_bar})
  int delta_star = 0;
  double feasibility_residual = 0.0;  // dist(u_bar, dR(x0))
  double optimality_residual = 0.0;   // complementarity of the dual multiplier
  int solver_iterations = 0;
  double saturation_tol = 0.0;
};

/// Solves min 1/2 |q|^2 s.t. phi^T q in dR(x0) by accelerated proximal
/// gradient on the dual multiplier v (q = -phi v) with adaptive restart.
/// Throws CertificateError carrying the residual when either residual is
/// above options.tol after options.max_iters iterations.
Certificate min_norm_certificate(const DenseMatrix& phi, const DenseVector& x0,
                                 const RegularizerKind& kind, const CertificateOptions& options = {});

/// Sufficient test for x0 being the unique solution of min R(x) s.t.
/// phi x = phi x0: the certificate is feasible and phi is injective on the
/// extended model of the upper stratum (smallest singular value of the
/// restricted operator above `injectivity_threshold`). False means "not
/// certified", not "not unique".
bool uniqueness_check(const DenseMatrix& phi, const DenseVector& x0, const Certificate& cert,
                      const RegularizerKind& kind, double feasibility_tol = 1e-6,
                      double injectivity_threshold = 1e-8);

/// Smallest singular value of phi restricted to the extended model
/// (tangent space of the upper stratum); 0 when the model dimension
/// exceeds the number of measurements.
double restricted_injectivity(const DenseMatrix& phi, const Certificate& cert,
                              const RegularizerKind& kind);

/// JSON record: strata, delta*, residuals, iteration count, optional
/// uniqueness verdict; q_bar only when requested.
std::string certificate_json(const Certificate& cert, std::optional<bool> unique,
                             bool include_q = false);

}  // namespace mirrorstrat

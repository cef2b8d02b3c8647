#pragma once

#include <stdexcept>
#include <string>

namespace mirrorstrat {

/// Inputs of incompatible sizes (vector length vs. regularizer dimension,
/// non-square matrix where a square one is required, ...).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition was violated by the caller.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical routine failed to reach its target accuracy.
/// Carries the residual that was achieved.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The minimum-norm certificate solve did not reach its tolerance: either
/// x0 does not solve the noiseless problem or the iteration budget is short.
class CertificateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Cholesky hit a nonpositive pivot.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dual vector lies outside dom(dR*) by more than the saturation tolerance.
class InfeasibleDualError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Stratum descriptors of different variants or sizes were compared.
class StratumMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The primal stratum is not below the certificate's upper stratum.
class InconsistentCertificateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed experiment configuration or command line.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mirrorstrat

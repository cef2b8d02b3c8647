#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mirrorstrat {

/// Dense real vector. Thin value wrapper over std::vector<double>.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double value = 0.0) : values_(n, value) {}
  explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {}
  DenseVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double>& values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  DenseVector& operator+=(const DenseVector& other);
  DenseVector& operator-=(const DenseVector& other);
  DenseVector& operator*=(double s) noexcept;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

DenseVector operator+(DenseVector a, const DenseVector& b);
DenseVector operator-(DenseVector a, const DenseVector& b);
DenseVector operator*(double s, DenseVector a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Dense real matrix, row-major storage.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> diag);
  /// Reinterprets a flattened row-major vector of length n*n as n x n.
  static DenseMatrix from_flat(const DenseVector& flat, std::size_t side);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Row-major flattening, inverse of from_flat.
  DenseVector flatten() const { return DenseVector(values_); }
  DenseMatrix transpose() const;
  bool all_finite() const noexcept;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// A * x
DenseVector multiply(const DenseMatrix& a, const DenseVector& x);
/// A^T * y
DenseVector multiply_transpose(const DenseMatrix& a, const DenseVector& y);
/// out = A * x without allocating; out must have a.rows() entries.
void multiply_into(const DenseMatrix& a, std::span<const double> x, std::span<double> out);
/// out = A^T * y without allocating; out must have a.cols() entries.
void multiply_transpose_into(const DenseMatrix& a, std::span<const double> y, std::span<double> out);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// A^T A
DenseMatrix gram(const DenseMatrix& a);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& a);

/// M = U diag(sigma) V^T.
///
/// For a square n x n input, U and V are n x n orthogonal. For a tall m x n
/// input (m > n) U is m x n with orthonormal columns (thin factorization).
/// Singular values are sorted nonincreasing.
struct SvdFactorization {
  DenseMatrix left_factors;
  DenseVector singular_values;
  DenseMatrix right_factors;

  DenseMatrix reconstruct() const;
};

struct SvdOptions {
  int max_sweeps = 30;
  double off_diagonal_tol = 1e-12;
};

/// One-sided (Hestenes) Jacobi SVD. Accepts square or tall matrices; wide
/// matrices are handled through their transpose.
/// Throws NumericalError if the sweep budget is exhausted.
SvdFactorization svd(const DenseMatrix& m, const SvdOptions& options = {});

/// Singular values only (same algorithm, skips accumulating V).
DenseVector singular_values(const DenseMatrix& m, const SvdOptions& options = {});

/// Largest eigenvalue of M^T M by power iteration started from the
/// normalized all-ones vector. Returns 0 for the zero matrix.
double spectral_norm_sq(const DenseMatrix& m, double tol = 1e-12, int max_iters = 10000);

/// Cholesky factorization A = L L^T of a symmetric positive definite matrix,
/// reusable across right-hand sides.
class Cholesky {
 public:
  /// Throws FactorizationError on a nonpositive pivot.
  explicit Cholesky(const DenseMatrix& a);

  DenseVector solve(const DenseVector& b) const;
  void solve_in_place(std::span<double> b) const;
  std::size_t size() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<double> lower_;  // row-major n x n, upper part unused
};

DenseVector solve_spd(const DenseMatrix& a, const DenseVector& b);

}  // namespace mirrorstrat

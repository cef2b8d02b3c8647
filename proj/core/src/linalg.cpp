#include "mirrorstrat/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mirrorstrat/errors.hpp"

namespace mirrorstrat {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw DimensionError(std::string(where) + ": size mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

bool DenseVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseVector& DenseVector::operator+=(const DenseVector& other) {
  require_same_size(size(), other.size(), "DenseVector::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& other) {
  require_same_size(size(), other.size(), "DenseVector::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

DenseVector& DenseVector::operator*=(double s) noexcept {
  for (double& v : values_) v *= s;
  return *this;
}

DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
DenseVector operator*(double s, DenseVector a) { return a *= s; }

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) {
  // Scaled accumulation avoids overflow for large entries.
  double scale = 0.0;
  double ssq = 1.0;
  for (double v : a) {
    if (v == 0.0) continue;
    const double av = std::abs(v);
    if (scale < av) {
      ssq = 1.0 + ssq * (scale / av) * (scale / av);
      scale = av;
    } else {
      ssq += (av / scale) * (av / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), values_(rows * cols, value) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), values_(std::move(row_major)) {
  if (values_.size() != rows_ * cols_) {
    throw DimensionError("DenseMatrix: entry count " + std::to_string(values_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("DenseMatrix: ragged initializer list");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
  DenseMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

DenseMatrix DenseMatrix::from_flat(const DenseVector& flat, std::size_t side) {
  if (flat.size() != side * side) {
    throw DimensionError("from_flat: vector of length " + std::to_string(flat.size()) +
                         " is not " + std::to_string(side) + "^2");
  }
  return DenseMatrix(side, side, flat.values());
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void multiply_into(const DenseMatrix& a, std::span<const double> x, std::span<double> out) {
  require_same_size(a.cols(), x.size(), "multiply");
  require_same_size(a.rows(), out.size(), "multiply (output)");
  const std::size_t n = a.cols();
  const double* p = a.data();
  for (std::size_t i = 0; i < a.rows(); ++i, p += n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += p[j] * x[j];
    out[i] = acc;
  }
}

void multiply_transpose_into(const DenseMatrix& a, std::span<const double> y,
                             std::span<double> out) {
  require_same_size(a.rows(), y.size(), "multiply_transpose");
  require_same_size(a.cols(), out.size(), "multiply_transpose (output)");
  std::fill(out.begin(), out.end(), 0.0);
  const std::size_t n = a.cols();
  const double* p = a.data();
  for (std::size_t i = 0; i < a.rows(); ++i, p += n) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) out[j] += yi * p[j];
  }
}

DenseVector multiply(const DenseMatrix& a, const DenseVector& x) {
  DenseVector out(a.rows());
  multiply_into(a, x.span(), out.span());
  return out;
}

DenseVector multiply_transpose(const DenseMatrix& a, const DenseVector& y) {
  DenseVector out(a.cols());
  multiply_transpose_into(a, y.span(), out.span());
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.cols(), b.rows(), "matmul");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix gram(const DenseMatrix& a) {
  const std::size_t n = a.cols();
  DenseMatrix g(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto row = a.row(r);
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = row[i];
      if (ri == 0.0) continue;
      double* gi = &g(i, 0);
      for (std::size_t j = i; j < n; ++j) gi[j] += ri * row[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.rows(), b.rows(), "matrix subtraction");
  require_same_size(a.cols(), b.cols(), "matrix subtraction");
  std::vector<double> v(a.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b.values()[i];
  return DenseMatrix(a.rows(), a.cols(), std::move(v));
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.rows(), b.rows(), "matrix addition");
  require_same_size(a.cols(), b.cols(), "matrix addition");
  std::vector<double> v(a.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += b.values()[i];
  return DenseMatrix(a.rows(), a.cols(), std::move(v));
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.values()); }

double spectral_norm_sq(const DenseMatrix& m, double tol, int max_iters) {
  if (m.rows() == 0 || m.cols() == 0) throw ContractViolation("spectral_norm_sq: empty matrix");
  if (norm_inf(m.values()) == 0.0) return 0.0;

  const std::size_t n = m.cols();
  DenseVector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  DenseVector mv(m.rows());
  DenseVector w(n);
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    multiply_into(m, v.span(), mv.span());
    multiply_transpose_into(m, mv.span(), w.span());
    // Rayleigh quotient v^T M^T M v with |v| = 1.
    const double next = dot(mv.span(), mv.span());
    const double wn = norm2(w.span());
    if (wn == 0.0) return next;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
    if (it > 0 && std::abs(next - estimate) <= tol * std::abs(next)) {
      return std::max(next, estimate);
    }
    estimate = next;
  }
  return estimate;
}

Cholesky::Cholesky(const DenseMatrix& a) : n_(a.rows()), lower_(a.rows() * a.rows(), 0.0) {
  if (!a.is_square()) throw DimensionError("Cholesky: matrix is not square");
  for (std::size_t j = 0; j < n_; ++j) {
    double d = a(j, j);
    const double* lj = &lower_[j * n_];
    for (std::size_t k = 0; k < j; ++k) d -= lj[k] * lj[k];
    if (!(d > 0.0)) {
      throw FactorizationError("Cholesky: nonpositive pivot " + std::to_string(d) +
                               " at column " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    lower_[j * n_ + j] = ljj;
    for (std::size_t i = j + 1; i < n_; ++i) {
      double s = a(i, j);
      const double* li = &lower_[i * n_];
      for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
      lower_[i * n_ + j] = s / ljj;
    }
  }
}

void Cholesky::solve_in_place(std::span<double> b) const {
  require_same_size(b.size(), n_, "Cholesky::solve");
  // L z = b
  for (std::size_t i = 0; i < n_; ++i) {
    double s = b[i];
    const double* li = &lower_[i * n_];
    for (std::size_t k = 0; k < i; ++k) s -= li[k] * b[k];
    b[i] = s / li[i];
  }
  // L^T x = z
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n_; ++k) s -= lower_[k * n_ + ii] * b[k];
    b[ii] = s / lower_[ii * n_ + ii];
  }
}

DenseVector Cholesky::solve(const DenseVector& b) const {
  DenseVector x = b;
  solve_in_place(x.span());
  return x;
}

DenseVector solve_spd(const DenseMatrix& a, const DenseVector& b) {
  return Cholesky(a).solve(b);
}

}  // namespace mirrorstrat

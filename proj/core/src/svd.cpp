#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mirrorstrat/errors.hpp"
#include "mirrorstrat/linalg.hpp"

namespace mirrorstrat {

namespace {

// Column-major working storage: column j occupies [j*rows, (j+1)*rows).
struct Columns {
  std::size_t rows;
  std::size_t cols;
  std::vector<double> data;

  double* col(std::size_t j) { return data.data() + j * rows; }
  const double* col(std::size_t j) const { return data.data() + j * rows; }
};

Columns to_columns(const DenseMatrix& m) {
  Columns c{m.rows(), m.cols(), std::vector<double>(m.rows() * m.cols())};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) c.data[j * m.rows() + i] = m(i, j);
  return c;
}

inline void rotate(double* x, double* y, std::size_t n, double c, double s) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

// Hestenes one-sided Jacobi on a tall (rows >= cols) column set. Rotations
// are optionally accumulated in `v` (cols x cols, column-major).
void jacobi_orthogonalize(Columns& a, Columns* v, const SvdOptions& options) {
  const std::size_t n = a.cols;
  const std::size_t m = a.rows;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    bool rotated = false;
    double worst = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* ap = a.col(p);
        double* aq = a.col(q);
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += ap[i] * ap[i];
          beta += aq[i] * aq[i];
          gamma += ap[i] * aq[i];
        }
        if (gamma == 0.0 || alpha == 0.0 || beta == 0.0) continue;
        const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
        if (rel <= options.off_diagonal_tol) continue;
        worst = std::max(worst, rel);
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        rotate(ap, aq, m, c, s);
        if (v != nullptr) rotate(v->col(p), v->col(q), v->rows, c, s);
      }
    }
    if (!rotated) return;
    if (sweep + 1 == options.max_sweeps) {
      throw NumericalError("svd: Jacobi sweeps did not converge (max relative off-diagonal " +
                               std::to_string(worst) + ")",
                           worst);
    }
  }
}

// Replaces the columns flagged in `missing` by unit vectors orthogonal to all
// other columns (Gram-Schmidt against canonical basis candidates).
void complete_orthonormal(Columns& u, const std::vector<bool>& missing) {
  const std::size_t m = u.rows;
  std::size_t candidate = 0;
  std::vector<double> w(m);
  for (std::size_t j = 0; j < u.cols; ++j) {
    if (!missing[j]) continue;
    bool placed = false;
    while (!placed && candidate < m) {
      std::fill(w.begin(), w.end(), 0.0);
      w[candidate++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < u.cols; ++k) {
          if (k == j || (missing[k] && k > j)) continue;
          const double* uk = u.col(k);
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += uk[i] * w[i];
          for (std::size_t i = 0; i < m; ++i) w[i] -= proj * uk[i];
        }
      }
      const double nw = norm2(w);
      if (nw > 1e-3) {
        double* uj = u.col(j);
        for (std::size_t i = 0; i < m; ++i) uj[i] = w[i] / nw;
        placed = true;
      }
    }
  }
}

SvdFactorization svd_tall(const DenseMatrix& m, const SvdOptions& options) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  Columns a = to_columns(m);
  Columns v{n, n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) v.data[i * n + i] = 1.0;

  jacobi_orthogonalize(a, &v, options);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(std::span<const double>(a.col(j), rows));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double sigma_max = n == 0 ? 0.0 : sigma[order[0]];
  const double zero_cut =
      std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, n)) * sigma_max;

  Columns u{rows, n, std::vector<double>(rows * n, 0.0)};
  std::vector<bool> missing(n, false);
  SvdFactorization out{DenseMatrix(rows, n), DenseVector(n), DenseMatrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular_values[k] = sigma[j];
    const double* aj = a.col(j);
    double* uk = u.col(k);
    if (sigma[j] > zero_cut && sigma[j] > 0.0) {
      for (std::size_t i = 0; i < rows; ++i) uk[i] = aj[i] / sigma[j];
    } else {
      missing[k] = true;
    }
    const double* vj = v.col(j);
    for (std::size_t i = 0; i < n; ++i) out.right_factors(i, k) = vj[i];
  }
  if (std::any_of(missing.begin(), missing.end(), [](bool b) { return b; })) {
    complete_orthonormal(u, missing);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < rows; ++i) out.left_factors(i, k) = u.data[k * rows + i];
  return out;
}

}  // namespace

DenseMatrix SvdFactorization::reconstruct() const {
  const std::size_t k = singular_values.size();
  DenseMatrix scaled = left_factors;
  for (std::size_t i = 0; i < scaled.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) scaled(i, j) *= singular_values[j];
  return matmul(scaled, right_factors.transpose());
}

SvdFactorization svd(const DenseMatrix& m, const SvdOptions& options) {
  if (m.rows() == 0 || m.cols() == 0) throw ContractViolation("svd: empty matrix");
  if (m.rows() >= m.cols()) return svd_tall(m, options);
  SvdFactorization t = svd_tall(m.transpose(), options);
  return SvdFactorization{std::move(t.right_factors), std::move(t.singular_values),
                          std::move(t.left_factors)};
}

DenseVector singular_values(const DenseMatrix& m, const SvdOptions& options) {
  if (m.rows() == 0 || m.cols() == 0) throw ContractViolation("singular_values: empty matrix");
  Columns a = to_columns(m.rows() >= m.cols() ? m : m.transpose());
  jacobi_orthogonalize(a, nullptr, options);
  std::vector<double> sigma(a.cols);
  for (std::size_t j = 0; j < a.cols; ++j)
    sigma[j] = norm2(std::span<const double>(a.col(j), a.rows));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return DenseVector(std::move(sigma));
}

}  // namespace mirrorstrat

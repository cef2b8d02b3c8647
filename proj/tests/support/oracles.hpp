#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mirrorstrat/linalg.hpp"
#include "mirrorstrat/regularizer_kind.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const mirrorstrat::DenseMatrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Eigen::VectorXd to_eigen(const mirrorstrat::DenseVector& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

inline mirrorstrat::DenseVector from_eigen(const Eigen::VectorXd& v) {
  mirrorstrat::DenseVector out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  return out;
}

// R(z) written out from the definitions, independently of the library.
inline double regularizer_value(const mirrorstrat::RegularizerKind& kind, const std::vector<double>& z) {
  using namespace mirrorstrat;
  if (std::holds_alternative<L1Norm>(kind)) {
    double s = 0.0;
    for (double v : z) s += std::abs(v);
    return s;
  }
  if (const auto* g = std::get_if<GroupL12Norm>(&kind)) {
    double s = 0.0;
    for (const auto& block : g->blocks()) {
      double b = 0.0;
      for (std::size_t i : block) b += z[i] * z[i];
      s += std::sqrt(b);
    }
    return s;
  }
  if (const auto* n = std::get_if<NuclearNorm>(&kind)) {
    if (n->side == 2) {
      // s1 + s2 = max(|(a+d, c-b)|, |(a-d, b+c)|) for [[a, b], [c, d]].
      const double a = z[0], b = z[1], c = z[2], d = z[3];
      return std::max(std::hypot(a + d, c - b), std::hypot(a - d, b + c));
    }
    Eigen::MatrixXd m(n->side, n->side);
    for (std::size_t i = 0; i < n->side; ++i)
      for (std::size_t j = 0; j < n->side; ++j) m(i, j) = z[i * n->side + j];
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues().sum();
  }
  for (double v : z)
    if (std::abs(v) > 1.0) return std::numeric_limits<double>::infinity();
  return 0.0;
}

// Minimizes f over R^n by repeated grid refinement: a (2k+1)^n grid around
// the incumbent with per-coordinate half-widths, then the box shrinks
// around the best point. Works when the kinks of f are axis-aligned.
inline std::vector<double> grid_minimize(const std::function<double(const std::vector<double>&)>& f,
                                         std::vector<double> best, std::vector<double> radius, int levels = 80) {
  const std::size_t n = best.size();
  const int half = n <= 2 ? 10 : (n == 3 ? 6 : 4);
  const int side = 2 * half + 1;
  double best_value = f(best);
  std::vector<double> z(n);
  std::vector<int> idx(n);
  for (int level = 0; level < levels; ++level) {
    const std::vector<double> center = best;
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) z[i] = center[i] + radius[i] / half * (idx[i] - half);
      const double v = f(z);
      if (v < best_value) {
        best_value = v;
        best = z;
      }
      std::size_t d = 0;
      while (d < n && ++idx[d] == side) idx[d++] = 0;
      if (d == n) break;
    }
    double widest = 0.0;
    for (double& r : radius) widest = std::max(widest, r *= 0.6);
    if (widest < 1e-10) break;
  }
  return best;
}

// Minimizer of 1/2 |z - x|^2 + mu R(z) by grid refinement. The objective is
// 1-strongly convex and the prox lies within |x| of x.
//
// For 2 x 2 nuclear norms the search runs in coordinates where the kinks
// are axis-aligned: with p = (a+d), q = (c-b), r = (a-d), s = (b+c) (all
// over sqrt 2), |M|_* = sqrt2 max(|(p,q)|, |(r,s)|). Writing (p,q) and
// (r,s) in signed polar form (rho1, t1), (rho2, t2) and u = rho1 - rho2,
// v = rho1 + rho2 gives |M|_* = (|u| + |v|) / sqrt2.
inline std::vector<double> brute_force_prox(const mirrorstrat::RegularizerKind& kind, double mu,
                                            const std::vector<double>& x) {
  const std::size_t n = x.size();
  double reach = 1.0;
  for (double v : x) reach += std::abs(v);
  auto distance_sq = [&](const std::vector<double>& z) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (z[i] - x[i]) * (z[i] - x[i]);
    return d;
  };

  const auto* nuc = std::get_if<mirrorstrat::NuclearNorm>(&kind);
  if (nuc && nuc->side == 2) {
    const double r2 = std::sqrt(2.0);
    auto to_matrix = [r2](const std::vector<double>& w) {
      const double rho1 = (w[0] + w[1]) / 2, rho2 = (w[1] - w[0]) / 2;
      const double p = rho1 * std::cos(w[2]), q = rho1 * std::sin(w[2]);
      const double r = rho2 * std::cos(w[3]), s = rho2 * std::sin(w[3]);
      // a = (p+r)/sqrt2, d = (p-r)/sqrt2, b = (s-q)/sqrt2, c = (q+s)/sqrt2
      return std::vector<double>{(p + r) / r2, (s - q) / r2, (q + s) / r2, (p - r) / r2};
    };
    auto f = [&](const std::vector<double>& w) {
      return 0.5 * distance_sq(to_matrix(w)) + mu * (std::abs(w[0]) + std::abs(w[1])) / r2;
    };
    const double p = (x[0] + x[3]) / r2, q = (x[2] - x[1]) / r2, r = (x[0] - x[3]) / r2, s = (x[1] + x[2]) / r2;
    const double rho1 = std::hypot(p, q), rho2 = std::hypot(r, s);
    const std::vector<double> start{rho1 - rho2, rho1 + rho2, std::atan2(q, p), std::atan2(s, r)};
    const double pi = std::acos(-1.0);
    // Restart from the result with a fresh box until it stops moving.
    std::vector<double> w = start;
    for (int pass = 0; pass < 4; ++pass) w = grid_minimize(f, w, {2 * reach, 2 * reach, pi, pi});
    return to_matrix(w);
  }

  auto f = [&](const std::vector<double>& z) { return 0.5 * distance_sq(z) + mu * regularizer_value(kind, z); };
  if (std::holds_alternative<mirrorstrat::LInfBall>(kind)) {
    return grid_minimize(f, std::vector<double>(n, 0.0), std::vector<double>(n, 1.0));
  }
  return grid_minimize(f, x, std::vector<double>(n, reach));
}

// Minimum-norm q with Phi_S^T q = s_S and |Phi_j^T q| <= 1 off the support,
// by enumerating active sets with signs and keeping KKT points. Returns
// nothing when no KKT point exists (x0 is not a noiseless solution).
inline std::optional<Eigen::VectorXd> l1_min_norm_certificate(const Eigen::MatrixXd& phi,
                                                              const Eigen::VectorXd& x0) {
  const Eigen::Index p = phi.rows();
  const Eigen::Index n = phi.cols();
  std::vector<Eigen::Index> support, off;
  for (Eigen::Index j = 0; j < n; ++j) (x0(j) != 0.0 ? support : off).push_back(j);
  const Eigen::Index k = static_cast<Eigen::Index>(support.size());
  if (k > p) return std::nullopt;

  std::optional<Eigen::VectorXd> best;
  double best_norm = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> active;
  std::vector<double> signs;

  std::function<void(std::size_t)> visit = [&](std::size_t start) {
    const Eigen::Index m = k + static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd b(p, m);
    Eigen::VectorXd c(m);
    for (Eigen::Index i = 0; i < k; ++i) {
      b.col(i) = phi.col(support[static_cast<std::size_t>(i)]);
      c(i) = x0(support[static_cast<std::size_t>(i)]) > 0 ? 1.0 : -1.0;
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      b.col(k + static_cast<Eigen::Index>(a)) = signs[a] * phi.col(active[a]);
      c(k + static_cast<Eigen::Index>(a)) = 1.0;
    }
    if (m > 0) {
      const Eigen::MatrixXd gram = b.transpose() * b;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      if (lu.rank() == m) {
        const Eigen::VectorXd w = lu.solve(c);
        const Eigen::VectorXd q = b * w;
        bool ok = true;
        for (std::size_t a = 0; a < active.size() && ok; ++a) ok = w(k + static_cast<Eigen::Index>(a)) <= 1e-12;
        for (Eigen::Index j : off) {
          if (!ok) break;
          ok = std::abs(phi.col(j).dot(q)) <= 1.0 + 1e-10;
        }
        if (ok && q.norm() < best_norm) {
          best_norm = q.norm();
          best = q;
        }
      }
    } else {
      best_norm = 0.0;
      best = Eigen::VectorXd::Zero(p);
    }
    if (m == p) return;
    for (std::size_t i = start; i < off.size(); ++i) {
      for (double s : {1.0, -1.0}) {
        active.push_back(off[i]);
        signs.push_back(s);
        visit(i + 1);
        active.pop_back();
        signs.pop_back();
      }
    }
  };
  visit(0);
  return best;
}

}  // namespace oracle

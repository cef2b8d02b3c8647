#include "mirrorstrat/regularizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mirrorstrat/errors.hpp"

namespace mirrorstrat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_dimension(const RegularizerKind& kind, const DenseVector& x, const char* where) {
  if (x.size() != dimension(kind)) {
    throw DimensionError(std::string(where) + ": vector of length " + std::to_string(x.size()) +
                         " for " + name(kind) + " of dimension " +
                         std::to_string(dimension(kind)));
  }
}

void require_positive(double mu, const char* where) {
  if (!(mu > 0.0)) throw ContractViolation(std::string(where) + ": mu must be positive");
}

double soft_threshold(double v, double mu) {
  const double a = std::abs(v) - mu;
  return a > 0.0 ? std::copysign(a, v) : 0.0;
}

double block_norm(const DenseVector& x, const std::vector<std::size_t>& block) {
  double s = 0.0;
  for (std::size_t i : block) s += x[i] * x[i];
  return std::sqrt(s);
}

// sum_k weights[k] u_k v_k^T over the leading `count` singular pairs.
DenseMatrix spectral_sum(const SvdFactorization& f, const std::vector<double>& weights) {
  const std::size_t rows = f.left_factors.rows();
  const std::size_t cols = f.right_factors.rows();
  DenseMatrix out(rows, cols);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double w = weights[k];
    if (w == 0.0) continue;
    for (std::size_t i = 0; i < rows; ++i) {
      const double ui = w * f.left_factors(i, k);
      if (ui == 0.0) continue;
      auto row = out.row(i);
      for (std::size_t j = 0; j < cols; ++j) row[j] += ui * f.right_factors(j, k);
    }
  }
  return out;
}

DenseVector nuclear_prox(std::size_t side, double mu, const DenseVector& x) {
  const SvdFactorization f = svd(DenseMatrix::from_flat(x, side));
  std::vector<double> shrunk;
  for (std::size_t k = 0; k < side; ++k) {
    const double s = f.singular_values[k] - mu;
    if (s <= 0.0) break;
    shrunk.push_back(s);
  }
  return spectral_sum(f, shrunk).flatten();
}

// Clips the singular values of w to at most 1.
DenseMatrix spectral_clip(const DenseMatrix& w) {
  const SvdFactorization f = svd(w);
  std::vector<double> excess;
  for (std::size_t k = 0; k < f.singular_values.size(); ++k) {
    const double e = f.singular_values[k] - 1.0;
    if (e <= 0.0) break;
    excess.push_back(e);
  }
  if (excess.empty()) return w;
  return w - spectral_sum(f, excess);
}

std::vector<std::int8_t> ternary(const DenseVector& x, double threshold) {
  std::vector<std::int8_t> out(x.size(), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > threshold) out[i] = 1;
    else if (x[i] < -threshold) out[i] = -1;
  }
  return out;
}

}  // namespace

// Kinds ------------------------------------------------------------------------

GroupL12Norm GroupL12Norm::from_blocks(std::vector<std::vector<std::size_t>> blocks) {
  if (blocks.empty()) throw ContractViolation("GroupL12Norm: no blocks");
  std::size_t total = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw ContractViolation("GroupL12Norm: empty block");
    total += b.size();
  }
  std::vector<std::uint8_t> seen(total, 0);
  for (const auto& b : blocks) {
    for (std::size_t i : b) {
      if (i >= total) throw ContractViolation("GroupL12Norm: blocks do not cover 0..N-1");
      if (seen[i]) throw ContractViolation("GroupL12Norm: blocks overlap");
      seen[i] = 1;
    }
  }
  GroupL12Norm g;
  g.blocks_ = std::move(blocks);
  g.dimension_ = total;
  return g;
}

GroupL12Norm GroupL12Norm::contiguous(std::size_t dimension, std::size_t block_size) {
  if (block_size == 0 || dimension == 0 || dimension % block_size != 0) {
    throw ContractViolation("GroupL12Norm::contiguous: dimension must be a positive multiple of "
                            "block_size");
  }
  std::vector<std::vector<std::size_t>> blocks(dimension / block_size);
  for (std::size_t i = 0; i < dimension; ++i) blocks[i / block_size].push_back(i);
  return from_blocks(std::move(blocks));
}

std::size_t dimension(const RegularizerKind& kind) {
  return std::visit(overloaded{
                        [](const L1Norm& k) { return k.dimension; },
                        [](const GroupL12Norm& k) { return k.dimension(); },
                        [](const NuclearNorm& k) { return k.side * k.side; },
                        [](const LInfBall& k) { return k.dimension; },
                    },
                    kind);
}

std::string name(const RegularizerKind& kind) {
  return std::visit(overloaded{
                        [](const L1Norm&) { return std::string("l1"); },
                        [](const GroupL12Norm&) { return std::string("group"); },
                        [](const NuclearNorm&) { return std::string("nuclear"); },
                        [](const LInfBall&) { return std::string("linf"); },
                    },
                    kind);
}

void Tolerances::validate() const {
  auto ok = [](double t) { return t > 0.0 && t <= 1e-2; };
  if (!ok(primal_zero_tol) || !ok(dual_saturation_tol)) {
    throw ContractViolation("Tolerances: thresholds must lie in (0, 1e-2]");
  }
}

// Evaluation -------------------------------------------------------------------

double evaluate(const RegularizerKind& kind, const DenseVector& x) {
  require_dimension(kind, x, "evaluate");
  return std::visit(overloaded{
                        [&](const L1Norm&) {
                          double s = 0.0;
                          for (double v : x) s += std::abs(v);
                          return s;
                        },
                        [&](const GroupL12Norm& k) {
                          double s = 0.0;
                          for (const auto& b : k.blocks()) s += block_norm(x, b);
                          return s;
                        },
                        [&](const NuclearNorm& k) {
                          const DenseVector sigma = singular_values(DenseMatrix::from_flat(x, k.side));
                          double s = 0.0;
                          for (double v : sigma) s += v;
                          return s;
                        },
                        [&](const LInfBall&) { return norm_inf(x.span()) <= 1.0 ? 0.0 : kInf; },
                    },
                    kind);
}

double dual_norm(const RegularizerKind& kind, const DenseVector& u) {
  require_dimension(kind, u, "dual_norm");
  return std::visit(overloaded{
                        [&](const L1Norm&) { return norm_inf(u.span()); },
                        [&](const GroupL12Norm& k) {
                          double m = 0.0;
                          for (const auto& b : k.blocks()) m = std::max(m, block_norm(u, b));
                          return m;
                        },
                        [&](const NuclearNorm& k) {
                          return singular_values(DenseMatrix::from_flat(u, k.side))[0];
                        },
                        [&](const LInfBall&) -> double {
                          throw ContractViolation("dual_norm: undefined for the l-infinity ball");
                        },
                    },
                    kind);
}

double evaluate_conjugate(const RegularizerKind& kind, const DenseVector& u) {
  require_dimension(kind, u, "evaluate_conjugate");
  if (std::holds_alternative<LInfBall>(kind)) {
    double s = 0.0;
    for (double v : u) s += std::abs(v);
    return s;
  }
  return dual_norm(kind, u) <= 1.0 ? 0.0 : kInf;
}

// Proximal maps ------------------------------------------------------------------

DenseVector prox(const RegularizerKind& kind, double mu, const DenseVector& x) {
  require_positive(mu, "prox");
  require_dimension(kind, x, "prox");
  return std::visit(overloaded{
                        [&](const L1Norm&) {
                          DenseVector z(x.size());
                          for (std::size_t i = 0; i < x.size(); ++i) z[i] = soft_threshold(x[i], mu);
                          return z;
                        },
                        [&](const GroupL12Norm& k) {
                          DenseVector z(x.size());
                          for (const auto& b : k.blocks()) {
                            const double nb = block_norm(x, b);
                            if (nb <= mu) continue;
                            const double scale = 1.0 - mu / nb;
                            for (std::size_t i : b) z[i] = scale * x[i];
                          }
                          return z;
                        },
                        [&](const NuclearNorm& k) { return nuclear_prox(k.side, mu, x); },
                        [&](const LInfBall&) {
                          DenseVector z(x.size());
                          for (std::size_t i = 0; i < x.size(); ++i) z[i] = std::clamp(x[i], -1.0, 1.0);
                          return z;
                        },
                    },
                    kind);
}

DenseVector prox_conjugate(const RegularizerKind& kind, double mu, const DenseVector& x) {
  require_positive(mu, "prox_conjugate");
  require_dimension(kind, x, "prox_conjugate");
  DenseVector scaled = (1.0 / mu) * x;
  DenseVector p = prox(kind, 1.0 / mu, scaled);
  DenseVector out = x;
  axpy(-mu, p.span(), out.span());
  return out;
}

// Strata ---------------------------------------------------------------------------

std::size_t complexity_index(const RegularizerKind& kind, const DenseVector& x,
                             const Tolerances& tol) {
  require_dimension(kind, x, "complexity_index");
  return std::visit(
      overloaded{
          [&](const L1Norm&) {
            return static_cast<std::size_t>(std::count_if(
                x.begin(), x.end(), [&](double v) { return std::abs(v) > tol.primal_zero_tol; }));
          },
          [&](const GroupL12Norm& k) {
            return static_cast<std::size_t>(
                std::count_if(k.blocks().begin(), k.blocks().end(),
                              [&](const auto& b) { return block_norm(x, b) > tol.primal_zero_tol; }));
          },
          [&](const NuclearNorm& k) {
            const DenseVector sigma = singular_values(DenseMatrix::from_flat(x, k.side));
            return static_cast<std::size_t>(std::count_if(
                sigma.begin(), sigma.end(), [&](double s) { return s > tol.primal_zero_tol; }));
          },
          [&](const LInfBall&) {
            return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [&](double v) {
              return std::abs(v) >= 1.0 - tol.dual_saturation_tol;
            }));
          },
      },
      kind);
}

Stratum primal_stratum(const RegularizerKind& kind, const DenseVector& x, const Tolerances& tol) {
  require_dimension(kind, x, "primal_stratum");
  return std::visit(
      overloaded{
          [&](const L1Norm&) -> Stratum { return SignPattern{ternary(x, tol.primal_zero_tol)}; },
          [&](const GroupL12Norm& k) -> Stratum {
            std::vector<std::uint8_t> bits(k.block_count());
            for (std::size_t b = 0; b < k.block_count(); ++b)
              bits[b] = block_norm(x, k.blocks()[b]) > tol.primal_zero_tol;
            return BlockSupport{std::move(bits)};
          },
          [&](const NuclearNorm& k) -> Stratum {
            return Rank{complexity_index(kind, x, tol), k.side};
          },
          [&](const LInfBall&) -> Stratum {
            if (norm_inf(x.span()) > 1.0 + tol.dual_saturation_tol) {
              throw ContractViolation("primal_stratum: point outside the l-infinity ball");
            }
            return FacePattern{ternary(x, 1.0 - tol.dual_saturation_tol)};
          },
      },
      kind);
}

DualStratum dual_stratum(const RegularizerKind& kind, const DenseVector& u, const Tolerances& tol) {
  require_dimension(kind, u, "dual_stratum");
  const double upper = 1.0 + tol.dual_saturation_tol;
  const double lower = 1.0 - tol.dual_saturation_tol;
  return std::visit(
      overloaded{
          [&](const L1Norm&) -> DualStratum {
            if (norm_inf(u.span()) > upper) {
              throw InfeasibleDualError("dual_stratum: |u|_inf exceeds 1 beyond tolerance");
            }
            return SaturationPattern{ternary(u, lower - std::numeric_limits<double>::min())};
          },
          [&](const GroupL12Norm& k) -> DualStratum {
            std::vector<std::uint8_t> bits(k.block_count());
            for (std::size_t b = 0; b < k.block_count(); ++b) {
              const double nb = block_norm(u, k.blocks()[b]);
              if (nb > upper) {
                throw InfeasibleDualError("dual_stratum: block norm exceeds 1 beyond tolerance");
              }
              bits[b] = nb >= lower;
            }
            return BlockSaturation{std::move(bits)};
          },
          [&](const NuclearNorm& k) -> DualStratum {
            const DenseVector sigma = singular_values(DenseMatrix::from_flat(u, k.side));
            if (sigma[0] > upper) {
              throw InfeasibleDualError("dual_stratum: spectral norm exceeds 1 beyond tolerance");
            }
            const auto count = static_cast<std::size_t>(
                std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s >= lower; }));
            return SaturationCount{count, k.side};
          },
          [&](const LInfBall&) -> DualStratum {
            return NormalSigns{ternary(u, tol.primal_zero_tol)};
          },
      },
      kind);
}

DualStratum mirror_map(const RegularizerKind& kind, const Stratum& s) {
  if (!matches(kind, s)) throw StratumMismatch("mirror_map: stratum does not belong to " + name(kind));
  return paired_dual(s);
}

Stratum mirror_map_conj(const RegularizerKind& kind, const DualStratum& d) {
  if (!matches(kind, d)) {
    throw StratumMismatch("mirror_map_conj: dual stratum does not belong to " + name(kind));
  }
  return paired_primal(d);
}

// Subdifferential projection -----------------------------------------------------------

struct SubdifferentialProjector::Impl {
  RegularizerKind kind;
  DenseVector x0;
  // l1 / linf: per-coordinate sign of x0 on its support or active face.
  std::vector<std::int8_t> pattern;
  // group: active-block unit directions (zero-length for inactive blocks).
  std::vector<std::uint8_t> active_blocks;
  // nuclear: U_r V_r^T and the complement projectors.
  DenseMatrix base;
  DenseMatrix left_complement;
  DenseMatrix right_complement;
};

SubdifferentialProjector::SubdifferentialProjector(const RegularizerKind& kind,
                                                   const DenseVector& x0, const Tolerances& tol)
    : impl_(std::make_unique<Impl>()) {
  require_dimension(kind, x0, "project_subdifferential");
  if (!x0.all_finite()) throw ContractViolation("project_subdifferential: x0 is not finite");
  impl_->kind = kind;
  impl_->x0 = x0;
  std::visit(overloaded{
                 [&](const L1Norm&) { impl_->pattern = ternary(x0, tol.primal_zero_tol); },
                 [&](const GroupL12Norm& k) {
                   impl_->active_blocks.resize(k.block_count());
                   for (std::size_t b = 0; b < k.block_count(); ++b)
                     impl_->active_blocks[b] = block_norm(x0, k.blocks()[b]) > tol.primal_zero_tol;
                 },
                 [&](const NuclearNorm& k) {
                   const std::size_t n = k.side;
                   const SvdFactorization f = svd(DenseMatrix::from_flat(x0, n));
                   std::size_t r = 0;
                   while (r < n && f.singular_values[r] > tol.primal_zero_tol) ++r;
                   impl_->base = spectral_sum(f, std::vector<double>(r, 1.0));
                   impl_->left_complement = DenseMatrix::identity(n);
                   impl_->right_complement = DenseMatrix::identity(n);
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t j = 0; j < n; ++j) {
                       double lu = 0.0, rv = 0.0;
                       for (std::size_t k2 = 0; k2 < r; ++k2) {
                         lu += f.left_factors(i, k2) * f.left_factors(j, k2);
                         rv += f.right_factors(i, k2) * f.right_factors(j, k2);
                       }
                       impl_->left_complement(i, j) -= lu;
                       impl_->right_complement(i, j) -= rv;
                     }
                   }
                 },
                 [&](const LInfBall&) {
                   if (norm_inf(x0.span()) > 1.0 + tol.dual_saturation_tol) {
                     throw ContractViolation(
                         "project_subdifferential: x0 outside the l-infinity ball (empty normal cone)");
                   }
                   impl_->pattern = ternary(x0, 1.0 - tol.dual_saturation_tol);
                 },
             },
             kind);
}

SubdifferentialProjector::~SubdifferentialProjector() = default;
SubdifferentialProjector::SubdifferentialProjector(SubdifferentialProjector&&) noexcept = default;
SubdifferentialProjector& SubdifferentialProjector::operator=(SubdifferentialProjector&&) noexcept =
    default;

std::size_t SubdifferentialProjector::dimension() const noexcept { return impl_->x0.size(); }

DenseVector SubdifferentialProjector::operator()(const DenseVector& v) const {
  require_dimension(impl_->kind, v, "project_subdifferential");
  const Impl& d = *impl_;
  return std::visit(
      overloaded{
          [&](const L1Norm&) {
            DenseVector out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
              out[i] = d.pattern[i] != 0 ? d.pattern[i] : std::clamp(v[i], -1.0, 1.0);
            return out;
          },
          [&](const GroupL12Norm& k) {
            DenseVector out(v.size());
            for (std::size_t b = 0; b < k.block_count(); ++b) {
              const auto& block = k.blocks()[b];
              if (d.active_blocks[b]) {
                const double nx = block_norm(d.x0, block);
                for (std::size_t i : block) out[i] = d.x0[i] / nx;
              } else {
                const double nv = block_norm(v, block);
                const double scale = nv > 1.0 ? 1.0 / nv : 1.0;
                for (std::size_t i : block) out[i] = scale * v[i];
              }
            }
            return out;
          },
          [&](const NuclearNorm& k) {
            const DenseMatrix w =
                matmul(matmul(d.left_complement, DenseMatrix::from_flat(v, k.side)), d.right_complement);
            return (d.base + spectral_clip(w)).flatten();
          },
          [&](const LInfBall&) {
            DenseVector out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) {
              if (d.pattern[i] > 0) out[i] = std::max(v[i], 0.0);
              else if (d.pattern[i] < 0) out[i] = std::min(v[i], 0.0);
            }
            return out;
          },
      },
      d.kind);
}

double SubdifferentialProjector::distance(const DenseVector& v) const {
  const DenseVector p = (*this)(v);
  return norm2((v - p).span());
}

DenseVector project_subdifferential(const RegularizerKind& kind, const DenseVector& x0,
                                    const DenseVector& v, const Tolerances& tol) {
  return SubdifferentialProjector(kind, x0, tol)(v);
}

}  // namespace mirrorstrat

#include "mirrorstrat/strata.hpp"

#include <algorithm>
#include <charconv>

#include "mirrorstrat/errors.hpp"

namespace mirrorstrat {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

template <class T>
void require_same_length(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) {
    throw StratumMismatch("stratum descriptors have different lengths (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

std::size_t count_nonzero(const std::vector<std::int8_t>& v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](auto x) { return x != 0; }));
}

char sign_char(std::int8_t v) { return v > 0 ? '+' : (v < 0 ? '-' : '0'); }

std::string ternary_string(const std::vector<std::int8_t>& v) {
  std::string out(v.size(), '0');
  std::transform(v.begin(), v.end(), out.begin(), sign_char);
  return out;
}

std::string bit_string(const std::vector<std::uint8_t>& v) {
  std::string out(v.size(), '0');
  std::transform(v.begin(), v.end(), out.begin(), [](auto b) { return b ? '1' : '0'; });
  return out;
}

std::vector<std::int8_t> parse_ternary(std::string_view text, std::size_t n) {
  if (text.size() != n) throw StratumMismatch("ternary pattern has wrong length");
  std::vector<std::int8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (text[i]) {
      case '+': out[i] = 1; break;
      case '-': out[i] = -1; break;
      case '0': out[i] = 0; break;
      default: throw StratumMismatch("invalid character in ternary pattern");
    }
  }
  return out;
}

std::size_t parse_count(std::string_view text) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw StratumMismatch("invalid integer stratum descriptor");
  }
  return value;
}

}  // namespace

bool leq(const Stratum& s, const Stratum& t) {
  if (s.index() != t.index()) throw StratumMismatch("leq: strata of different kinds");
  return std::visit(
      overloaded{
          [&](const SignPattern& a) {
            const auto& b = std::get<SignPattern>(t);
            require_same_length(a.signs, b.signs);
            for (std::size_t i = 0; i < a.signs.size(); ++i)
              if (a.signs[i] != 0 && a.signs[i] != b.signs[i]) return false;
            return true;
          },
          [&](const BlockSupport& a) {
            const auto& b = std::get<BlockSupport>(t);
            require_same_length(a.active, b.active);
            for (std::size_t i = 0; i < a.active.size(); ++i)
              if (a.active[i] && !b.active[i]) return false;
            return true;
          },
          [&](const Rank& a) {
            const auto& b = std::get<Rank>(t);
            if (a.side != b.side) throw StratumMismatch("leq: ranks for different sides");
            return a.rank <= b.rank;
          },
          [&](const FacePattern& a) {
            // A smaller face lies in the closure of every face it bounds.
            const auto& b = std::get<FacePattern>(t);
            require_same_length(a.saturation, b.saturation);
            for (std::size_t i = 0; i < a.saturation.size(); ++i)
              if (b.saturation[i] != 0 && b.saturation[i] != a.saturation[i]) return false;
            return true;
          },
      },
      s);
}

std::size_t dim(const Stratum& s) {
  return std::visit(
      overloaded{
          [](const SignPattern& a) { return count_nonzero(a.signs); },
          [](const BlockSupport& a) {
            return static_cast<std::size_t>(std::count(a.active.begin(), a.active.end(), 1));
          },
          [](const Rank& a) { return a.rank; },
          [](const FacePattern& a) { return a.saturation.size() - count_nonzero(a.saturation); },
      },
      s);
}

bool sandwich_holds(const Stratum& lower, const Stratum& mid, const Stratum& upper) {
  return leq(lower, mid) && leq(mid, upper);
}

DualStratum paired_dual(const Stratum& s) {
  return std::visit(overloaded{
                        [](const SignPattern& a) -> DualStratum { return SaturationPattern{a.signs}; },
                        [](const BlockSupport& a) -> DualStratum { return BlockSaturation{a.active}; },
                        [](const Rank& a) -> DualStratum { return SaturationCount{a.rank, a.side}; },
                        [](const FacePattern& a) -> DualStratum { return NormalSigns{a.saturation}; },
                    },
                    s);
}

Stratum paired_primal(const DualStratum& d) {
  return std::visit(overloaded{
                        [](const SaturationPattern& a) -> Stratum { return SignPattern{a.signs}; },
                        [](const BlockSaturation& a) -> Stratum { return BlockSupport{a.saturated}; },
                        [](const SaturationCount& a) -> Stratum { return Rank{a.count, a.side}; },
                        [](const NormalSigns& a) -> Stratum { return FacePattern{a.signs}; },
                    },
                    d);
}

bool dual_leq(const DualStratum& d, const DualStratum& e) {
  return leq(paired_primal(e), paired_primal(d));
}

bool matches(const RegularizerKind& kind, const Stratum& s) {
  // Variant alternatives are declared in the same order as the kinds.
  if (kind.index() != s.index()) return false;
  return std::visit(overloaded{
                        [&](const SignPattern& a) { return a.signs.size() == dimension(kind); },
                        [&](const BlockSupport& a) {
                          return a.active.size() == std::get<GroupL12Norm>(kind).block_count();
                        },
                        [&](const Rank& a) {
                          return a.side == std::get<NuclearNorm>(kind).side && a.rank <= a.side;
                        },
                        [&](const FacePattern& a) { return a.saturation.size() == dimension(kind); },
                    },
                    s);
}

bool matches(const RegularizerKind& kind, const DualStratum& d) {
  return matches(kind, paired_primal(d));
}

int delta_star(const Stratum& primal, const DualStratum& dual_upper, const RegularizerKind& kind) {
  if (!matches(kind, primal) || !matches(kind, dual_upper)) {
    throw StratumMismatch("delta_star: strata do not belong to regularizer " + name(kind));
  }
  const Stratum upper = paired_primal(dual_upper);
  if (!leq(primal, upper)) {
    throw InconsistentCertificateError("delta_star: primal stratum " + to_string(primal) +
                                       " is not below upper stratum " + to_string(upper));
  }
  return static_cast<int>(dim(upper)) - static_cast<int>(dim(primal));
}

std::string to_string(const Stratum& s) {
  return std::visit(overloaded{
                        [](const SignPattern& a) { return ternary_string(a.signs); },
                        [](const BlockSupport& a) { return bit_string(a.active); },
                        [](const Rank& a) { return std::to_string(a.rank); },
                        [](const FacePattern& a) { return ternary_string(a.saturation); },
                    },
                    s);
}

std::string to_string(const DualStratum& d) {
  return std::visit(overloaded{
                        [](const SaturationPattern& a) { return ternary_string(a.signs); },
                        [](const BlockSaturation& a) { return bit_string(a.saturated); },
                        [](const SaturationCount& a) { return std::to_string(a.count); },
                        [](const NormalSigns& a) { return ternary_string(a.signs); },
                    },
                    d);
}

Stratum parse_stratum(const RegularizerKind& kind, std::string_view text) {
  return std::visit(
      overloaded{
          [&](const L1Norm& k) -> Stratum { return SignPattern{parse_ternary(text, k.dimension)}; },
          [&](const GroupL12Norm& k) -> Stratum {
            if (text.size() != k.block_count()) throw StratumMismatch("block pattern has wrong length");
            std::vector<std::uint8_t> bits(text.size());
            for (std::size_t i = 0; i < text.size(); ++i) {
              if (text[i] != '0' && text[i] != '1') throw StratumMismatch("invalid block pattern");
              bits[i] = text[i] == '1';
            }
            return BlockSupport{std::move(bits)};
          },
          [&](const NuclearNorm& k) -> Stratum {
            const std::size_t r = parse_count(text);
            if (r > k.side) throw StratumMismatch("rank exceeds matrix side");
            return Rank{r, k.side};
          },
          [&](const LInfBall& k) -> Stratum { return FacePattern{parse_ternary(text, k.dimension)}; },
      },
      kind);
}

}  // namespace mirrorstrat

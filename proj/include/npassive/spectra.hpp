#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npassive/errors.hpp"

namespace npassive {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using OccupationTable = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kDefaultDegeneracyTolerance = 1e-9;
inline constexpr double kPopulationSumTolerance = 1e-12;
inline constexpr std::size_t kDefaultOccupationCap = 2'000'000;

// Reduced fraction with positive denominator.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t num, std::int64_t den);
  // Accepts "p/q" or "p".
  static Rational parse(std::string_view text);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;

  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;
};

namespace detail {

// Neumaier summation.
template <typename Scalar>
class CompensatedSum {
 public:
  void add(Scalar x) {
    const Scalar t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  Scalar value() const { return sum_ + c_; }

 private:
  Scalar sum_ = 0;
  Scalar c_ = 0;
};

template <typename Scalar>
Scalar neg_inf() {
  return -std::numeric_limits<Scalar>::infinity();
}

// x ln x with the 0 ln 0 = 0 convention.
template <typename Scalar>
Scalar xlogx(Scalar x) {
  return x > 0 ? x * std::log(x) : Scalar(0);
}

// ln sum exp(v_i); the largest term is factored out and the rest enters log1p.
template <typename Scalar>
Scalar log_sum_exp(const VectorX<Scalar>& v) {
  Index top = 0;
  const Scalar m = v.maxCoeff(&top);
  if (std::isinf(static_cast<double>(m))) return m;
  Scalar rest = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (i != top) rest += std::exp(v[i] - m);
  }
  return m + std::log1p(rest);
}

// ln(c x), accurate when c x is close to 1.
template <typename Scalar>
Scalar log_scaled(Scalar c, Scalar x) {
  const Scalar y = c * x;
  const Scalar dev = y - Scalar(1);
  return std::abs(dev) < Scalar(0.5) ? std::log1p(dev) : std::log(y);
}

}  // namespace detail

template <typename Scalar>
struct Level {
  Scalar energy;
  Index multiplicity;
  Index first;  // index of the first member in Spectrum::energies()
};

// Distinct levels with real multiplicities stored by logarithm. Used for
// 1-structurally-stable quantities, where every member of a level carries the
// same population and multiplicities may be far beyond any integer type.
template <typename Scalar>
struct LevelSpectrum {
  VectorX<Scalar> energies;          // strictly ascending, energies[0] == 0
  VectorX<Scalar> log_multiplicity;  // ln d_eps per level

  static LevelSpectrum from_log_multiplicities(VectorX<Scalar> energies, VectorX<Scalar> log_mult) {
    if (energies.size() == 0 || energies.size() != log_mult.size()) {
      throw InvalidInput("level spectrum: energies and multiplicities must be non-empty and aligned");
    }
    if (energies[0] != Scalar(0)) throw InvalidInput("level spectrum: ground energy must be 0");
    for (Index l = 1; l < energies.size(); ++l) {
      if (!(energies[l] > energies[l - 1])) {
        throw InvalidInput("level spectrum: energies must be strictly ascending");
      }
    }
    for (Index l = 0; l < log_mult.size(); ++l) {
      if (!std::isfinite(static_cast<double>(log_mult[l])) || log_mult[l] < Scalar(0)) {
        throw InvalidInput("level spectrum: multiplicities must be finite and >= 1");
      }
    }
    return LevelSpectrum{std::move(energies), std::move(log_mult)};
  }

  static LevelSpectrum from_multiplicities(VectorX<Scalar> energies, const VectorX<Scalar>& mult) {
    if (mult.size() != energies.size()) throw InvalidInput("level spectrum: size mismatch");
    VectorX<Scalar> lm(mult.size());
    for (Index l = 0; l < mult.size(); ++l) {
      if (!(mult[l] >= Scalar(1))) throw InvalidInput("level spectrum: multiplicities must be >= 1");
      lm[l] = std::log(mult[l]);
    }
    return from_log_multiplicities(std::move(energies), std::move(lm));
  }

  Index size() const { return energies.size(); }
  Scalar eps_max() const { return energies[energies.size() - 1]; }
  Scalar log_d0() const { return log_multiplicity[0]; }
  Scalar log_d() const { return detail::log_sum_exp(log_multiplicity); }
  // Smallest positive level energy, or 0 for a single level.
  Scalar first_gap() const { return size() > 1 ? energies[1] : Scalar(0); }
};

template <typename Scalar>
class Spectrum {
 public:
  using Vector = VectorX<Scalar>;

  static Spectrum normalize(const std::vector<Scalar>& raw,
                            Scalar degeneracy_tolerance = Scalar(kDefaultDegeneracyTolerance)) {
    if (raw.empty()) throw InvalidInput("spectrum: energy list is empty");
    for (Scalar e : raw) {
      if (!std::isfinite(static_cast<double>(e))) throw InvalidInput("spectrum: non-finite energy");
    }
    if (!(degeneracy_tolerance >= Scalar(0))) throw InvalidInput("spectrum: negative degeneracy tolerance");
    const Index d = static_cast<Index>(raw.size());
    std::vector<Index> order(raw.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return raw[a] < raw[b]; });

    Vector shifted(d);
    for (Index k = 0; k < d; ++k) shifted[k] = raw[order[k]] - raw[order[0]];
    const Scalar threshold = degeneracy_tolerance * shifted[d - 1];

    Spectrum s;
    s.order_ = std::move(order);
    s.energies_.resize(d);
    s.energies_[0] = 0;
    Scalar anchor = 0;
    for (Index k = 1; k < d; ++k) {
      if (shifted[k] - shifted[k - 1] > threshold) anchor = shifted[k];
      s.energies_[k] = anchor;
    }
    s.build_levels();
    return s;
  }

  static Spectrum normalize(const Vector& raw, Scalar degeneracy_tolerance = Scalar(kDefaultDegeneracyTolerance)) {
    return normalize(std::vector<Scalar>(raw.data(), raw.data() + raw.size()), degeneracy_tolerance);
  }

  // Exact path: levels merge only on exact equality.
  static Spectrum from_rationals(const std::vector<Rational>& raw) {
    if (raw.empty()) throw InvalidInput("spectrum: energy list is empty");
    std::vector<Index> order(raw.size());
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return raw[a] < raw[b]; });
    Spectrum s;
    s.order_ = order;
    std::vector<Rational> shifted;
    shifted.reserve(raw.size());
    for (Index k : order) shifted.push_back(raw[k] - raw[order[0]]);
    s.energies_.resize(static_cast<Index>(raw.size()));
    for (std::size_t k = 0; k < shifted.size(); ++k) {
      s.energies_[static_cast<Index>(k)] = static_cast<Scalar>(shifted[k].num) / static_cast<Scalar>(shifted[k].den);
    }
    s.rationals_ = std::move(shifted);
    s.build_levels();
    return s;
  }

  const Vector& energies() const { return energies_; }
  Scalar energy(Index i) const { return energies_[i]; }
  const std::vector<Level<Scalar>>& levels() const { return levels_; }
  Index level_count() const { return static_cast<Index>(levels_.size()); }
  Index level_of(Index i) const { return level_of_[static_cast<std::size_t>(i)]; }
  Index d() const { return energies_.size(); }
  Index d0() const { return levels_.front().multiplicity; }
  Scalar eps_max() const { return energies_[d() - 1]; }
  bool two_level() const { return levels_.size() == 2; }
  bool degenerate() const { return level_count() < d(); }
  // order()[k] is the raw index placed at sorted position k.
  const std::vector<Index>& order() const { return order_; }
  const std::optional<std::vector<Rational>>& rational_energies() const { return rationals_; }

  LevelSpectrum<Scalar> level_view() const {
    LevelSpectrum<Scalar> ls;
    ls.energies.resize(level_count());
    ls.log_multiplicity.resize(level_count());
    for (Index l = 0; l < level_count(); ++l) {
      ls.energies[l] = levels_[l].energy;
      ls.log_multiplicity[l] = std::log(static_cast<Scalar>(levels_[l].multiplicity));
    }
    return ls;
  }

 private:
  void build_levels() {
    levels_.clear();
    level_of_.assign(static_cast<std::size_t>(d()), 0);
    for (Index i = 0; i < d(); ++i) {
      if (levels_.empty() || energies_[i] != levels_.back().energy) {
        levels_.push_back(Level<Scalar>{energies_[i], 0, i});
      }
      ++levels_.back().multiplicity;
      level_of_[static_cast<std::size_t>(i)] = static_cast<Index>(levels_.size()) - 1;
    }
  }

  Vector energies_;
  std::vector<Level<Scalar>> levels_;
  std::vector<Index> level_of_;
  std::vector<Index> order_;
  std::optional<std::vector<Rational>> rationals_;
};

template <typename Scalar>
class DiagonalState {
 public:
  using Vector = VectorX<Scalar>;

  static DiagonalState make(Vector populations, Scalar sum_tolerance = Scalar(kPopulationSumTolerance)) {
    if (populations.size() == 0) throw InvalidInput("state: population list is empty");
    detail::CompensatedSum<Scalar> sum;
    for (Index i = 0; i < populations.size(); ++i) {
      const Scalar p = populations[i];
      if (!std::isfinite(static_cast<double>(p))) throw InvalidInput("state: non-finite population");
      if (p < Scalar(0)) throw InvalidInput("state: negative population");
      sum.add(p);
    }
    if (std::abs(sum.value() - Scalar(1)) > sum_tolerance) {
      throw InvalidInput("state: populations must sum to 1");
    }
    DiagonalState s;
    s.p_ = std::move(populations);
    return s;
  }

  static DiagonalState make(const std::vector<Scalar>& populations) {
    return make(Eigen::Map<const Vector>(populations.data(), static_cast<Index>(populations.size())));
  }

  // Normalizes non-negative weights.
  static DiagonalState from_weights(const Vector& weights) {
    detail::CompensatedSum<Scalar> sum;
    for (Index i = 0; i < weights.size(); ++i) sum.add(weights[i]);
    if (!(sum.value() > Scalar(0))) throw InvalidInput("state: weights must have positive sum");
    return make(Vector(weights / sum.value()));
  }

  // Normalizes exp(log_weights) without overflow.
  static DiagonalState from_log_weights(const Vector& log_weights) {
    const Scalar top = log_weights.maxCoeff();
    Vector w(log_weights.size());
    for (Index i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
    return from_weights(w);
  }

  const Vector& populations() const { return p_; }
  Scalar operator[](Index i) const { return p_[i]; }
  Index size() const { return p_.size(); }

  // ln lambda with -inf for empty entries.
  Vector log_populations() const {
    Vector out(p_.size());
    for (Index i = 0; i < p_.size(); ++i) out[i] = p_[i] > 0 ? std::log(p_[i]) : detail::neg_inf<Scalar>();
    return out;
  }

 private:
  Vector p_;
};

// A 1-structurally-stable state described per distinct level.
template <typename Scalar>
struct LevelState {
  VectorX<Scalar> log_populations;  // ln of the population of each member of a level

  // Normalizes per-level log-weights against the level multiplicities.
  static LevelState from_log_weights(const LevelSpectrum<Scalar>& ls, const VectorX<Scalar>& log_w) {
    if (log_w.size() != ls.size()) throw InvalidInput("level state: size mismatch");
    const Scalar log_norm = detail::log_sum_exp(VectorX<Scalar>(log_w + ls.log_multiplicity));
    return LevelState{VectorX<Scalar>(log_w.array() - log_norm)};
  }
};

using Spectrumd = Spectrum<double>;
using LevelSpectrumd = LevelSpectrum<double>;
using DiagonalStated = DiagonalState<double>;
using LevelStated = LevelState<double>;

template <typename Scalar>
void require_aligned(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  if (s.d() != rho.size()) throw InvalidInput("state length does not match spectrum dimension");
}

template <typename Scalar>
Scalar state_energy(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  require_aligned(s, rho);
  detail::CompensatedSum<Scalar> sum;
  for (Index i = 0; i < s.d(); ++i) sum.add(rho[i] * s.energy(i));
  return sum.value();
}

template <typename Scalar>
Scalar state_entropy(const DiagonalState<Scalar>& rho) {
  detail::CompensatedSum<Scalar> sum;
  for (Index i = 0; i < rho.size(); ++i) sum.add(-detail::xlogx(rho[i]));
  return sum.value();
}

template <typename Scalar>
Scalar state_energy(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st) {
  detail::CompensatedSum<Scalar> sum;
  for (Index l = 0; l < ls.size(); ++l) {
    sum.add(std::exp(st.log_populations[l] + ls.log_multiplicity[l]) * ls.energies[l]);
  }
  return sum.value();
}

template <typename Scalar>
Scalar state_entropy(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st) {
  detail::CompensatedSum<Scalar> sum;
  for (Index l = 0; l < ls.size(); ++l) {
    const Scalar lp = st.log_populations[l];
    if (std::isinf(static_cast<double>(lp))) continue;
    sum.add(-std::exp(lp + ls.log_multiplicity[l]) * lp);
  }
  return sum.value();
}

// Expands a level state onto every index of a materialized spectrum.
template <typename Scalar>
DiagonalState<Scalar> expand(const Spectrum<Scalar>& s, const LevelState<Scalar>& st) {
  if (st.log_populations.size() != s.level_count()) throw InvalidInput("level state: size mismatch");
  VectorX<Scalar> lw(s.d());
  for (Index i = 0; i < s.d(); ++i) lw[i] = st.log_populations[s.level_of(i)];
  return DiagonalState<Scalar>::from_log_weights(lw);
}

template <typename Scalar>
struct LevelExtrema {
  Scalar min;
  Scalar max;
  Scalar mean;
};

template <typename Scalar>
std::vector<LevelExtrema<Scalar>> level_extrema(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  require_aligned(s, rho);
  std::vector<LevelExtrema<Scalar>> out;
  out.reserve(s.levels().size());
  for (const auto& lv : s.levels()) {
    LevelExtrema<Scalar> e{rho[lv.first], rho[lv.first], 0};
    detail::CompensatedSum<Scalar> sum;
    for (Index i = lv.first; i < lv.first + lv.multiplicity; ++i) {
      e.min = std::min(e.min, rho[i]);
      e.max = std::max(e.max, rho[i]);
      sum.add(rho[i]);
    }
    e.mean = sum.value() / static_cast<Scalar>(lv.multiplicity);
    out.push_back(e);
  }
  return out;
}

struct OccupationVector {
  std::vector<int> counts;
  int order() const { return std::accumulate(counts.begin(), counts.end(), 0); }
  friend bool operator==(const OccupationVector&, const OccupationVector&) = default;
};

// C(N+d-1, d-1), saturating at UINT64_MAX.
std::uint64_t occupation_count(int d, int N);

// All compositions of N into d parts, one per row, starting at (N,0,...,0)
// and ending at (0,...,0,N).
OccupationTable occupation_table(int d, int N, std::size_t cap = kDefaultOccupationCap);

std::vector<OccupationVector> enumerate_occupations(int d, int N, std::size_t cap = kDefaultOccupationCap);

// N! / prod n_i!
double multinomial(const int* counts, int d);

}  // namespace npassive

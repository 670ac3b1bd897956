#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "npassive/gibbs.hpp"
#include "npassive/passivity.hpp"
#include "npassive/spectra.hpp"

namespace npassive {

template <typename Scalar>
struct FlattenResult {
  DiagonalState<Scalar> flattened;
  Scalar delta_S;   // S(flattened) - S(rho)
  Scalar delta_S0;  // ground-level share of delta_S
};

namespace detail {

// sum over one level of lambda (ln lambda - ln mean); a relative entropy, so
// only rounding can push it below zero.
template <typename Scalar>
Scalar level_gap(const DiagonalState<Scalar>& rho, const Level<Scalar>& lv, Scalar mean) {
  if (lv.multiplicity == 1 || !(mean > Scalar(0))) return Scalar(0);
  CompensatedSum<Scalar> sum;
  const Scalar log_mean = std::log(mean);
  for (Index i = lv.first; i < lv.first + lv.multiplicity; ++i) {
    if (rho[i] > Scalar(0)) sum.add(rho[i] * (std::log(rho[i]) - log_mean));
  }
  return std::max(Scalar(0), sum.value());
}

}  // namespace detail

// Replaces the populations of every degenerate level by their mean.
template <typename Scalar>
FlattenResult<Scalar> flatten(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  const auto ex = level_extrema(s, rho);
  VectorX<Scalar> bar(s.d());
  detail::CompensatedSum<Scalar> gap;
  Scalar gap0 = 0;
  for (std::size_t l = 0; l < ex.size(); ++l) {
    const Level<Scalar>& lv = s.levels()[l];
    for (Index i = lv.first; i < lv.first + lv.multiplicity; ++i) bar[i] = ex[l].mean;
    const Scalar g = detail::level_gap(rho, lv, ex[l].mean);
    gap.add(g);
    if (l == 0) gap0 = g;
  }
  return FlattenResult<Scalar>{DiagonalState<Scalar>::make(std::move(bar), Scalar(1e-9)), gap.value(), gap0};
}

enum class Majorization { Strict, Weak, None };

inline const char* to_string(Majorization m) {
  switch (m) {
    case Majorization::Strict: return "strict";
    case Majorization::Weak: return "weak";
    case Majorization::None: return "none";
  }
  return "?";
}

// Does P majorize Q? Strict when P is not a rearrangement of Q.
template <typename Scalar>
Majorization majorizes(const VectorX<Scalar>& P, const VectorX<Scalar>& Q, Scalar tol = Scalar(1e-12)) {
  if (P.size() != Q.size()) throw InvalidInput("majorizes: length mismatch");
  DiagonalState<Scalar>::make(P);
  DiagonalState<Scalar>::make(Q);
  std::vector<Scalar> p(P.data(), P.data() + P.size());
  std::vector<Scalar> q(Q.data(), Q.data() + Q.size());
  std::sort(p.begin(), p.end(), std::greater<>());
  std::sort(q.begin(), q.end(), std::greater<>());
  Scalar sp = 0;
  Scalar sq = 0;
  bool strict = false;
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    sp += p[k];
    sq += q[k];
    if (sp < sq - tol) return Majorization::None;
    if (sp > sq + tol) strict = true;
  }
  return strict ? Majorization::Strict : Majorization::Weak;
}

namespace detail {

template <typename Scalar>
bool below_inverse_z(Scalar lam, Scalar log_z) {
  return lam == Scalar(0) || std::log(lam) + log_z < -Scalar(1e-12);
}

template <typename Scalar>
Scalar ground_min(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  Scalar m = rho[0];
  for (Index i = 1; i < s.d0(); ++i) m = std::min(m, rho[i]);
  return m;
}

}  // namespace detail

template <typename Scalar>
struct CrossingWitness {
  Index b;
  Index c;
  Scalar eps_b;
  Scalar eps_c;
};

// Indices 0 < eps_b < eps_c where rho sits above the isoentropic Gibbs
// populations at b and at or below them at c.
template <typename Scalar>
std::optional<CrossingWitness<Scalar>> gibbs_crossing_witness(const Spectrum<Scalar>& s,
                                                              const DiagonalState<Scalar>& rho) {
  require_aligned(s, rho);
  const GibbsPoint<Scalar> g = isoentropic_energy(s, rho);
  if (!detail::below_inverse_z(detail::ground_min(s, rho), g.log_z)) {
    throw HypothesisViolation("gibbs_crossing_witness: needs lambda_min(0) < 1/Z");
  }
  const VectorX<Scalar> hat = gibbs_populations(s, g.beta);
  for (Index b = s.d0(); b < s.d(); ++b) {
    if (rho[b] < hat[b]) continue;
    for (Index c = b + 1; c < s.d(); ++c) {
      if (s.energy(c) > s.energy(b) && rho[c] <= hat[c]) {
        return CrossingWitness<Scalar>{b, c, s.energy(b), s.energy(c)};
      }
    }
  }
  return std::nullopt;
}

// Entropy-gap bound for the general spectrum.
template <typename Scalar>
Scalar delta_S_bound_general(Scalar beta, Scalar energy, Scalar e_beta, Scalar log_z, Scalar eps_max, Index d0, int N) {
  const Scalar n1 = static_cast<Scalar>(N - 1);
  const Scalar ground = static_cast<Scalar>(d0 - 1) * std::exp(-log_z) * eps_max * std::exp(beta * eps_max / n1);
  const Scalar bracket = energy + e_beta + ground;
  return beta / n1 * bracket + Scalar(1) / n1;
}

// Two distinct levels: no E_beta term and no 1/(N-1) term.
template <typename Scalar>
Scalar delta_S_bound_two_level(Scalar beta, Scalar energy, Scalar log_z, Scalar eps_max, Index d0, int N) {
  const Scalar n1 = static_cast<Scalar>(N - 1);
  const Scalar ground = static_cast<Scalar>(d0 - 1) * std::exp(-log_z) * eps_max * std::exp(beta * eps_max / n1);
  return beta / n1 * (energy + ground);
}

template <typename Scalar>
struct DeltaSBound {
  Scalar bound;
  bool two_level;
  Scalar beta;
  Scalar log_z;
};

// Checks the hypothesis (N >= 2, N-passive, S >= ln d0, lambda_min(0) < 1/Z)
// and evaluates the applicable bound.
template <typename Scalar>
DeltaSBound<Scalar> delta_S_bound(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N,
                                  const PassivityOptions<Scalar>& opt = {}) {
  require_aligned(s, rho);
  if (N < 2) throw HypothesisViolation("delta_S_bound: needs N >= 2");
  if (!is_n_passive(s, rho, N, opt).passive) {
    throw HypothesisViolation("delta_S_bound: state is not " + std::to_string(N) + "-passive");
  }
  GibbsPoint<Scalar> g{};
  try {
    g = isoentropic_energy(s, rho);
  } catch (const NoGibbsCounterpart&) {
    throw HypothesisViolation("delta_S_bound: entropy below ln d0");
  }
  if (!detail::below_inverse_z(detail::ground_min(s, rho), g.log_z)) {
    throw HypothesisViolation("delta_S_bound: lambda_min(0) >= 1/Z");
  }
  const Scalar e = state_energy(s, rho);
  const bool two = s.level_count() == 2;
  const Scalar b = two ? delta_S_bound_two_level(g.beta, e, g.log_z, s.eps_max(), s.d0(), N)
                       : delta_S_bound_general(g.beta, e, g.energy, g.log_z, s.eps_max(), s.d0(), N);
  return DeltaSBound<Scalar>{b, two, g.beta, g.log_z};
}

// Intermediate inequalities behind the entropy-gap bound, as predicates for
// property tests. Each takes beta and ln Z of the isoentropic Gibbs state.
namespace lemmas {

// Same-level pairs at eps > 0:
// ln lambda_j - ln lambda_i < -(ln Z + ln lambda_j) / (N - 1).
template <typename Scalar>
bool excited_pair_spread(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N, Scalar log_z,
                         Scalar tol = Scalar(1e-12)) {
  const Scalar n1 = static_cast<Scalar>(N - 1);
  const auto ex = level_extrema(s, rho);
  for (std::size_t l = 1; l < ex.size(); ++l) {
    const Level<Scalar>& lv = s.levels()[l];
    if (lv.multiplicity < 2) continue;
    for (Index j = lv.first; j < lv.first + lv.multiplicity; ++j) {
      if (rho[j] == Scalar(0)) continue;
      const Scalar lj = std::log(rho[j]);
      if (ex[l].min == Scalar(0)) return false;
      if (!(lj - std::log(ex[l].min) < -(log_z + lj) / n1 + tol)) return false;
    }
  }
  return true;
}

// Some excited index a with lambda_a >= lambda_hat_a and a ground log-spread
// below beta eps_a / (N - 1); returns eps_a.
template <typename Scalar>
std::optional<Scalar> ground_spread_witness(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N,
                                            Scalar beta, Scalar tol = Scalar(1e-12)) {
  const Scalar n1 = static_cast<Scalar>(N - 1);
  const VectorX<Scalar> hat = gibbs_populations(s, beta);
  const auto ex = level_extrema(s, rho);
  if (ex[0].min == Scalar(0)) return std::nullopt;
  const Scalar spread = std::log(ex[0].max) - std::log(ex[0].min);
  for (Index a = s.d0(); a < s.d(); ++a) {
    if (rho[a] >= hat[a] && spread < beta * s.energy(a) / n1 + tol) return s.energy(a);
  }
  return std::nullopt;
}

// Per excited level: with lambda_max > lambda_hat the level gap is below
// sum lambda beta eps / (N - 1); otherwise below d lambda_hat (beta eps + 1) / (N - 1).
template <typename Scalar>
bool excited_level_gaps(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N, Scalar beta,
                        Scalar log_z, Scalar tol = Scalar(1e-12)) {
  const Scalar n1 = static_cast<Scalar>(N - 1);
  const auto ex = level_extrema(s, rho);
  for (std::size_t l = 1; l < ex.size(); ++l) {
    const Level<Scalar>& lv = s.levels()[l];
    const Scalar eps = lv.energy;
    const Scalar hat = std::exp(-beta * eps - log_z);
    const Scalar gap = detail::level_gap(rho, lv, ex[l].mean);
    const Scalar dl = static_cast<Scalar>(lv.multiplicity);
    const Scalar rhs = ex[l].max > hat ? dl * ex[l].mean * beta * eps / n1 : dl * hat * (beta * eps + Scalar(1)) / n1;
    if (!(gap <= rhs + tol)) return false;
  }
  return true;
}

// Ground-level gap below (d0 - 1) Z^{-1} e^{beta eps_max / (N - 1)} beta eps_max / (N - 1).
template <typename Scalar>
bool ground_level_gap(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N, Scalar beta, Scalar log_z,
                      Scalar tol = Scalar(1e-12)) {
  const Scalar n1 = static_cast<Scalar>(N - 1);
  const auto ex = level_extrema(s, rho);
  const Scalar gap = detail::level_gap(rho, s.levels()[0], ex[0].mean);
  const Scalar em = s.eps_max();
  const Scalar rhs =
      static_cast<Scalar>(s.d0() - 1) * std::exp(-log_z + beta * em / n1) * beta * em / n1;
  return gap <= rhs + tol;
}

}  // namespace lemmas

}  // namespace npassive

#pragma once

#include <cmath>
#include <limits>

#include "npassive/spectra.hpp"

namespace npassive {

inline constexpr double kDefaultEntropyTolerance = 1e-12;

template <typename Scalar>
struct GibbsPoint {
  Scalar beta;  // >= 0, may be +inf
  Scalar log_z;
  Scalar energy;
  Scalar entropy;
};

// Entropy measured from whichever end of [ln d0, ln d] is closer, so that
// states near either end keep full relative precision.
enum class EntropyReference { Ground, Uniform };

template <typename Scalar>
struct EntropyOffset {
  EntropyReference reference;
  Scalar value;  // S - ln d0 (Ground) or ln d - S (Uniform)
};

template <typename Scalar>
Scalar inf_beta() {
  return std::numeric_limits<Scalar>::infinity();
}

template <typename Scalar>
GibbsPoint<Scalar> gibbs_point(const LevelSpectrum<Scalar>& ls, Scalar beta) {
  if (!(beta >= Scalar(0))) throw InvalidInput("gibbs: beta must be >= 0");
  if (std::isinf(static_cast<double>(beta))) {
    return GibbsPoint<Scalar>{beta, ls.log_d0(), Scalar(0), ls.log_d0()};
  }
  VectorX<Scalar> t = ls.log_multiplicity - beta * ls.energies;
  const Scalar log_z = detail::log_sum_exp(t);
  detail::CompensatedSum<Scalar> e;
  for (Index l = 1; l < ls.size(); ++l) e.add(ls.energies[l] * std::exp(t[l] - log_z));
  const Scalar energy = e.value();
  return GibbsPoint<Scalar>{beta, log_z, energy, beta * energy + log_z};
}

template <typename Scalar>
GibbsPoint<Scalar> gibbs_point(const Spectrum<Scalar>& s, Scalar beta) {
  return gibbs_point(s.level_view(), beta);
}

// lambda_hat_j = exp(-beta eps_j) / Z per index.
template <typename Scalar>
VectorX<Scalar> gibbs_populations(const Spectrum<Scalar>& s, Scalar beta) {
  const GibbsPoint<Scalar> g = gibbs_point(s, beta);
  VectorX<Scalar> p(s.d());
  const bool frozen = std::isinf(static_cast<double>(beta));
  for (Index i = 0; i < s.d(); ++i) {
    if (frozen) {
      p[i] = s.level_of(i) == 0 ? Scalar(1) / static_cast<Scalar>(s.d0()) : Scalar(0);
    } else {
      p[i] = std::exp(-beta * s.energy(i) - g.log_z);
    }
  }
  return p;
}

template <typename Scalar>
LevelState<Scalar> gibbs_level_state(const LevelSpectrum<Scalar>& ls, Scalar beta) {
  if (std::isinf(static_cast<double>(beta))) {
    VectorX<Scalar> lp = VectorX<Scalar>::Constant(ls.size(), detail::neg_inf<Scalar>());
    lp[0] = -ls.log_d0();
    return LevelState<Scalar>{lp};
  }
  return LevelState<Scalar>::from_log_weights(ls, VectorX<Scalar>(-beta * ls.energies));
}

namespace detail {

// Offset of S_beta in the requested reference.
template <typename Scalar>
Scalar gibbs_entropy_offset(const LevelSpectrum<Scalar>& ls, Scalar beta, EntropyReference ref) {
  const Scalar log_d = ls.log_d();
  const Scalar span = log_d - ls.log_d0();
  if (std::isinf(static_cast<double>(beta))) return ref == EntropyReference::Ground ? Scalar(0) : span;
  if (beta == Scalar(0)) return ref == EntropyReference::Ground ? span : Scalar(0);
  const GibbsPoint<Scalar> g = gibbs_point(ls, beta);
  if (ref == EntropyReference::Ground) {
    // ln(Z/d0) = log1p(sum_{l>0} d_l e^{-beta eps_l} / d0)
    Scalar rest = 0;
    for (Index l = 1; l < ls.size(); ++l) rest += std::exp(ls.log_multiplicity[l] - ls.log_d0() - beta * ls.energies[l]);
    return beta * g.energy + std::log1p(rest);
  }
  // ln(Z/d) = log1p(sum_l (d_l/d) expm1(-beta eps_l)) while Z/d stays near 1.
  Scalar acc = 0;
  for (Index l = 0; l < ls.size(); ++l) {
    acc += std::exp(ls.log_multiplicity[l] - log_d) * std::expm1(-beta * ls.energies[l]);
  }
  const Scalar log_z_over_d = acc > Scalar(-0.5) ? std::log1p(acc) : g.log_z - log_d;
  return -beta * g.energy - log_z_over_d;
}

template <typename Scalar>
EntropyReference closer_reference(const LevelSpectrum<Scalar>& ls, Scalar entropy) {
  return entropy - ls.log_d0() <= ls.log_d() - entropy ? EntropyReference::Ground : EntropyReference::Uniform;
}

}  // namespace detail

template <typename Scalar>
EntropyOffset<Scalar> entropy_offset(const LevelSpectrum<Scalar>& ls, Scalar entropy) {
  const EntropyReference ref = detail::closer_reference(ls, entropy);
  return {ref, ref == EntropyReference::Ground ? entropy - ls.log_d0() : ls.log_d() - entropy};
}

template <typename Scalar>
EntropyOffset<Scalar> entropy_offset(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  require_aligned(s, rho);
  const LevelSpectrum<Scalar> ls = s.level_view();
  const EntropyReference ref = detail::closer_reference(ls, state_entropy(rho));
  const Scalar c = static_cast<Scalar>(ref == EntropyReference::Ground ? s.d0() : s.d());
  detail::CompensatedSum<Scalar> sum;
  for (Index i = 0; i < rho.size(); ++i) {
    if (rho[i] > Scalar(0)) sum.add(rho[i] * detail::log_scaled(c, rho[i]));
  }
  // sum = sum lambda ln(c lambda) = ln c - S
  return {ref, ref == EntropyReference::Ground ? -sum.value() : sum.value()};
}

namespace detail {

template <typename Scalar>
Scalar state_entropy_offset(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st, EntropyReference ref) {
  const Scalar log_c = ref == EntropyReference::Ground ? ls.log_d0() : ls.log_d();
  CompensatedSum<Scalar> sum;
  for (Index l = 0; l < ls.size(); ++l) {
    const Scalar lp = st.log_populations[l];
    if (std::isinf(static_cast<double>(lp))) continue;
    sum.add(std::exp(lp + ls.log_multiplicity[l]) * (log_c + lp));
  }
  return ref == EntropyReference::Ground ? -sum.value() : sum.value();
}

}  // namespace detail

template <typename Scalar>
EntropyOffset<Scalar> entropy_offset(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st) {
  const EntropyReference ref = detail::closer_reference(ls, state_entropy(ls, st));
  return {ref, detail::state_entropy_offset(ls, st, ref)};
}

// Bisection on beta for the given entropy offset. The bracket [0, hi] doubles
// until it straddles the target; once every excited Boltzmann factor underflows
// the answer is +inf. Iterates until the bracket cannot be split further.
template <typename Scalar>
Scalar solve_beta_for_offset(const LevelSpectrum<Scalar>& ls, EntropyOffset<Scalar> target,
                             Scalar tol = Scalar(kDefaultEntropyTolerance)) {
  const Scalar span = ls.log_d() - ls.log_d0();
  if (ls.size() == 1) {
    if (std::abs(target.value) > tol) throw InvalidInput("gibbs: entropy target outside [ln d0, ln d]");
    return Scalar(0);
  }
  const bool ground = target.reference == EntropyReference::Ground;
  const Scalar v = target.value;
  if (v < -tol || v > span + tol) {
    const bool below_d0 = ground ? v < -tol : v > span + tol;
    if (below_d0) throw NoGibbsCounterpart("gibbs: entropy below ln d0 has no Gibbs counterpart");
    throw InvalidInput("gibbs: entropy above ln d");
  }
  if (ground ? v <= Scalar(0) : v >= span) return inf_beta<Scalar>();
  if (ground ? v >= span : v <= Scalar(0)) return Scalar(0);

  // true while beta is still too small (entropy above target)
  auto above = [&](Scalar beta) {
    const Scalar f = detail::gibbs_entropy_offset(ls, beta, target.reference);
    return ground ? f > v : f < v;
  };
  Scalar cap = 0;
  for (Index l = 1; l < ls.size(); ++l) {
    cap = std::max(cap, (ls.log_multiplicity[l] - ls.log_d0() + Scalar(760)) / ls.energies[l]);
  }
  Scalar lo = 0;
  Scalar hi = Scalar(1) / ls.first_gap();
  hi = std::min(hi, cap);
  while (above(hi)) {
    if (hi >= cap) return inf_beta<Scalar>();
    lo = hi;
    hi = std::min(hi * 2, cap);
  }
  for (int it = 0; it < 4000; ++it) {
    const Scalar mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    (above(mid) ? lo : hi) = mid;
  }
  return lo + (hi - lo) / 2;
}

template <typename Scalar>
Scalar solve_beta_for_entropy(const LevelSpectrum<Scalar>& ls, Scalar entropy_target,
                              Scalar tol = Scalar(kDefaultEntropyTolerance)) {
  return solve_beta_for_offset(ls, entropy_offset(ls, entropy_target), tol);
}

template <typename Scalar>
Scalar solve_beta_for_entropy(const Spectrum<Scalar>& s, Scalar entropy_target,
                              Scalar tol = Scalar(kDefaultEntropyTolerance)) {
  return solve_beta_for_entropy(s.level_view(), entropy_target, tol);
}

// Gibbs state with the entropy of rho; its energy is E_{beta(rho)}.
template <typename Scalar>
GibbsPoint<Scalar> isoentropic_energy(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho,
                                      Scalar tol = Scalar(kDefaultEntropyTolerance)) {
  const LevelSpectrum<Scalar> ls = s.level_view();
  return gibbs_point(ls, solve_beta_for_offset(ls, entropy_offset(s, rho), tol));
}

template <typename Scalar>
GibbsPoint<Scalar> isoentropic_energy(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st,
                                      Scalar tol = Scalar(kDefaultEntropyTolerance)) {
  return gibbs_point(ls, solve_beta_for_offset(ls, entropy_offset(ls, st), tol));
}

}  // namespace npassive

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "npassive/gibbs.hpp"
#include "npassive/passivity.hpp"
#include "npassive/spectra.hpp"

namespace npassive {

enum class Regime {
  TwoLevelEquality,
  Exponential,
  Inverse,
  MinOfBoth,
  AsymptoticGeneral,
  AsymptoticNonDegGround,
  AsymptoticTwoLevel,
  LowEntropy,
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::TwoLevelEquality: return "TwoLevelEquality";
    case Regime::Exponential: return "Exponential";
    case Regime::Inverse: return "Inverse";
    case Regime::MinOfBoth: return "MinOfBoth";
    case Regime::AsymptoticGeneral: return "AsymptoticGeneral";
    case Regime::AsymptoticNonDegGround: return "AsymptoticNonDegGround";
    case Regime::AsymptoticTwoLevel: return "AsymptoticTwoLevel";
    case Regime::LowEntropy: return "LowEntropy";
  }
  return "?";
}

// R(H): 0 for at most two distinct levels, else the largest
// (eps_max - eps_a) / (eps_b - eps_a) over distinct levels eps_b > eps_a.
// The maximum sits at consecutive levels.
template <typename Scalar>
Scalar spectral_ratio(const LevelSpectrum<Scalar>& ls) {
  if (ls.size() <= 2) return Scalar(0);
  const Scalar top = ls.eps_max();
  Scalar r = 0;
  for (Index a = 0; a + 1 < ls.size(); ++a) {
    r = std::max(r, (top - ls.energies[a]) / (ls.energies[a + 1] - ls.energies[a]));
  }
  return r;
}

template <typename Scalar>
Scalar spectral_ratio(const Spectrum<Scalar>& s) {
  return spectral_ratio(s.level_view());
}

template <typename Scalar>
Scalar alpha_max(int N, Scalar R) {
  if (!(static_cast<Scalar>(N) > R)) {
    throw VacuousBound("alpha_max: N <= R, the inverse bound is vacuous");
  }
  return static_cast<Scalar>(N) / (static_cast<Scalar>(N) - R);
}

// Multiplies E_beta.
template <typename Scalar>
Scalar exponential_factor(Scalar beta, Scalar eps_max, Scalar R, int N) {
  if (R == Scalar(0)) return Scalar(1);
  return std::exp(beta * eps_max * R / static_cast<Scalar>(N));
}

template <typename Scalar>
Scalar inverse_factor(Scalar R, int N) {
  return alpha_max(N, R);
}

// e^{b x} <= 1/(1-x) with x = R/N and b = beta eps_max, i.e. b x <= -ln(1-x).
template <typename Scalar>
bool exponential_is_tighter(Scalar beta_eps_max, Scalar R, int N) {
  const Scalar x = R / static_cast<Scalar>(N);
  if (x >= Scalar(1)) return true;
  return beta_eps_max * x <= -std::log1p(-x);
}

template <typename Scalar>
Scalar exponential_bound(Scalar e_beta, Scalar beta, Scalar eps_max, Scalar R, int N) {
  if (e_beta == Scalar(0)) return Scalar(0);
  return e_beta * exponential_factor(beta, eps_max, R, N);
}

template <typename Scalar>
Scalar inverse_bound(Scalar e_beta, Scalar R, int N) {
  return e_beta * inverse_factor(R, N);
}

// Degenerate non-structurally-stable states, leading order in 1/N.
template <typename Scalar>
Scalar asymptotic_general_bound(Scalar e_beta, Scalar beta, Scalar log_z, Scalar eps_max, Scalar R, int N, Index d0) {
  if (N < 3) return std::numeric_limits<Scalar>::infinity();
  if (beta == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar n = static_cast<Scalar>(N);
  const Scalar u = std::min(Scalar(1), beta * eps_max);
  const Scalar inv_beta = std::isinf(static_cast<double>(beta)) ? Scalar(0) : Scalar(1) / beta;
  const Scalar ground = static_cast<Scalar>(d0 - 1) * std::exp(-log_z) * eps_max;
  return n / (n - 2) * (Scalar(1) + u * R / n) * e_beta + (inv_beta + ground) / (n - 2);
}

template <typename Scalar>
Scalar asymptotic_two_level_bound(Scalar e_beta, Scalar log_z, Scalar eps_max, int N, Index d0) {
  if (N < 3) return std::numeric_limits<Scalar>::infinity();
  const Scalar n = static_cast<Scalar>(N);
  return (n - 1) / (n - 2) * e_beta + static_cast<Scalar>(d0 - 1) * std::exp(-log_z) * eps_max / (n - 2);
}

// S < ln d0: no isoentropic Gibbs state exists.
template <typename Scalar>
Scalar low_entropy_bound(Scalar entropy, Scalar eps_max, Index d, Index d0, int N) {
  if (N < 2) return std::numeric_limits<Scalar>::infinity();
  const Scalar n = static_cast<Scalar>(N);
  return eps_max * static_cast<Scalar>(d - d0) *
         std::exp(-n * std::log(static_cast<Scalar>(d0)) + (n - 1) * entropy);
}

template <typename Scalar>
struct BoundInputs {
  int N = 0;
  Scalar beta_rho = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar R = 0;
  Scalar eps_max = 0;
  Index d0 = 0;
  Scalar u_rho = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar u_rho_bar = std::numeric_limits<Scalar>::quiet_NaN();  // for the flattened state
};

template <typename Scalar>
struct BoundReport {
  Regime regime = Regime::Exponential;
  Scalar bound_value = 0;
  Scalar slack = 0;
  bool asymptotic = false;
  BoundInputs<Scalar> inputs;
  Scalar energy = 0;
  Scalar gibbs_energy = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar log_z = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar alpha = std::numeric_limits<Scalar>::quiet_NaN();
  std::optional<Scalar> alpha_max;
  Scalar delta_S = 0;  // S(rho_bar) - S(rho), enters the asymptotic rows at first order
  std::string note;
};

template <typename Scalar>
struct BoundOptions {
  Scalar slack_tol = Scalar(1e-9);
  // Asymptotic rows drop an O(1/N^2) remainder; check_bound only treats their
  // violation as a falsification from this N on.
  int asymptotic_check_min_n = 8;
};

namespace detail {

template <typename Scalar>
struct BoundContext {
  Scalar energy;
  Scalar entropy;
  Scalar R;
  bool stable;
  bool low_entropy;
  GibbsPoint<Scalar> gibbs{};
  Scalar ground_min = 0;
};

template <typename Scalar>
Scalar u_of(Scalar beta, Scalar eps_max) {
  if (std::isnan(static_cast<double>(beta))) return beta;
  return std::min(Scalar(1), beta * eps_max);
}

template <typename Scalar>
BoundContext<Scalar> bound_context(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho) {
  BoundContext<Scalar> c{state_energy(s, rho), state_entropy(rho), spectral_ratio(s), false, false};
  c.stable = bool(is_k_structurally_stable(s, rho, 1));
  const EntropyOffset<Scalar> off = entropy_offset(s, rho);
  c.low_entropy = off.reference == EntropyReference::Ground && off.value < -Scalar(kDefaultEntropyTolerance);
  if (!c.low_entropy) c.gibbs = isoentropic_energy(s, rho);
  c.ground_min = rho[0];
  for (Index i = 0; i < s.d0(); ++i) c.ground_min = std::min(c.ground_min, rho[i]);
  return c;
}

template <typename Scalar>
BoundReport<Scalar> make_report(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N,
                                const BoundContext<Scalar>& c, Regime regime) {
  BoundReport<Scalar> r;
  r.regime = regime;
  r.energy = c.energy;
  r.inputs.N = N;
  r.inputs.R = c.R;
  r.inputs.eps_max = s.eps_max();
  r.inputs.d0 = s.d0();
  if (static_cast<Scalar>(N) > c.R) r.alpha_max = alpha_max(N, c.R);
  if (!c.low_entropy) {
    const Scalar beta = c.gibbs.beta;
    r.inputs.beta_rho = beta;
    r.inputs.u_rho = u_of(beta, s.eps_max());
    r.gibbs_energy = c.gibbs.energy;
    r.log_z = c.gibbs.log_z;
    r.alpha = c.gibbs.energy > Scalar(0) ? c.energy / c.gibbs.energy
                                         : (c.energy == Scalar(0) ? Scalar(1) : std::numeric_limits<Scalar>::infinity());
    // flattened state: level means
    VectorX<Scalar> bar(s.d());
    const auto ex = level_extrema(s, rho);
    for (Index i = 0; i < s.d(); ++i) bar[i] = ex[static_cast<std::size_t>(s.level_of(i))].mean;
    const DiagonalState<Scalar> flat = DiagonalState<Scalar>::from_weights(bar);
    r.inputs.u_rho_bar = u_of(isoentropic_energy(s, flat).beta, s.eps_max());
    detail::CompensatedSum<Scalar> gap;
    for (Index i = 0; i < s.d(); ++i) {
      if (rho[i] > Scalar(0)) gap.add(rho[i] * (std::log(rho[i]) - std::log(bar[i])));
    }
    r.delta_S = gap.value();
  }
  const Scalar eb = c.gibbs.energy;
  const Scalar beta = c.gibbs.beta;
  const Scalar em = s.eps_max();
  switch (regime) {
    case Regime::TwoLevelEquality:
      r.bound_value = eb;
      break;
    case Regime::Exponential:
      r.bound_value = exponential_bound(eb, beta, em, c.R, N);
      break;
    case Regime::Inverse:
      r.bound_value = inverse_bound(eb, c.R, N);
      break;
    case Regime::MinOfBoth:
      r.bound_value = std::min(exponential_bound(eb, beta, em, c.R, N), inverse_bound(eb, c.R, N));
      break;
    case Regime::AsymptoticGeneral:
    case Regime::AsymptoticNonDegGround:
      r.asymptotic = true;
      r.bound_value = asymptotic_general_bound(eb, beta, c.gibbs.log_z, em, c.R, N, s.d0());
      break;
    case Regime::AsymptoticTwoLevel:
      r.asymptotic = true;
      r.bound_value = asymptotic_two_level_bound(eb, c.gibbs.log_z, em, N, s.d0());
      break;
    case Regime::LowEntropy:
      r.bound_value = low_entropy_bound(c.entropy, em, s.d(), s.d0(), N);
      break;
  }
  if (r.asymptotic && N < 3) r.note = "asymptotic row needs N >= 3; reported as unbounded";
  if (r.asymptotic && r.delta_S >= Scalar(0.1)) r.note = "first-order entropy conversion used with delta_S >= 0.1";
  if (regime == Regime::LowEntropy && N < 2) r.note = "low-entropy row needs N >= 2; reported as unbounded";
  r.slack = r.bound_value - c.energy;
  return r;
}

template <typename Scalar>
Regime select_regime(const Spectrum<Scalar>& s, int N, const BoundContext<Scalar>& c) {
  if (c.low_entropy) return Regime::LowEntropy;
  if (s.level_count() <= 2 && (s.d() <= 2 || c.stable)) return Regime::TwoLevelEquality;
  // lambda_min(0) >= 1/Z
  const bool cond00 = std::log(c.ground_min) >= -c.gibbs.log_z - Scalar(1e-12);
  if (s.level_count() == 2) return cond00 ? Regime::TwoLevelEquality : Regime::AsymptoticTwoLevel;
  if (c.stable) return static_cast<Scalar>(N) > c.R ? Regime::MinOfBoth : Regime::Exponential;
  if (cond00) return Regime::Exponential;
  return s.d0() == 1 ? Regime::AsymptoticNonDegGround : Regime::AsymptoticGeneral;
}

}  // namespace detail

// The caller vouches for N-passivity; structural stability and entropy class
// are read off the state.
template <typename Scalar>
BoundReport<Scalar> bound_report(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N) {
  require_aligned(s, rho);
  if (N < 1) throw InvalidInput("bounds: N must be >= 1");
  const auto c = detail::bound_context(s, rho);
  return detail::make_report(s, rho, N, c, detail::select_regime(s, N, c));
}

// Every row that applies to the state, the selected one first.
template <typename Scalar>
std::vector<BoundReport<Scalar>> bound_table(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N) {
  require_aligned(s, rho);
  if (N < 1) throw InvalidInput("bounds: N must be >= 1");
  const auto c = detail::bound_context(s, rho);
  const Regime main = detail::select_regime(s, N, c);
  std::vector<BoundReport<Scalar>> rows{detail::make_report(s, rho, N, c, main)};
  if (main == Regime::MinOfBoth) {
    rows.push_back(detail::make_report(s, rho, N, c, Regime::Exponential));
    rows.push_back(detail::make_report(s, rho, N, c, Regime::Inverse));
  }
  return rows;
}

template <typename Scalar>
Scalar check_bound(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N,
                   const BoundOptions<Scalar>& opt = {}) {
  const PassivityVerdict v = is_n_passive(s, rho, N);
  if (!v.passive) throw HypothesisViolation("check_bound: state is not " + std::to_string(N) + "-passive");
  const BoundReport<Scalar> r = bound_report(s, rho, N);
  const bool enforce = !r.asymptotic || N >= opt.asymptotic_check_min_n;
  if (enforce && r.slack < -opt.slack_tol) {
    throw BoundFalsified(std::string("check_bound: regime ") + to_string(r.regime) + " violated, slack " +
                         std::to_string(static_cast<double>(r.slack)));
  }
  return r.slack;
}

}  // namespace npassive

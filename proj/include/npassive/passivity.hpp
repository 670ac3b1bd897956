#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "npassive/gibbs.hpp"
#include "npassive/spectra.hpp"

namespace npassive {

inline constexpr double kDefaultLogTolerance = 1e-9;
inline constexpr double kDefaultEnergyTieRelTolerance = 1e-12;
inline constexpr double kDefaultCpTolerance = 1e-8;

// I has the larger energy sum and (wrongly) the larger product weight, or, for
// structural stability, I and J share the energy but not the weight.
struct WitnessPair {
  OccupationVector higher;
  OccupationVector lower;
};

struct PassivityVerdict {
  bool passive = true;
  std::optional<WitnessPair> witness;
  double energy_tol = 0;  // energy gap below which two sums count as tied
  explicit operator bool() const { return passive; }
};

struct StabilityVerdict {
  bool stable = true;
  std::optional<WitnessPair> witness;
  double energy_tol = 0;
  explicit operator bool() const { return stable; }
};

template <typename Scalar>
struct PassivityOptions {
  Scalar tol = Scalar(kDefaultLogTolerance);  // log-space
  Scalar energy_tol = Scalar(-1);             // < 0: 1e-12 * N * eps_max
  std::size_t cap = kDefaultOccupationCap;
};

namespace detail {

template <typename Scalar>
Scalar resolve_energy_tol(const PassivityOptions<Scalar>& opt, int N, Scalar eps_max) {
  if (opt.energy_tol >= Scalar(0)) return opt.energy_tol;
  return Scalar(kDefaultEnergyTieRelTolerance) * static_cast<Scalar>(N) * eps_max;
}

template <typename Scalar>
struct OccupationData {
  OccupationTable table;
  VectorX<Scalar> energy;      // sum n_i eps_i
  VectorX<Scalar> log_weight;  // sum n_i ln lambda_i, zero counts skipped
};

template <typename Scalar>
OccupationData<Scalar> occupation_data(const VectorX<Scalar>& energies, const VectorX<Scalar>& log_pop, int N,
                                       std::size_t cap) {
  const int d = static_cast<int>(energies.size());
  OccupationData<Scalar> out{occupation_table(d, N, cap), {}, {}};
  const Index M = out.table.rows();
  out.energy.resize(M);
  out.log_weight.resize(M);
  for (Index r = 0; r < M; ++r) {
    Scalar e = 0;
    Scalar w = 0;
    for (int j = 0; j < d; ++j) {
      const int n = out.table(r, j);
      if (n == 0) continue;
      e += static_cast<Scalar>(n) * energies[j];
      w += static_cast<Scalar>(n) * log_pop[j];
    }
    out.energy[r] = e;
    out.log_weight[r] = w;
  }
  return out;
}

inline OccupationVector row_vector(const OccupationTable& t, Index r) {
  return OccupationVector{std::vector<int>(t.row(r).data(), t.row(r).data() + t.cols())};
}

template <typename Scalar>
std::vector<Index> order_by_energy(const VectorX<Scalar>& energy) {
  std::vector<Index> order(static_cast<std::size_t>(energy.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return energy[a] < energy[b]; });
  return order;
}

// Core pair check over arbitrary "sites" (indices or distinct levels).
template <typename Scalar>
PassivityVerdict n_passivity_check(const VectorX<Scalar>& energies, const VectorX<Scalar>& log_pop, int N,
                                   const PassivityOptions<Scalar>& opt, Scalar eps_max) {
  if (N < 1) throw InvalidInput("passivity: N must be >= 1");
  const Scalar etol = resolve_energy_tol(opt, N, eps_max);
  const OccupationData<Scalar> data = occupation_data(energies, log_pop, N, opt.cap);
  const Index M = data.table.rows();
  const std::vector<Index> order = order_by_energy(data.energy);

  // A vector I violates iff its log-weight exceeds the minimum log-weight over
  // all vectors with energy below E_I - etol.
  Index first_violator = M;
  Scalar running_min = std::numeric_limits<Scalar>::infinity();
  std::size_t q = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Index I = order[k];
    while (q < order.size() && data.energy[order[q]] < data.energy[I] - etol) {
      running_min = std::min(running_min, data.log_weight[order[q]]);
      ++q;
    }
    if (data.log_weight[I] > running_min + opt.tol) first_violator = std::min(first_violator, I);
  }
  PassivityVerdict v;
  v.energy_tol = static_cast<double>(etol);
  if (first_violator == M) return v;
  v.passive = false;
  for (Index J = 0; J < M; ++J) {
    if (data.energy[J] < data.energy[first_violator] - etol &&
        data.log_weight[first_violator] > data.log_weight[J] + opt.tol) {
      v.witness = WitnessPair{row_vector(data.table, first_violator), row_vector(data.table, J)};
      break;
    }
  }
  return v;
}

template <typename Scalar>
StabilityVerdict stability_check(const VectorX<Scalar>& energies, const VectorX<Scalar>& log_pop, int k,
                                 const PassivityOptions<Scalar>& opt, Scalar eps_max) {
  if (k < 1) throw InvalidInput("structural stability: k must be >= 1");
  const Scalar etol = resolve_energy_tol(opt, k, eps_max);
  const OccupationData<Scalar> data = occupation_data(energies, log_pop, k, opt.cap);
  const std::vector<Index> order = order_by_energy(data.energy);
  StabilityVerdict v;
  v.energy_tol = static_cast<double>(etol);
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && data.energy[order[end]] - data.energy[order[end - 1]] <= etol) ++end;
    Index hi = order[start];
    Index lo = order[start];
    for (std::size_t j = start; j < end; ++j) {
      const Index r = order[j];
      if (data.log_weight[r] > data.log_weight[hi]) hi = r;
      if (data.log_weight[r] < data.log_weight[lo]) lo = r;
    }
    const Scalar wh = data.log_weight[hi];
    const Scalar wl = data.log_weight[lo];
    const bool mixed_zero = std::isinf(static_cast<double>(wl)) && !std::isinf(static_cast<double>(wh));
    if (mixed_zero || (!std::isinf(static_cast<double>(wl)) && wh - wl > opt.tol)) {
      v.stable = false;
      v.witness = WitnessPair{row_vector(data.table, hi), row_vector(data.table, lo)};
      return v;
    }
    start = end;
  }
  return v;
}

}  // namespace detail

// No population inversion: eps_i > eps_j implies lambda_i <= lambda_j + tol.
template <typename Scalar>
PassivityVerdict is_passive_1(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho,
                              Scalar tol = Scalar(1e-12)) {
  require_aligned(s, rho);
  const int d = static_cast<int>(s.d());
  PassivityVerdict v;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (s.energy(i) > s.energy(j) && rho[i] > rho[j] + tol) {
        v.passive = false;
        WitnessPair w{OccupationVector{std::vector<int>(static_cast<std::size_t>(d), 0)},
                      OccupationVector{std::vector<int>(static_cast<std::size_t>(d), 0)}};
        w.higher.counts[static_cast<std::size_t>(i)] = 1;
        w.lower.counts[static_cast<std::size_t>(j)] = 1;
        v.witness = std::move(w);
        return v;
      }
    }
  }
  return v;
}

template <typename Scalar>
PassivityVerdict is_n_passive(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N,
                              const PassivityOptions<Scalar>& opt = {}) {
  require_aligned(s, rho);
  return detail::n_passivity_check(s.energies(), rho.log_populations(), N, opt, s.eps_max());
}

// For a level-resolved (hence 1-structurally-stable) state, N-passivity only
// depends on one representative per level.
template <typename Scalar>
PassivityVerdict is_n_passive(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st, int N,
                              const PassivityOptions<Scalar>& opt = {}) {
  return detail::n_passivity_check(ls.energies, st.log_populations, N, opt, ls.eps_max());
}

template <typename Scalar>
StabilityVerdict is_k_structurally_stable(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int k,
                                          const PassivityOptions<Scalar>& opt = {}) {
  require_aligned(s, rho);
  return detail::stability_check(s.energies(), rho.log_populations(), k, opt, s.eps_max());
}

template <typename Scalar>
StabilityVerdict is_k_structurally_stable(const LevelSpectrum<Scalar>& ls, const LevelState<Scalar>& st, int k,
                                          const PassivityOptions<Scalar>& opt = {}) {
  return detail::stability_check(ls.energies, st.log_populations, k, opt, ls.eps_max());
}

namespace detail {

// Positions of populations sorted non-increasing, ties kept in index order.
template <typename Scalar>
std::vector<Index> descending_order(const VectorX<Scalar>& p) {
  std::vector<Index> order(static_cast<std::size_t>(p.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p[a] > p[b]; });
  return order;
}

}  // namespace detail

template <typename Scalar>
DiagonalState<Scalar> passive_rearrangement(const Spectrum<Scalar>& s, const VectorX<Scalar>& populations) {
  const DiagonalState<Scalar> rho = DiagonalState<Scalar>::make(populations);
  require_aligned(s, rho);
  const std::vector<Index> order = detail::descending_order(populations);
  VectorX<Scalar> out(populations.size());
  for (Index k = 0; k < out.size(); ++k) out[k] = populations[order[static_cast<std::size_t>(k)]];
  return DiagonalState<Scalar>::make(out);
}

template <typename Scalar>
Scalar ergotropy_1(const Spectrum<Scalar>& s, const VectorX<Scalar>& populations) {
  const DiagonalState<Scalar> rho = DiagonalState<Scalar>::make(populations);
  require_aligned(s, rho);
  const std::vector<Index> order = detail::descending_order(populations);
  detail::CompensatedSum<Scalar> sum;
  for (Index k = 0; k < s.d(); ++k) {
    const Index from = order[static_cast<std::size_t>(k)];
    sum.add(populations[from] * (s.energy(from) - s.energy(k)));
  }
  return sum.value();
}

// overlap(j, j') = |<phi_j|eps_j'>|^2 for eigenvectors phi_j of rho with
// eigenvalue populations[j]; energies need not be sorted.
template <typename Scalar>
Scalar ergotropy_general(const VectorX<Scalar>& populations, const VectorX<Scalar>& energies,
                         const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& overlap) {
  const Index d = populations.size();
  if (energies.size() != d || overlap.rows() != d || overlap.cols() != d) {
    throw InvalidInput("ergotropy_general: dimension mismatch");
  }
  DiagonalState<Scalar>::make(populations);
  const Scalar tol = Scalar(1e-10);
  if ((overlap.array() < -tol).any() || ((overlap.rowwise().sum().array() - 1).abs() > tol).any() ||
      ((overlap.colwise().sum().array() - 1).abs() > tol).any()) {
    throw InvalidInput("ergotropy_general: overlap matrix is not doubly stochastic");
  }
  // Passive energy pairs sorted populations with sorted energies.
  std::vector<Index> eorder(static_cast<std::size_t>(d));
  std::iota(eorder.begin(), eorder.end(), Index{0});
  std::stable_sort(eorder.begin(), eorder.end(), [&](Index a, Index b) { return energies[a] < energies[b]; });
  const std::vector<Index> porder = detail::descending_order(populations);
  detail::CompensatedSum<Scalar> sum;
  for (Index j = 0; j < d; ++j) {
    for (Index jp = 0; jp < d; ++jp) sum.add(populations[j] * overlap(j, jp) * energies[jp]);
  }
  for (Index k = 0; k < d; ++k) {
    sum.add(-populations[porder[static_cast<std::size_t>(k)]] * energies[eorder[static_cast<std::size_t>(k)]]);
  }
  return sum.value();
}

// Ergotropy of rho^{(x)N} under the summed Hamiltonian. Each occupation vector
// stands for multinomial-many equal eigenvalues; the passive counterpart pairs
// eigenvalue blocks (descending) with energy blocks (ascending) by count.
template <typename Scalar>
Scalar n_ergotropy(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho, int N,
                   std::size_t cap = kDefaultOccupationCap) {
  require_aligned(s, rho);
  if (N < 1) throw InvalidInput("n_ergotropy: N must be >= 1");
  const auto data = detail::occupation_data(s.energies(), rho.log_populations(), N, cap);
  const Index M = data.table.rows();
  const int d = static_cast<int>(s.d());
  std::vector<double> count(static_cast<std::size_t>(M));
  VectorX<Scalar> weight(M);
  for (Index r = 0; r < M; ++r) {
    count[static_cast<std::size_t>(r)] = multinomial(data.table.row(r).data(), d);
    weight[r] = std::exp(data.log_weight[r]);
  }
  std::vector<Index> by_weight(static_cast<std::size_t>(M));
  std::iota(by_weight.begin(), by_weight.end(), Index{0});
  std::stable_sort(by_weight.begin(), by_weight.end(), [&](Index a, Index b) {
    if (weight[a] != weight[b]) return weight[a] > weight[b];
    return data.energy[a] < data.energy[b];
  });
  const std::vector<Index> by_energy = detail::order_by_energy(data.energy);

  detail::CompensatedSum<Scalar> sum;
  std::size_t i = 0;
  std::size_t j = 0;
  double left_i = count[static_cast<std::size_t>(by_weight[0])];
  double left_j = count[static_cast<std::size_t>(by_energy[0])];
  while (i < by_weight.size() && j < by_energy.size()) {
    const double take = std::min(left_i, left_j);
    const Index a = by_weight[i];
    const Index b = by_energy[j];
    if (weight[a] > Scalar(0)) sum.add(static_cast<Scalar>(take) * weight[a] * (data.energy[a] - data.energy[b]));
    left_i -= take;
    left_j -= take;
    if (left_i <= 0 && ++i < by_weight.size()) left_i = count[static_cast<std::size_t>(by_weight[i])];
    if (left_j <= 0 && ++j < by_energy.size()) left_j = count[static_cast<std::size_t>(by_energy[j])];
  }
  return sum.value();
}

enum class CPTag { Gibbs, GroundState, NotCP };

template <typename Scalar>
struct CPClass {
  CPTag tag = CPTag::NotCP;
  Scalar beta = 0;  // meaningful for Gibbs; may be +inf
  Scalar fit_residual = 0;
};

// Least-squares fit of -ln lambda_i = beta eps_i + ln Z over the support.
template <typename Scalar>
CPClass<Scalar> classify_complete_passivity(const Spectrum<Scalar>& s, const DiagonalState<Scalar>& rho,
                                            Scalar tol = Scalar(kDefaultCpTolerance)) {
  require_aligned(s, rho);
  const Index d = s.d();
  Index support = 0;
  bool ground_only = true;
  for (Index i = 0; i < d; ++i) {
    if (rho[i] > Scalar(0)) {
      ++support;
      if (s.level_of(i) != 0) ground_only = false;
    }
  }
  CPClass<Scalar> out;
  if (ground_only) {
    const Index d0 = s.d0();
    Scalar lo = rho[0];
    Scalar hi = rho[0];
    for (Index i = 0; i < d0; ++i) {
      lo = std::min(lo, rho[i]);
      hi = std::max(hi, rho[i]);
    }
    const bool uniform = support == d0 && std::log(hi) - std::log(lo) <= tol;
    out.tag = uniform ? CPTag::Gibbs : CPTag::GroundState;
    out.beta = s.level_count() == 1 ? Scalar(0) : inf_beta<Scalar>();
    out.fit_residual = uniform ? std::log(hi) - std::log(lo) : Scalar(0);
    return out;
  }
  if (support < d) {
    out.tag = CPTag::NotCP;
    out.fit_residual = std::numeric_limits<Scalar>::infinity();
    return out;
  }
  const VectorX<Scalar> y = -rho.log_populations();
  const Scalar ebar = s.energies().mean();
  const Scalar ybar = y.mean();
  detail::CompensatedSum<Scalar> sxy;
  detail::CompensatedSum<Scalar> sxx;
  for (Index i = 0; i < d; ++i) {
    const Scalar dx = s.energy(i) - ebar;
    sxy.add(dx * (y[i] - ybar));
    sxx.add(dx * dx);
  }
  const Scalar beta = sxy.value() / sxx.value();
  Scalar residual = 0;
  for (Index i = 0; i < d; ++i) {
    residual = std::max(residual, std::abs((y[i] - ybar) - beta * (s.energy(i) - ebar)));
  }
  out.fit_residual = residual;
  out.beta = beta;
  if (residual <= tol && beta >= -tol) {
    out.tag = CPTag::Gibbs;
    out.beta = std::max(beta, Scalar(0));
  }
  return out;
}

template <typename Scalar>
struct Envelope {
  Scalar lower;
  Scalar upper;
};

// Range of lambda_b allowed by the order-N inequalities that pair the middle
// level of a non-degenerate triple against its outer levels.
template <typename Scalar>
Envelope<Scalar> prep1_envelope(int N, Scalar eps_a, Scalar eps_b, Scalar eps_c, Scalar lam_a, Scalar lam_c) {
  if (N < 1) throw InvalidInput("prep1_envelope: N must be >= 1");
  if (!(eps_a < eps_b && eps_b < eps_c)) throw InvalidInput("prep1_envelope: need eps_a < eps_b < eps_c");
  if (!(lam_a >= lam_c && lam_c > Scalar(0))) throw InvalidInput("prep1_envelope: need lam_a >= lam_c > 0");
  const Scalar t = (eps_b - eps_a) / (eps_c - eps_a);
  Scalar tn = t * static_cast<Scalar>(N);
  const Scalar nearest = std::round(tn);
  if (std::abs(tn - nearest) <= Scalar(1e-12) * static_cast<Scalar>(N)) tn = nearest;
  const int m = static_cast<int>(std::ceil(tn)) - 1;  // m/N < t <= (m+1)/N
  const int mp = static_cast<int>(std::floor(tn));    // m'/N <= t < (m'+1)/N
  auto interp = [&](int k) {
    const Scalar x = static_cast<Scalar>(k) / static_cast<Scalar>(N);
    return std::exp(x * std::log(lam_c) + (Scalar(1) - x) * std::log(lam_a));
  };
  return Envelope<Scalar>{interp(mp + 1), interp(m)};
}

}  // namespace npassive

#include "unit/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oracle {

std::vector<ProductLevel> product_basis(const std::vector<double>& energies, const std::vector<double>& pops, int N) {
  const int d = static_cast<int>(energies.size());
  std::vector<int> idx(static_cast<std::size_t>(N), 0);
  std::vector<ProductLevel> out;
  while (true) {
    double e = 0;
    double lw = 0;
    double w = 1;
    for (int i : idx) {
      e += energies[static_cast<std::size_t>(i)];
      const double p = pops[static_cast<std::size_t>(i)];
      lw += p > 0 ? std::log(p) : -std::numeric_limits<double>::infinity();
      w *= p;
    }
    out.push_back({e, lw, w});
    int pos = N - 1;
    while (pos >= 0 && ++idx[static_cast<std::size_t>(pos)] == d) idx[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
  }
  return out;
}

bool n_passive(const std::vector<double>& energies, const std::vector<double>& pops, int N, double tol, double etol) {
  const auto basis = product_basis(energies, pops, N);
  for (const auto& I : basis) {
    for (const auto& J : basis) {
      if (I.energy > J.energy + etol && I.log_weight > J.log_weight + tol) return false;
    }
  }
  return true;
}

double n_ergotropy(const std::vector<double>& energies, const std::vector<double>& pops, int N) {
  const auto basis = product_basis(energies, pops, N);
  std::vector<double> w;
  std::vector<double> e;
  double actual = 0;
  for (const auto& b : basis) {
    w.push_back(b.weight);
    e.push_back(b.energy);
    actual += b.weight * b.energy;
  }
  std::sort(w.begin(), w.end(), std::greater<>());
  std::sort(e.begin(), e.end());
  double passive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) passive += w[i] * e[i];
  return actual - passive;
}

double permutation_ergotropy(const std::vector<double>& energies, const std::vector<double>& pops) {
  std::vector<std::size_t> perm(pops.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double e = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) e += pops[perm[i]] * energies[i];
    best = std::min(best, e);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return energy(energies, pops) - best;
}

bool k_stable(const std::vector<double>& energies, const std::vector<double>& pops, int k, double tol, double etol) {
  const auto basis = product_basis(energies, pops, k);
  for (const auto& I : basis) {
    for (const auto& J : basis) {
      if (std::abs(I.energy - J.energy) > etol) continue;
      const bool inf_i = std::isinf(I.log_weight);
      const bool inf_j = std::isinf(J.log_weight);
      if (inf_i != inf_j) return false;
      if (!inf_i && std::abs(I.log_weight - J.log_weight) > tol) return false;
    }
  }
  return true;
}

double entropy(const std::vector<double>& pops) {
  double s = 0;
  for (double p : pops) {
    if (p > 0) s -= p * std::log(p);
  }
  return s;
}

double energy(const std::vector<double>& energies, const std::vector<double>& pops) {
  double e = 0;
  for (std::size_t i = 0; i < pops.size(); ++i) e += pops[i] * energies[i];
  return e;
}

std::vector<double> gibbs(const std::vector<double>& energies, double beta) {
  std::vector<double> w;
  double z = 0;
  for (double e : energies) {
    w.push_back(std::exp(-beta * e));
    z += w.back();
  }
  for (double& x : w) x /= z;
  return w;
}

std::pair<double, double> farey_neighbors(int N, double t) {
  double below = 0;
  double above = 1;
  for (int k = 1; k <= N; ++k) {
    for (int j = 0; j <= k; ++j) {
      const double f = static_cast<double>(j) / k;
      if (f < t - 1e-15) below = std::max(below, f);
      if (f > t + 1e-15) above = std::min(above, f);
    }
  }
  return {below, above};
}

Interval farey_interval(int N, double ea, double eb, double ec, double la, double lc) {
  const double t = (eb - ea) / (ec - ea);
  const auto [below, above] = farey_neighbors(N, t);
  auto interp = [&](double x) { return std::pow(lc, x) * std::pow(la, 1 - x); };
  return {interp(above), interp(below)};
}

std::optional<std::pair<long long, long long>> best_fraction(double x, long long max_den, double tol) {
  for (long long q = 1; q <= max_den; ++q) {
    const long long p = std::llround(x * static_cast<double>(q));
    if (std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <= tol) return std::make_pair(p, q);
  }
  return std::nullopt;
}

std::vector<double> random_state(std::mt19937_64& rng, int d, double zero_prob) {
  std::exponential_distribution<double> ex(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(d));
  double sum = 0;
  for (double& x : p) {
    x = u(rng) < zero_prob ? 0.0 : ex(rng);
    sum += x;
  }
  if (sum == 0) {
    p[0] = 1;
    sum = 1;
  }
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace oracle

#pragma once

// Reference computations that share no code with the library: they expand
// the full d^N product basis or try every permutation.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

struct ProductLevel {
  double energy;
  double log_weight;
  double weight;
};

// All d^N product eigenvalues of rho^{(x)N} with their summed energies.
std::vector<ProductLevel> product_basis(const std::vector<double>& energies, const std::vector<double>& pops, int N);

// Pairwise check over the product basis: higher energy (by more than etol)
// must not carry a larger log-weight (by more than tol).
bool n_passive(const std::vector<double>& energies, const std::vector<double>& pops, int N, double tol = 1e-9,
               double etol = 1e-12);

// sum_i p_i E_i minus the sorted pairing, over the explicit product basis.
double n_ergotropy(const std::vector<double>& energies, const std::vector<double>& pops, int N);

// E(rho) minus the minimum over every permutation of the populations.
double permutation_ergotropy(const std::vector<double>& energies, const std::vector<double>& pops);

// Equal-energy product levels must carry equal log-weights.
bool k_stable(const std::vector<double>& energies, const std::vector<double>& pops, int k, double tol = 1e-9,
              double etol = 1e-12);

double entropy(const std::vector<double>& pops);
double energy(const std::vector<double>& energies, const std::vector<double>& pops);

// Gibbs populations by direct exponentiation (no shifting).
std::vector<double> gibbs(const std::vector<double>& energies, double beta);

// Feasible lambda_b range for a non-degenerate triple at order N, from the
// closest fractions j/k (k <= N) on either side of t = (eb-ea)/(ec-ea).
struct Interval {
  double lower;
  double upper;
};
Interval farey_interval(int N, double ea, double eb, double ec, double la, double lc);

// Largest and smallest fractions j/k with k <= N strictly below / above t.
std::pair<double, double> farey_neighbors(int N, double t);

// Continued fraction by exhaustive search: smallest q <= max_den with
// |x - round(q x)/q| <= tol.
std::optional<std::pair<long long, long long>> best_fraction(double x, long long max_den, double tol);

// Random probability vector with occasional exact zeros.
std::vector<double> random_state(std::mt19937_64& rng, int d, double zero_prob = 0.0);

}  // namespace oracle

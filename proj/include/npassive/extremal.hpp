#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "npassive/spectra.hpp"

namespace npassive {

struct SamplerOptions {
  double box = 30.0;      // |b_i| <= box for the free log-populations
  int burn_in = 0;        // 0: 100 steps per site
  int thinning = 0;       // 0: 10 + 2 steps per site
  double scale_min = 0.02;  // each draw is rescaled by a log-uniform factor
  double scale_max = 1.0;
  std::size_t cap = kDefaultOccupationCap;
};

namespace detail {

// Rows a = I - J over sites for every pair with E_I > E_J + energy_tol, each
// divided by the gcd of its entries, deduplicated. The N-passive log-populations
// b = -ln lambda form the cone { b : a . b >= 0 for every row }.
Eigen::MatrixXd passivity_cone_rows(const Eigen::VectorXd& site_energies, int N, double energy_tol,
                                    std::size_t cap = kDefaultOccupationCap);

// Hit-and-run inside the cone intersected with a box, gauge b_0 = 0.
std::vector<Eigen::VectorXd> cone_walk(const Eigen::VectorXd& site_energies, int N, int count, std::uint64_t seed,
                                       const SamplerOptions& opt);

}  // namespace detail

// Seeded draws of N-passive states. With stable = true every distinct level
// carries one population (1-structurally stable draws).
std::vector<DiagonalStated> sample_n_passive(const Spectrumd& s, int N, int count, std::uint64_t seed, bool stable,
                                             const SamplerOptions& opt = {});

std::vector<LevelStated> sample_n_passive_levels(const LevelSpectrumd& ls, int N, int count, std::uint64_t seed,
                                                 const SamplerOptions& opt = {});

enum class ScanMethod { Grid, Walk };

struct ScanOptions {
  ScanMethod method = ScanMethod::Grid;
  int resolution = 200;  // grid points (Grid) or sampled directions (Walk)
  std::optional<std::uint64_t> seed;  // required by Walk
  SamplerOptions sampler;
};

struct AlphaScanRow {
  double beta_rho;
  double alpha;  // E / E_beta
  double energy;
  double gibbs_energy;
  double bound_inverse;      // N / (N - R), +inf when N <= R
  double bound_exponential;  // exp(beta eps_max R / N)
  LevelStated state;
};

// Most energetic 1-structurally-stable N-passive state at the entropy of each
// Gibbs state in beta_grid.
std::vector<AlphaScanRow> max_alpha_scan(const LevelSpectrumd& ls, int N, const std::vector<double>& beta_grid,
                                         const ScanOptions& opt = {});

struct SaturationOptions {
  double eta = 1.0;
  double k0 = 10.0;
  double safety = 1.5;     // factor on the smallest admissible beta eps_1
  int max_doublings = 40;  // beta eps_1 doubles until the target alpha is met
};

struct SaturationParams {
  int N = 0;
  int m = 0;
  double r = 0;          // eps_2 / eps_1, equal to R(H)
  double beta_eps1 = 0;  // design value of beta(rho) eps_1
  double log_g1 = 0;
  double log_g2 = 0;
  double log_xi = 0;
  double eta = 1;
  double k0 = 10;
  double kappa = 0;       // lambda_2 = (eta xi)^kappa up to normalization
  double alpha_star = 0;  // design ratio
};

struct SaturationCheck {
  std::string name;
  bool holds;
  double lhs;
  double rhs;
};

struct SaturationResult {
  bool feasible = false;
  std::string report;  // names the violated inequality when infeasible
  SaturationParams params;
  std::optional<LevelSpectrumd> spectrum;
  std::optional<LevelStated> state;
  double alpha_max = 0;
  double alpha_limit = 0;  // kappa / r, the supremum reachable with this r
  double alpha_measured = 0;
  double alpha_pred = 0;
  double beta_eps1_measured = 0;
  bool n_passive = false;
  std::vector<SaturationCheck> checks;
};

// Solves 1/alpha = r - ln(g2/g1)/x - ln(r alpha)/x by fixed-point iteration.
double saturation_alpha_fixed_point(double r, double log_g2_over_g1, double beta_eps1, double alpha0);

// Smallest p/q > r with p <= N: the steepest exponent lambda_2 = lambda_1^kappa
// allows at order N on the spectrum (0, 1, r).
double saturation_kappa(int N, double r);

SaturationResult saturation_construct(int N, int m, double alpha_target_frac, const SaturationOptions& opt = {});

}  // namespace npassive

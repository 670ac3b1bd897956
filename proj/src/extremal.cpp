#include "npassive/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "npassive/bounds.hpp"
#include "npassive/gibbs.hpp"
#include "npassive/passivity.hpp"

namespace npassive {

namespace detail {

Eigen::MatrixXd passivity_cone_rows(const Eigen::VectorXd& site_energies, int N, double energy_tol, std::size_t cap) {
  const int L = static_cast<int>(site_energies.size());
  const OccupationTable table = occupation_table(L, N, cap);
  const Index M = table.rows();
  if (static_cast<double>(M) * static_cast<double>(M) > 1e8) {
    throw SizeGuardError("cone rows: " + std::to_string(M) + " occupation vectors give too many pairs");
  }
  Eigen::VectorXd energy(M);
  for (Index r = 0; r < M; ++r) {
    double e = 0;
    for (int j = 0; j < L; ++j) e += table(r, j) * site_energies[j];
    energy[r] = e;
  }
  std::set<std::vector<int>> rows;
  std::vector<int> a(static_cast<std::size_t>(L));
  for (Index i = 0; i < M; ++i) {
    for (Index j = 0; j < M; ++j) {
      if (!(energy[i] > energy[j] + energy_tol)) continue;
      int g = 0;
      for (int k = 0; k < L; ++k) {
        a[static_cast<std::size_t>(k)] = table(i, k) - table(j, k);
        g = std::gcd(g, a[static_cast<std::size_t>(k)]);
      }
      for (int& v : a) v /= g;
      rows.insert(a);
    }
  }
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), L);
  Index r = 0;
  for (const auto& row : rows) {
    for (int k = 0; k < L; ++k) out(r, k) = row[static_cast<std::size_t>(k)];
    ++r;
  }
  return out;
}

std::vector<Eigen::VectorXd> cone_walk(const Eigen::VectorXd& site_energies, int N, int count, std::uint64_t seed,
                                       const SamplerOptions& opt) {
  const Index L = site_energies.size();
  const double eps_max = site_energies.maxCoeff();
  if (L < 2 || !(eps_max > 0)) throw InvalidInput("sampler: spectrum needs at least two distinct levels");
  if (count < 0) throw InvalidInput("sampler: count must be >= 0");
  const double etol = kDefaultEnergyTieRelTolerance * N * eps_max;
  const Eigen::MatrixXd A = passivity_cone_rows(site_energies, N, etol, opt.cap);
  const double B = opt.box;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // A Gibbs point halfway into the box satisfies every row strictly.
  Eigen::VectorXd b = (B / (2 * eps_max)) * site_energies;
  Eigen::VectorXd Ab = A * b;
  Eigen::VectorXd u(L);

  auto step = [&]() {
    u[0] = 0;
    for (Index i = 1; i < L; ++i) u[i] = gauss(rng);
    const double norm = u.norm();
    if (!(norm > 0)) return;
    u /= norm;
    const Eigen::VectorXd Au = A * u;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < A.rows(); ++k) {
      if (Au[k] > 0) {
        lo = std::max(lo, -Ab[k] / Au[k]);
      } else if (Au[k] < 0) {
        hi = std::min(hi, -Ab[k] / Au[k]);
      }
    }
    for (Index i = 1; i < L; ++i) {
      if (u[i] > 0) {
        lo = std::max(lo, (-B - b[i]) / u[i]);
        hi = std::min(hi, (B - b[i]) / u[i]);
      } else if (u[i] < 0) {
        lo = std::max(lo, (B - b[i]) / u[i]);
        hi = std::min(hi, (-B - b[i]) / u[i]);
      }
    }
    const double t = unit(rng);
    if (!(lo < hi)) return;
    const double s = lo + t * (hi - lo);
    b += s * u;
    Ab += s * Au;
  };

  const int burn = opt.burn_in > 0 ? opt.burn_in : static_cast<int>(100 * L);
  const int thin = opt.thinning > 0 ? opt.thinning : static_cast<int>(10 + 2 * L);
  for (int i = 0; i < burn; ++i) step();

  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  const double lmin = std::log(opt.scale_min);
  const double lmax = std::log(opt.scale_max);
  for (int c = 0; c < count; ++c) {
    for (int i = 0; i < thin; ++i) step();
    const double scale = std::exp(lmin + unit(rng) * (lmax - lmin));
    out.push_back(scale * b);
  }
  return out;
}

}  // namespace detail

std::vector<DiagonalStated> sample_n_passive(const Spectrumd& s, int N, int count, std::uint64_t seed, bool stable,
                                             const SamplerOptions& opt) {
  if (N < 1) throw InvalidInput("sampler: N must be >= 1");
  if (s.level_count() < 2) throw InvalidInput("sampler: spectrum needs at least two distinct levels");
  std::vector<DiagonalStated> out;
  out.reserve(static_cast<std::size_t>(count));
  if (stable) {
    const LevelSpectrumd ls = s.level_view();
    for (const Eigen::VectorXd& b : detail::cone_walk(ls.energies, N, count, seed, opt)) {
      Eigen::VectorXd lw(s.d());
      for (Index i = 0; i < s.d(); ++i) lw[i] = -b[s.level_of(i)];
      out.push_back(DiagonalStated::from_log_weights(lw));
    }
  } else {
    for (const Eigen::VectorXd& b : detail::cone_walk(s.energies(), N, count, seed, opt)) {
      out.push_back(DiagonalStated::from_log_weights(Eigen::VectorXd(-b)));
    }
  }
  return out;
}

std::vector<LevelStated> sample_n_passive_levels(const LevelSpectrumd& ls, int N, int count, std::uint64_t seed,
                                                 const SamplerOptions& opt) {
  if (N < 1) throw InvalidInput("sampler: N must be >= 1");
  std::vector<LevelStated> out;
  out.reserve(static_cast<std::size_t>(count));
  for (const Eigen::VectorXd& b : detail::cone_walk(ls.energies, N, count, seed, opt)) {
    out.push_back(LevelStated::from_log_weights(ls, Eigen::VectorXd(-b)));
  }
  return out;
}

namespace {

// Along the ray b -> t b, the state exp(-t b) loses entropy as t grows. Finds
// the t whose entropy offset (in the given reference) equals target.
double solve_ray(const LevelSpectrumd& ls, const Eigen::VectorXd& b, EntropyOffset<double> target) {
  const bool ground = target.reference == EntropyReference::Ground;
  auto above = [&](double t) {
    const LevelStated st = LevelStated::from_log_weights(ls, Eigen::VectorXd(-t * b));
    const double f = detail::state_entropy_offset(ls, st, target.reference);
    return ground ? f > target.value : f < target.value;
  };
  const double bmax = b.maxCoeff();
  if (!(bmax > 0)) throw InvalidInput("scan: direction does not lower the entropy");
  double lo = 0;
  double hi = 1.0 / bmax;
  while (above(hi)) {
    lo = hi;
    hi *= 2;
    if (hi > 1e300) throw InvalidInput("scan: entropy target unreachable along direction");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + (hi - lo) / 2;
    if (!(mid > lo && mid < hi)) break;
    (above(mid) ? lo : hi) = mid;
  }
  return lo + (hi - lo) / 2;
}

struct RayPoint {
  double energy;
  LevelStated state;
};

RayPoint ray_point(const LevelSpectrumd& ls, const Eigen::VectorXd& b, EntropyOffset<double> target) {
  const double t = solve_ray(ls, b, target);
  LevelStated st = LevelStated::from_log_weights(ls, Eigen::VectorXd(-t * b));
  const double e = state_energy(ls, st);
  return RayPoint{e, std::move(st)};
}

EntropyOffset<double> gibbs_target(const LevelSpectrumd& ls, double beta) {
  const GibbsPoint<double> g = gibbs_point(ls, beta);
  const EntropyReference ref = detail::closer_reference(ls, g.entropy);
  return {ref, detail::gibbs_entropy_offset(ls, beta, ref)};
}

AlphaScanRow make_row(const LevelSpectrumd& ls, int N, double beta, RayPoint best) {
  const double R = spectral_ratio(ls);
  const GibbsPoint<double> g = gibbs_point(ls, beta);
  AlphaScanRow row{beta,
                   g.energy > 0 ? best.energy / g.energy : 1.0,
                   best.energy,
                   g.energy,
                   static_cast<double>(N) > R ? alpha_max(N, R) : std::numeric_limits<double>::infinity(),
                   exponential_factor(beta, ls.eps_max(), R, N),
                   std::move(best.state)};
  return row;
}

}  // namespace

std::vector<AlphaScanRow> max_alpha_scan(const LevelSpectrumd& ls, int N, const std::vector<double>& beta_grid,
                                         const ScanOptions& opt) {
  if (N < 1) throw InvalidInput("scan: N must be >= 1");
  if (ls.size() < 2) throw InvalidInput("scan: spectrum needs at least two distinct levels");
  if (opt.resolution < 2) throw InvalidInput("scan: resolution must be >= 2");
  for (double beta : beta_grid) {
    if (!(beta >= 0) || !std::isfinite(beta)) throw InvalidInput("scan: infeasible entropy target (beta must be finite and >= 0)");
  }
  std::vector<AlphaScanRow> rows;
  rows.reserve(beta_grid.size());

  auto at_beta_zero = [&](double beta) {
    const LevelStated st = gibbs_level_state(ls, 0.0);
    return make_row(ls, N, beta, RayPoint{state_energy(ls, st), st});
  };

  if (ls.size() == 2) {
    // One free log-population: the isoentropic state is the Gibbs state.
    for (double beta : beta_grid) {
      const LevelStated st = gibbs_level_state(ls, beta);
      rows.push_back(make_row(ls, N, beta, RayPoint{state_energy(ls, st), st}));
    }
    return rows;
  }

  if (opt.method == ScanMethod::Walk) {
    if (!opt.seed) throw InvalidInput("scan: the walk method needs a seed");
    const std::vector<LevelStated> draws = sample_n_passive_levels(ls, N, opt.resolution, *opt.seed, opt.sampler);
    std::vector<Eigen::VectorXd> dirs;
    dirs.reserve(draws.size());
    for (const LevelStated& d : draws) dirs.push_back(Eigen::VectorXd(d.log_populations[0] - d.log_populations.array()));
    for (double beta : beta_grid) {
      if (beta == 0) {
        rows.push_back(at_beta_zero(beta));
        continue;
      }
      const EntropyOffset<double> target = gibbs_target(ls, beta);
      std::optional<RayPoint> best;
      for (const Eigen::VectorXd& b : dirs) {
        RayPoint p = ray_point(ls, b, target);
        if (!best || p.energy > best->energy) best = std::move(p);
      }
      rows.push_back(make_row(ls, N, beta, std::move(*best)));
    }
    return rows;
  }

  if (ls.size() != 3) throw InvalidInput("scan: the grid method handles exactly three distinct levels");
  // Directions b = (0, sigma, 1); the cone rows bound sigma to an interval.
  const double etol = kDefaultEnergyTieRelTolerance * N * ls.eps_max();
  const Eigen::MatrixXd A = detail::passivity_cone_rows(ls.energies, N, etol);
  double sig_lo = 0;
  double sig_hi = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < A.rows(); ++k) {
    const double a1 = A(k, 1);
    const double a2 = A(k, 2);
    if (a1 > 0) {
      sig_lo = std::max(sig_lo, -a2 / a1);
    } else if (a1 < 0) {
      sig_hi = std::min(sig_hi, -a2 / a1);
    } else if (a2 < 0) {
      throw InvalidInput("scan: passivity cone is degenerate");
    }
  }
  if (!(sig_lo <= sig_hi) || !std::isfinite(sig_hi)) throw InvalidInput("scan: empty passivity cone");

  const int G = opt.resolution;
  for (double beta : beta_grid) {
    if (beta == 0) {
      rows.push_back(at_beta_zero(beta));
      continue;
    }
    const EntropyOffset<double> target = gibbs_target(ls, beta);
    auto eval = [&](double sigma) { return ray_point(ls, Eigen::Vector3d(0.0, sigma, 1.0), target); };
    std::vector<double> grid(static_cast<std::size_t>(G));
    int best_k = 0;
    std::optional<RayPoint> best;
    for (int k = 0; k < G; ++k) {
      grid[static_cast<std::size_t>(k)] = sig_lo + (sig_hi - sig_lo) * k / (G - 1);
      RayPoint p = eval(grid[static_cast<std::size_t>(k)]);
      if (!best || p.energy > best->energy) {
        best = std::move(p);
        best_k = k;
      }
    }
    // Golden-section refinement between the neighbors of the best grid point.
    double a = grid[static_cast<std::size_t>(std::max(0, best_k - 1))];
    double c = grid[static_cast<std::size_t>(std::min(G - 1, best_k + 1))];
    const double phi = (std::sqrt(5.0) - 1) / 2;
    double x1 = c - phi * (c - a);
    double x2 = a + phi * (c - a);
    RayPoint f1 = eval(x1);
    RayPoint f2 = eval(x2);
    for (int it = 0; it < 80 && c - a > 1e-15 * std::max(1.0, std::abs(c)); ++it) {
      if (f1.energy < f2.energy) {
        a = x1;
        x1 = x2;
        f1 = std::move(f2);
        x2 = a + phi * (c - a);
        f2 = eval(x2);
      } else {
        c = x2;
        x2 = x1;
        f2 = std::move(f1);
        x1 = c - phi * (c - a);
        f1 = eval(x1);
      }
    }
    for (RayPoint* p : {&f1, &f2}) {
      if (p->energy > best->energy) best = std::move(*p);
    }
    rows.push_back(make_row(ls, N, beta, std::move(*best)));
  }
  return rows;
}

double saturation_kappa(int N, double r) {
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= N; ++p) {
    const int q = static_cast<int>(std::ceil(p / r)) - 1;  // largest q with p/q > r
    if (q >= 1) best = std::min(best, static_cast<double>(p) / q);
  }
  return best;
}

double saturation_alpha_fixed_point(double r, double log_g2_over_g1, double beta_eps1, double alpha0) {
  double alpha = alpha0;
  for (int it = 0; it < 500; ++it) {
    const double inv = r - log_g2_over_g1 / beta_eps1 - std::log(r * alpha) / beta_eps1;
    if (!(inv > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double next = 1.0 / inv;
    if (std::abs(next - alpha) <= 1e-15 * next) return next;
    alpha = next;
  }
  return alpha;
}

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

SaturationResult saturation_construct(int N, int m, double frac, const SaturationOptions& opt) {
  if (N < 2) throw InvalidInput("saturation: N must be >= 2");
  if (m < 1 || m >= N) throw InvalidInput("saturation: need 1 <= m < N");
  if (!(frac >= 0 && frac <= 1)) throw InvalidInput("saturation: alpha_target_frac must lie in [0, 1]");
  if (!(opt.eta > 0 && opt.eta <= 1)) throw InvalidInput("saturation: eta must lie in (0, 1]");

  SaturationResult res;
  SaturationParams& P = res.params;
  P.N = N;
  P.m = m;
  P.eta = opt.eta;
  P.k0 = opt.k0;

  // r sits just above N/(m+1). kappa stays fixed on (N/(m+1), kappa0) and the
  // reachable ratio (kappa/r)(N - r)/N falls as r grows.
  const double r0 = static_cast<double>(N) / (m + 1);
  const double kappa0 = saturation_kappa(N, r0 * (1 + 1e-15));
  const double r_top = std::min(kappa0, static_cast<double>(N) / m);
  auto ratio = [&](double r) { return (kappa0 / r) * (N - r) / N; };
  const double sup = kappa0 * m / N;
  if (!(frac < sup)) {
    res.report = "window empty: alpha_limit/alpha_max = kappa/r * (N - r)/N stays below " + fmt(sup) +
                 " for m/N < 1/r <= (m+1)/N, so alpha >= " + fmt(frac) + " alpha_max is unreachable";
    return res;
  }
  const double want = frac + 0.75 * (sup - frac);
  double lo = r0;
  double hi = r_top;
  if (ratio(hi * (1 - 1e-12)) >= want) {
    lo = hi = r0 + 0.5 * (r_top - r0);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = lo + (hi - lo) / 2;
    (ratio(mid) > want ? lo : hi) = mid;
  }
  P.r = lo + (hi - lo) / 2;
  P.kappa = saturation_kappa(N, P.r);
  res.alpha_max = alpha_max(N, P.r);
  res.alpha_limit = P.kappa / P.r;
  const double target = frac * res.alpha_max;
  P.alpha_star = frac == 0 ? 1.0 : 0.5 * (target + res.alpha_limit);
  const double as = P.alpha_star;

  // xi << exp(-k0 (r - 1) x / (kappa - 1)) with ln xi = -x / alpha*.
  const double xi_cap = (P.kappa - 1) / (opt.k0 * (P.r - 1));
  if (frac > 0 && !(as <= xi_cap)) {
    res.report = "window empty: ln xi = -x/alpha* must lie below -k0 (r - 1) x / (kappa - 1), i.e. alpha* = " +
                 fmt(as) + " <= " + fmt(xi_cap);
    return res;
  }

  double x = 20 * std::max(1.0, std::log(P.r * res.alpha_max) * N / P.r);
  if (frac > 0) x = std::max(x, std::log(P.r * as) / (1 - 1 / as) * 1.01);
  x *= opt.safety;

  for (int attempt = 0; attempt <= opt.max_doublings; ++attempt, x *= 2) {
    P.beta_eps1 = x;
    P.log_g1 = 0;
    const Eigen::Vector3d energies(0.0, 1.0, P.r);
    LevelStated st;
    if (frac == 0) {
      // Any Gibbs state has alpha = 1.
      P.log_g2 = 0;
      P.log_xi = -x;
      res.spectrum = LevelSpectrumd::from_log_multiplicities(energies, Eigen::Vector3d(0.0, 0.0, 0.0));
      st = gibbs_level_state(*res.spectrum, x);
    } else {
      const double L = P.r - 1 / as - std::log(P.r * as) / x;
      P.log_g2 = x * L;
      P.log_xi = -x / as;
      res.spectrum = LevelSpectrumd::from_log_multiplicities(energies, Eigen::Vector3d(0.0, P.log_g1, P.log_g2));
      const double l2 = P.kappa * (std::log(opt.eta) + P.log_xi);
      st = LevelStated::from_log_weights(*res.spectrum, Eigen::Vector3d(0.0, P.log_xi, l2));
    }
    const LevelSpectrumd& ls = *res.spectrum;
    const GibbsPoint<double> g = isoentropic_energy(ls, st);
    res.beta_eps1_measured = g.beta;
    res.alpha_measured = state_energy(ls, st) / g.energy;
    res.alpha_pred =
        frac == 0 ? 1.0 : saturation_alpha_fixed_point(P.r, P.log_g2 - P.log_g1, g.beta, res.alpha_max);
    res.n_passive = is_n_passive(ls, st, N).passive;
    res.state = st;
    if (res.n_passive && res.alpha_measured >= target) break;
  }

  const double xm = res.beta_eps1_measured;
  const double lg = P.log_g2 - P.log_g1;
  res.checks = {
      {"m/N < 1/r", static_cast<double>(m) / N < 1 / P.r, static_cast<double>(m) / N, 1 / P.r},
      {"1/r <= (m+1)/N", 1 / P.r <= static_cast<double>(m + 1) / N, 1 / P.r, static_cast<double>(m + 1) / N},
      {"beta eps1 >= 20 max(1, (N/r) ln(r alpha_max))",
       xm >= 20 * std::max(1.0, std::log(P.r * res.alpha_max) * N / P.r), xm,
       20 * std::max(1.0, std::log(P.r * res.alpha_max) * N / P.r)},
      {"ln(g2/g1) > (r - 1) beta eps1", lg > (P.r - 1) * xm, lg, (P.r - 1) * xm},
      {"ln(g2/g1) < (1 - kappa) ln xi", lg < (1 - P.kappa) * P.log_xi, lg, (1 - P.kappa) * P.log_xi},
      {"ln xi <= -k0 (r - 1) beta eps1 / (kappa - 1)", P.log_xi <= -opt.k0 * (P.r - 1) * xm / (P.kappa - 1),
       P.log_xi, -opt.k0 * (P.r - 1) * xm / (P.kappa - 1)},
  };
  if (frac == 0) res.checks.resize(2);

  if (!res.n_passive) {
    res.report = "emitted state is not " + std::to_string(N) + "-passive";
  } else if (res.alpha_measured < target) {
    res.report = "measured alpha " + fmt(res.alpha_measured) + " stays below the target " + fmt(target);
  } else {
    for (const SaturationCheck& c : res.checks) {
      if (!c.holds) {
        res.report = "constraint violated: " + c.name;
        return res;
      }
    }
    res.feasible = true;
  }
  return res;
}

}  // namespace npassive

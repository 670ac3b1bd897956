#include <cmath>
#include <random>

#include <doctest.h>

#include "npassive/bounds.hpp"
#include "npassive/extremal.hpp"
#include "unit/helpers.hpp"
#include "unit/oracles.hpp"

using namespace npassive;
using testing::levels;
using testing::state;

TEST_SUITE("bounds") {
  TEST_CASE("spectral ratio") {
    CHECK(spectral_ratio(levels({0, 1, 1.9})) == doctest::Approx(1.9));
    CHECK(spectral_ratio(levels({0, 1})) == 0.0);
    CHECK(spectral_ratio(levels({0, 0, 1})) == 0.0);
    CHECK(spectral_ratio(levels({0, 1, 2, 3})) == doctest::Approx(3.0));
    // brute force over every pair of distinct levels
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int t = 0; t < 50; ++t) {
      std::vector<double> e{0, u(rng), u(rng), u(rng), u(rng)};
      std::sort(e.begin(), e.end());
      double best = 0;
      for (std::size_t a = 0; a < e.size(); ++a) {
        for (std::size_t b = a + 1; b < e.size(); ++b) best = std::max(best, (e.back() - e[a]) / (e[b] - e[a]));
      }
      CHECK(spectral_ratio(levels(e)) == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("alpha_max") {
    CHECK(alpha_max(5, 1.001) == doctest::Approx(1.25031).epsilon(1e-5));
    CHECK(alpha_max(2, 1.0) == doctest::Approx(2.0));
    CHECK_THROWS_AS(alpha_max(2, 2.0), VacuousBound);
  }

  TEST_CASE("regime for a 1-SS state on (0,1,1.9)") {
    const Spectrumd s = levels({0, 1, 1.9});
    const auto st = gibbs_level_state(s.level_view(), 0.8);
    const auto r = bound_report(s, expand(s, st), 5);
    CHECK(r.regime == Regime::MinOfBoth);
    CHECK(r.inputs.R == doctest::Approx(1.9));
    const double eb = r.gibbs_energy;
    const double inv = eb * 5 / (5 - 1.9);
    const double ex = eb * std::exp(r.inputs.beta_rho * 1.9 * 1.9 / 5);
    CHECK(r.bound_value == doctest::Approx(std::min(inv, ex)));
    CHECK(r.slack >= -1e-9);
  }

  TEST_CASE("N <= R falls back to the exponential bound") {
    const Spectrumd s = levels({0, 1, 1.9});
    const auto st = gibbs_level_state(s.level_view(), 0.8);
    const auto r = bound_report(s, expand(s, st), 1);
    CHECK(r.regime == Regime::Exponential);
    CHECK_FALSE(r.alpha_max.has_value());
  }

  TEST_CASE("two-level equality") {
    const Spectrumd s = levels({0, 1});
    const auto r = bound_report(s, state({0.8, 0.2}), 3);
    CHECK(r.regime == Regime::TwoLevelEquality);
    CHECK(r.energy == doctest::Approx(r.gibbs_energy).epsilon(1e-10));
  }

  TEST_CASE("low-entropy plug-in") {
    // d0 = 2, d = 3, S = 0.5 ln 2
    const Spectrumd s = levels({0, 0, 1});
    const double S = 0.5 * std::log(2.0);
    // find a state with this entropy: (x, 1-x-y, y) solved coarsely via a family
    double lo = 0.5;
    double hi = 1.0;
    auto make = [](double x) { return std::vector<double>{x, (1 - x) * 0.99, (1 - x) * 0.01}; };
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (oracle::entropy(make(mid)) > S ? lo : hi) = mid;
    }
    const auto p = make(lo);
    const auto r = bound_report(s, state(p), 3);
    CHECK(r.regime == Regime::LowEntropy);
    const double expect = 1.0 * (3 - 2) * std::exp(-3 * std::log(2.0) + 2 * oracle::entropy(p));
    CHECK(r.bound_value == doctest::Approx(expect).epsilon(1e-12));
  }

  TEST_CASE("check_bound refuses non-passive input") {
    CHECK_THROWS_AS(check_bound(levels({0, 1, 1.9}), state({0.5, 0.35, 0.15}), 2), HypothesisViolation);
  }

  TEST_CASE("sampled 1-SS states obey the bounds") {
    const Spectrumd s = levels({0, 1, 2, 3.5});
    for (int N : {2, 4, 6}) {
      const auto draws = sample_n_passive(s, N, 60, 100 + static_cast<std::uint64_t>(N), true);
      for (const auto& rho : draws) {
        const auto r = bound_report(s, rho, N);
        CHECK(r.slack >= -1e-9);
        CHECK(check_bound(s, rho, N) >= -1e-9);
      }
    }
  }

  TEST_CASE("bound table lists the rows") {
    const Spectrumd s = levels({0, 1, 1.9});
    const auto st = gibbs_level_state(s.level_view(), 0.8);
    const auto rows = bound_table(s, expand(s, st), 5);
    CHECK(rows.size() >= 2);
    CHECK(rows.front().regime == Regime::MinOfBoth);
  }

  TEST_CASE("min-selection follows the analytic crossover") {
    const double R = 1.9;
    const double em = 1.9;
    for (int N = 2; N <= 200; N += 3) {
      if (N <= R) continue;
      for (double beta = 0.05; beta < 4; beta += 0.05) {
        const double ex = exponential_bound(1.0, beta, em, R, N);
        const double inv = inverse_bound(1.0, R, N);
        CHECK((ex <= inv) == exponential_is_tighter(beta * em, R, N));
      }
    }
    // For large N the exponential factor wins only while beta eps_max stays below about 1.
    CHECK(exponential_is_tighter(0.9, R, 1000));
    CHECK_FALSE(exponential_is_tighter(1.1, R, 1000));
  }

  TEST_CASE("regime names") {
    CHECK(std::string(to_string(Regime::AsymptoticTwoLevel)) == "AsymptoticTwoLevel");
  }
}

#include <cmath>
#include <numeric>
#include <random>

#include <doctest.h>

#include "npassive/commensurability.hpp"
#include "npassive/passivity.hpp"
#include "unit/helpers.hpp"
#include "unit/oracles.hpp"

using namespace npassive;
using testing::levels;
using testing::state;

namespace {

Spectrumd rational_spectrum(std::vector<std::pair<std::int64_t, std::int64_t>> v) {
  std::vector<Rational> r;
  for (auto [p, q] : v) r.push_back(Rational::make(p, q));
  return Spectrumd::from_rationals(r);
}

}  // namespace

TEST_SUITE("commensurability") {
  TEST_CASE("ratio detection") {
    const auto r = rational_ratio_detect(1.9);
    REQUIRE(r.has_value());
    CHECK(r->p == 19);
    CHECK(r->q == 10);
    CHECK_FALSE(r->exact);
    CHECK(rational_ratio_detect(2.0)->p == 2);
    CHECK_FALSE(rational_ratio_detect(std::sqrt(2.0), 1000, 1e-12).has_value());
    CHECK_THROWS_AS(rational_ratio_detect(0.5), InvalidInput);
    CHECK_THROWS_AS(rational_ratio_detect(NAN), InvalidInput);
  }

  TEST_CASE("ratio detection agrees with exhaustive search") {
    std::mt19937_64 rng(71);
    std::uniform_int_distribution<int> den(1, 400);
    for (int t = 0; t < 300; ++t) {
      const int q = den(rng);
      const int p = q + 1 + den(rng) * 3;
      const double x = static_cast<double>(p) / q;
      const auto got = rational_ratio_detect(x, 1000, 1e-12);
      const auto ref = oracle::best_fraction(x, 1000, 1e-12);
      REQUIRE(got.has_value());
      REQUIRE(ref.has_value());
      CHECK(got->p * ref->second == got->q * ref->first);
      CHECK(std::gcd(got->p, got->q) == 1);
    }
  }

  TEST_CASE("N* examples") {
    CHECK(n_star(rational_spectrum({{0, 1}, {1, 1}, {2, 1}})).n_star == 2);
    CHECK(n_star(rational_spectrum({{0, 1}, {1, 1}, {3, 1}})).n_star == 3);
    CHECK(n_star(rational_spectrum({{0, 1}, {1, 1}, {2, 1}})).exact);
    const auto f = n_star(levels({0, 1, 2}));
    CHECK(f.n_star == 2);
    CHECK_FALSE(f.exact);
    CHECK_FALSE(n_star(levels({0, 1, 1 + std::sqrt(2.0)}), 1000, 1e-12).n_star.has_value());
    CHECK_THROWS_AS(n_star(levels({0, 1})), InvalidInput);
  }

  TEST_CASE("N* over four levels takes the lcm") {
    // triples (0,1,3): 3/1, (1,3,4): (4-1)/(3-1) = 3/2
    const auto r = n_star(rational_spectrum({{0, 1}, {1, 1}, {3, 1}, {4, 1}}));
    REQUIRE(r.triples.size() == 2);
    CHECK(r.n_star == 3);
    REQUIRE(r.n_star_all_triples.has_value());
    CHECK(*r.n_star_all_triples >= *r.n_star);
  }

  TEST_CASE("triple ratio") {
    const auto s = levels({0, 1, 1.9});
    const auto r = triple_ratio(s, 0, 1, 2);
    CHECK(r.p == 19);
    CHECK(r.q == 10);
    CHECK_THROWS_AS(triple_ratio(s, 1, 0, 2), InvalidInput);
  }

  TEST_CASE("Gibbs states satisfy the triple relation") {
    const auto s = levels({0, 1, 3});
    CHECK(triple_forces_gibbs(s, state(oracle::gibbs({0, 1, 3}, 0.9)), {0, 1, 2}));
    CHECK_FALSE(triple_forces_gibbs(s, state({0.5, 0.3, 0.2}), {0, 1, 2}));
  }

  TEST_CASE("failing the relation rules out high-order stability") {
    const std::vector<double> e{0, 1, 3};
    const auto s = levels(e);
    std::mt19937_64 rng(73);
    for (int t = 0; t < 40; ++t) {
      const auto p = oracle::random_state(rng, 3);
      if (triple_forces_gibbs(s, state(p), {0, 1, 2})) continue;
      CHECK_FALSE(is_k_structurally_stable(s, state(p), 3).stable);
      CHECK_FALSE(oracle::k_stable(e, p, 3));
    }
  }

  TEST_CASE("3-passive 3-stable states on (0,1,3) are Gibbs") {
    const std::vector<double> e{0, 1, 3};
    const auto s = levels(e);
    const int steps = 200;
    for (int i = 1; i < steps; ++i) {
      for (int j = 1; i + j < steps; ++j) {
        const double a = static_cast<double>(i) / steps;
        const double b = static_cast<double>(j) / steps;
        const auto rho = state({a, b, 1 - a - b});
        if (!is_n_passive(s, rho, 3).passive || !is_k_structurally_stable(s, rho, 3).stable) continue;
        CHECK(std::abs(3 * std::log(b) - std::log(1 - a - b) - 2 * std::log(a)) < 1e-6);
      }
    }
  }
}

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "npassive/spectra.hpp"

namespace npassive {

inline constexpr std::int64_t kDefaultMaxDenominator = 1'000'000;
inline constexpr double kDefaultRatioTolerance = 1e-9;

// p/q in lowest terms; exact when it came from rational input.
struct RationalRatio {
  std::int64_t p = 1;
  std::int64_t q = 1;
  bool exact = false;
  friend bool operator==(const RationalRatio&, const RationalRatio&) = default;
};

// First continued-fraction convergent p/q of x with q <= max_den and
// |x - p/q| <= tol.
std::optional<RationalRatio> rational_ratio_detect(double x, std::int64_t max_den = kDefaultMaxDenominator,
                                                   double tol = kDefaultRatioTolerance);

struct TripleRatio {
  std::array<Index, 3> levels;        // distinct-level indices a < b < c
  std::optional<RationalRatio> ratio;  // (eps_c - eps_a) / (eps_b - eps_a)
};

struct NStarReport {
  std::optional<std::int64_t> n_star;              // lcm over consecutive triples
  std::optional<std::int64_t> n_star_all_triples;  // lcm over every triple
  std::vector<TripleRatio> triples;                // consecutive triples
  bool exact = false;
};

// Needs at least three distinct levels. Spectra built from rationals are
// handled exactly; float spectra go through rational_ratio_detect.
NStarReport n_star(const Spectrumd& s, std::int64_t max_den = kDefaultMaxDenominator,
                   double tol = kDefaultRatioTolerance);

// Ratio of the triple of state indices a, b, c with eps_a < eps_b < eps_c.
RationalRatio triple_ratio(const Spectrumd& s, Index a, Index b, Index c,
                           std::int64_t max_den = kDefaultMaxDenominator, double tol = kDefaultRatioTolerance);

// p ln lambda_b == q ln lambda_c + (p - q) ln lambda_a within tol.
bool triple_forces_gibbs(const Spectrumd& s, const DiagonalStated& rho, std::array<Index, 3> triple,
                         double tol = 1e-9, std::int64_t max_den = kDefaultMaxDenominator,
                         double ratio_tol = kDefaultRatioTolerance);

}  // namespace npassive

#include "npassive/commensurability.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace npassive {

std::optional<RationalRatio> rational_ratio_detect(double x, std::int64_t max_den, double tol) {
  if (!std::isfinite(x) || !(x > 1)) throw InvalidInput("rational_ratio_detect: need a finite x > 1");
  if (max_den < 1) throw InvalidInput("rational_ratio_detect: max_den must be >= 1");
  // Convergents h/k from the recurrence h_n = a_n h_{n-1} + h_{n-2}.
  long double h_prev = 1;
  long double k_prev = 0;
  long double h = std::floor(static_cast<long double>(x));
  long double k = 1;
  long double rem = static_cast<long double>(x) - h;
  for (int it = 0; it < 64; ++it) {
    if (k > static_cast<long double>(max_den)) return std::nullopt;
    if (std::abs(x - static_cast<double>(h / k)) <= tol) {
      if (h > static_cast<long double>(std::numeric_limits<std::int64_t>::max())) return std::nullopt;
      return RationalRatio{static_cast<std::int64_t>(h), static_cast<std::int64_t>(k), false};
    }
    if (rem == 0) return std::nullopt;
    const long double inv = 1 / rem;
    const long double a = std::floor(inv);
    rem = inv - a;
    const long double h_next = a * h + h_prev;
    const long double k_next = a * k + k_prev;
    h_prev = h;
    k_prev = k;
    h = h_next;
    k = k_next;
  }
  return std::nullopt;
}

namespace {

std::optional<std::int64_t> lcm_checked(std::optional<std::int64_t> acc, std::int64_t p) {
  if (!acc) return std::nullopt;
  const __int128 l = static_cast<__int128>(*acc) / std::gcd(*acc, p) * p;
  if (l > std::numeric_limits<std::int64_t>::max()) return std::nullopt;
  return static_cast<std::int64_t>(l);
}

struct LevelEnergies {
  std::vector<double> value;
  std::optional<std::vector<Rational>> exact;
};

LevelEnergies level_energies(const Spectrumd& s) {
  LevelEnergies out;
  for (const auto& lv : s.levels()) out.value.push_back(lv.energy);
  if (s.rational_energies()) {
    std::vector<Rational> ex;
    for (const auto& lv : s.levels()) ex.push_back((*s.rational_energies())[static_cast<std::size_t>(lv.first)]);
    out.exact = std::move(ex);
  }
  return out;
}

std::optional<RationalRatio> level_ratio(const LevelEnergies& e, std::size_t a, std::size_t b, std::size_t c,
                                         std::int64_t max_den, double tol) {
  if (e.exact) {
    const auto& r = *e.exact;
    const Rational q = (r[c] - r[a]) / (r[b] - r[a]);
    return RationalRatio{q.num, q.den, true};
  }
  return rational_ratio_detect((e.value[c] - e.value[a]) / (e.value[b] - e.value[a]), max_den, tol);
}

}  // namespace

NStarReport n_star(const Spectrumd& s, std::int64_t max_den, double tol) {
  if (s.level_count() < 3) throw InvalidInput("n_star: needs at least three distinct levels");
  const LevelEnergies e = level_energies(s);
  const std::size_t L = e.value.size();
  NStarReport rep;
  rep.exact = e.exact.has_value();
  std::optional<std::int64_t> acc = 1;
  for (std::size_t i = 0; i + 2 < L; ++i) {
    TripleRatio t{{static_cast<Index>(i), static_cast<Index>(i + 1), static_cast<Index>(i + 2)},
                  level_ratio(e, i, i + 1, i + 2, max_den, tol)};
    acc = t.ratio ? lcm_checked(acc, t.ratio->p) : std::nullopt;
    rep.triples.push_back(t);
  }
  rep.n_star = acc;
  std::optional<std::int64_t> all = 1;
  for (std::size_t a = 0; a < L && all; ++a) {
    for (std::size_t b = a + 1; b < L && all; ++b) {
      for (std::size_t c = b + 1; c < L && all; ++c) {
        const auto r = level_ratio(e, a, b, c, max_den, tol);
        all = r ? lcm_checked(all, r->p) : std::nullopt;
      }
    }
  }
  rep.n_star_all_triples = all;
  return rep;
}

RationalRatio triple_ratio(const Spectrumd& s, Index a, Index b, Index c, std::int64_t max_den, double tol) {
  for (Index i : {a, b, c}) {
    if (i < 0 || i >= s.d()) throw InvalidInput("triple: index out of range");
  }
  if (!(s.energy(a) < s.energy(b) && s.energy(b) < s.energy(c))) {
    throw InvalidInput("triple: need eps_a < eps_b < eps_c (p == q is excluded)");
  }
  if (s.rational_energies()) {
    const auto& r = *s.rational_energies();
    const auto ua = static_cast<std::size_t>(a);
    const Rational q = (r[static_cast<std::size_t>(c)] - r[ua]) / (r[static_cast<std::size_t>(b)] - r[ua]);
    return RationalRatio{q.num, q.den, true};
  }
  const auto ratio = rational_ratio_detect((s.energy(c) - s.energy(a)) / (s.energy(b) - s.energy(a)), max_den, tol);
  if (!ratio) throw InvalidInput("triple: energy ratio is not rational within tolerance");
  return *ratio;
}

bool triple_forces_gibbs(const Spectrumd& s, const DiagonalStated& rho, std::array<Index, 3> t, double tol,
                         std::int64_t max_den, double ratio_tol) {
  require_aligned(s, rho);
  const RationalRatio pq = triple_ratio(s, t[0], t[1], t[2], max_den, ratio_tol);
  const double p = static_cast<double>(pq.p);
  const double q = static_cast<double>(pq.q);
  auto term = [](double k, double lam) {
    if (k == 0) return 0.0;
    return lam > 0 ? k * std::log(lam) : -std::numeric_limits<double>::infinity();
  };
  const double lhs = term(p, rho[t[1]]);
  const double rhs = term(q, rho[t[2]]) + term(p - q, rho[t[0]]);
  if (std::isinf(lhs) || std::isinf(rhs)) return lhs == rhs;
  return std::abs(lhs - rhs) <= tol;
}

}  // namespace npassive

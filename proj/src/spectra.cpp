#include "npassive/spectra.hpp"

#include <charconv>
#include <cstdlib>

namespace npassive {

namespace {

using i128 = __int128;

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw InvalidInput("rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational reduce(i128 num, i128 den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{narrow(num), narrow(den)};
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || first == last) {
    throw InvalidInput("malformed rational component '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

Rational Rational::make(std::int64_t num, std::int64_t den) { return reduce(num, den); }

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational{parse_int(text), 1};
  return make(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational operator-(const Rational& a, const Rational& b) {
  return reduce(static_cast<i128>(a.num) * b.den - static_cast<i128>(b.num) * a.den,
                static_cast<i128>(a.den) * b.den);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw InvalidInput("rational division by zero");
  return reduce(static_cast<i128>(a.num) * b.den, static_cast<i128>(a.den) * b.num);
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<i128>(a.num) * b.den < static_cast<i128>(b.num) * a.den;
}

std::uint64_t occupation_count(int d, int N) {
  if (d < 1 || N < 0) return 0;
  // C(N+d-1, k) built incrementally with k = min(d-1, N).
  const std::uint64_t n = static_cast<std::uint64_t>(N) + static_cast<std::uint64_t>(d) - 1;
  const std::uint64_t k = std::min<std::uint64_t>(static_cast<std::uint64_t>(d) - 1, static_cast<std::uint64_t>(N));
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * (n - k + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

OccupationTable occupation_table(int d, int N, std::size_t cap) {
  if (d < 1) throw InvalidInput("occupations: d must be >= 1");
  if (N < 1) throw InvalidInput("occupations: N must be >= 1");
  const std::uint64_t count = occupation_count(d, N);
  if (count > cap) {
    throw SizeGuardError("occupations: C(N+d-1, d-1) = " + std::to_string(count) + " exceeds cap " +
                         std::to_string(cap) + " (d=" + std::to_string(d) + ", N=" + std::to_string(N) + ")");
  }
  OccupationTable table(static_cast<Index>(count), d);
  std::vector<int> cur(static_cast<std::size_t>(d), 0);
  cur[0] = N;
  for (Index row = 0; row < table.rows(); ++row) {
    for (int j = 0; j < d; ++j) table(row, j) = cur[static_cast<std::size_t>(j)];
    // Step to the next composition in descending lexicographic order: take one
    // unit from the rightmost non-zero entry left of the last slot, and move the
    // whole tail into the slot right after it.
    int j = d - 2;
    while (j >= 0 && cur[static_cast<std::size_t>(j)] == 0) --j;
    if (j < 0) break;
    --cur[static_cast<std::size_t>(j)];
    const int tail = cur[static_cast<std::size_t>(d - 1)];
    cur[static_cast<std::size_t>(d - 1)] = 0;
    cur[static_cast<std::size_t>(j + 1)] = tail + 1;
  }
  return table;
}

std::vector<OccupationVector> enumerate_occupations(int d, int N, std::size_t cap) {
  const OccupationTable table = occupation_table(d, N, cap);
  std::vector<OccupationVector> out(static_cast<std::size_t>(table.rows()));
  for (Index r = 0; r < table.rows(); ++r) {
    out[static_cast<std::size_t>(r)].counts.assign(table.row(r).data(), table.row(r).data() + d);
  }
  return out;
}

double multinomial(const int* counts, int d) {
  // Product of binomials keeps intermediate values small.
  double result = 1.0;
  int running = 0;
  for (int j = 0; j < d; ++j) {
    for (int i = 1; i <= counts[j]; ++i) {
      ++running;
      result = result * running / i;
    }
  }
  return result;
}

}  // namespace npassive

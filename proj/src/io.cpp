#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "npassive/cli.hpp"

namespace npassive {

namespace {

using nlohmann::json;

std::string location(std::string_view text, std::size_t byte, const std::string& source) {
  std::size_t line = 1;
  std::size_t col = 1;
  const std::size_t end = std::min(byte > 0 ? byte - 1 : 0, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return source + ":" + std::to_string(line) + ":" + std::to_string(col);
}

std::vector<double> real_array(const json& j, const char* field, const std::string& source) {
  if (!j.contains(field)) throw ParseError(source + ": missing field '" + field + "'");
  const json& a = j.at(field);
  if (!a.is_array()) throw ParseError(source + ": field '" + field + "' must be an array");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) {
      throw ParseError(source + ": " + field + "[" + std::to_string(i) + "] is not a number");
    }
    out.push_back(a[i].get<double>());
  }
  return out;
}

std::int64_t integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ParseError(where + " is not an integer");
  return v.get<std::int64_t>();
}

}  // namespace

StateInput parse_state_json(std::string_view text, const std::string& source, double degeneracy_tol) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(location(text, e.byte, source) + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ParseError(source + ": top level must be an object");
  const std::vector<double> energies = real_array(j, "energies", source);
  const std::vector<double> pops = real_array(j, "populations", source);
  if (energies.size() != pops.size()) {
    throw ParseError(source + ": energies has " + std::to_string(energies.size()) + " entries, populations has " +
                     std::to_string(pops.size()));
  }
  std::optional<Spectrumd> s;
  if (j.contains("rational_energies")) {
    const json& r = j.at("rational_energies");
    if (!r.is_array() || r.size() != energies.size()) {
      throw ParseError(source + ": rational_energies must be an array aligned with energies");
    }
    std::vector<Rational> rat;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string where = source + ": rational_energies[" + std::to_string(i) + "]";
      if (!r[i].is_array() || r[i].size() != 2) throw ParseError(where + " must be [p, q]");
      const std::int64_t q = integer(r[i][1], where);
      if (q == 0) throw ParseError(where + " has zero denominator");
      rat.push_back(Rational::make(integer(r[i][0], where), q));
    }
    s = Spectrumd::from_rationals(rat);
  } else {
    s = Spectrumd::normalize(energies, degeneracy_tol);
  }
  Eigen::VectorXd sorted(static_cast<Index>(pops.size()));
  for (Index k = 0; k < sorted.size(); ++k) sorted[k] = pops[static_cast<std::size_t>(s->order()[k])];
  DiagonalStated rho = DiagonalStated::make(sorted);
  return StateInput{*s, std::move(rho), s->order()};
}

StateInput load_state(const std::string& path, double degeneracy_tol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_state_json(buf.str(), path, degeneracy_tol);
}

std::string state_json(const Spectrumd& s, const DiagonalStated& rho) {
  json j;
  j["energies"] = std::vector<double>(s.energies().data(), s.energies().data() + s.d());
  j["populations"] = std::vector<double>(rho.populations().data(), rho.populations().data() + rho.size());
  if (s.rational_energies()) {
    json r = json::array();
    for (const Rational& q : *s.rational_energies()) r.push_back({q.num, q.den});
    j["rational_energies"] = r;
  }
  return j.dump();
}

void emit_scan_csv(const std::vector<AlphaScanRow>& rows, std::ostream& out) {
  out << "beta,alpha,bound_inverse,bound_exponential\n";
  char line[160];
  for (const AlphaScanRow& r : rows) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", r.beta_rho, r.alpha, r.bound_inverse,
                  r.bound_exponential);
    out << line;
  }
}

void emit_scan_csv(const std::vector<AlphaScanRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path + ": cannot open for writing");
  emit_scan_csv(rows, out);
  if (!out) throw Error(path + ": write failed");
}

std::vector<double> parse_real_list(std::string_view text, const std::string& what) {
  std::vector<double> out;
  std::string token;
  auto flush = [&]() {
    if (token.empty()) return;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || !std::isfinite(v)) {
      throw InvalidInput(what + ": '" + token + "' is not a finite real");
    }
    out.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ' ' || c == ',' || c == '\t' || c == '\n') {
      flush();
    } else {
      token.push_back(c);
    }
  }
  flush();
  if (out.empty()) throw InvalidInput(what + ": empty list");
  return out;
}

}  // namespace npassive

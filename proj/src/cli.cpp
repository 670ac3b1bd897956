#include "npassive/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "npassive/bounds.hpp"
#include "npassive/commensurability.hpp"
#include "npassive/extremal.hpp"
#include "npassive/flattening.hpp"
#include "npassive/gibbs.hpp"
#include "npassive/passivity.hpp"

namespace npassive {

namespace {

using nlohmann::json;

// JSON has no infinities: they are written as the strings "inf" / "-inf".
json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(num(v[i]));
  return a;
}

// Occupation counts indexed by input position.
json raw_counts(const OccupationVector& o, const std::vector<Index>& order) {
  std::vector<int> raw(o.counts.size(), 0);
  for (std::size_t k = 0; k < o.counts.size(); ++k) raw[static_cast<std::size_t>(order[k])] = o.counts[k];
  return raw;
}

json witness_json(const std::optional<WitnessPair>& w, const std::vector<Index>& order) {
  if (!w) return nullptr;
  return json{{"higher", raw_counts(w->higher, order)}, {"lower", raw_counts(w->lower, order)}};
}

json report_json(const BoundReport<double>& r) {
  return json{{"regime", to_string(r.regime)},
              {"bound_value", num(r.bound_value)},
              {"slack", num(r.slack)},
              {"asymptotic", r.asymptotic},
              {"inputs",
               {{"N", r.inputs.N},
                {"beta_rho", num(r.inputs.beta_rho)},
                {"R", num(r.inputs.R)},
                {"eps_max", num(r.inputs.eps_max)},
                {"d0", r.inputs.d0},
                {"u_rho", num(r.inputs.u_rho)},
                {"u_rho_bar", num(r.inputs.u_rho_bar)}}},
              {"energy", num(r.energy)},
              {"gibbs_energy", num(r.gibbs_energy)},
              {"log_z", num(r.log_z)},
              {"alpha", num(r.alpha)},
              {"alpha_max", r.alpha_max ? num(*r.alpha_max) : json(nullptr)},
              {"delta_S", num(r.delta_S)},
              {"note", r.note}};
}

Spectrumd spectrum_from_config(const RunConfig& c) {
  if (!c.input_path.empty()) return load_state(c.input_path, c.degeneracy_tol).spectrum;
  if (c.energies.empty()) throw InvalidInput("needs --state or --energies");
  return Spectrumd::normalize(parse_real_list(c.energies, "--energies"), c.degeneracy_tol);
}

StateInput state_from_config(const RunConfig& c) {
  if (c.input_path.empty()) throw InvalidInput("needs --state");
  return load_state(c.input_path, c.degeneracy_tol);
}

PassivityOptions<double> passivity_options(const RunConfig& c) { return {c.tol, c.energy_tol, c.cap}; }

struct Outcome {
  std::string text;
  int code = 0;
};

Outcome do_check(const RunConfig& c) {
  const StateInput in = state_from_config(c);
  const auto po = passivity_options(c);
  const PassivityVerdict v = is_n_passive(in.spectrum, in.state, c.n, po);
  json j{{"n", c.n}, {"passive", v.passive}, {"energy_tol", v.energy_tol}, {"witness", witness_json(v.witness, in.order)}};
  bool ok = v.passive;
  if (c.k) {
    const StabilityVerdict sv = is_k_structurally_stable(in.spectrum, in.state, *c.k, po);
    j["stability"] = {{"k", *c.k}, {"stable", sv.stable}, {"witness", witness_json(sv.witness, in.order)}};
    ok = ok && sv.stable;
  }
  return {j.dump(2) + "\n", ok ? 0 : 1};
}

Outcome do_ergotropy(const RunConfig& c) {
  const StateInput in = state_from_config(c);
  const json j{{"n", c.n},
               {"ergotropy_1", num(ergotropy_1(in.spectrum, in.state.populations()))},
               {"n_ergotropy", num(n_ergotropy(in.spectrum, in.state, c.n, c.cap))}};
  return {j.dump(2) + "\n", 0};
}

Outcome do_gibbs(const RunConfig& c) {
  if (c.beta.has_value() == c.entropy.has_value()) throw InvalidInput("gibbs: give exactly one of --beta, --entropy");
  const Spectrumd s = spectrum_from_config(c);
  const double beta = c.beta ? *c.beta : solve_beta_for_entropy(s, *c.entropy);
  const GibbsPoint<double> g = gibbs_point(s, beta);
  const json j{{"beta", num(g.beta)},
               {"log_z", num(g.log_z)},
               {"energy", num(g.energy)},
               {"entropy", num(g.entropy)},
               {"energies", vec(s.energies())},
               {"populations", vec(gibbs_populations(s, beta))}};
  return {j.dump(2) + "\n", 0};
}

Outcome do_bounds(const RunConfig& c) {
  const StateInput in = state_from_config(c);
  const bool passive = is_n_passive(in.spectrum, in.state, c.n, passivity_options(c)).passive;
  const auto rows = bound_table(in.spectrum, in.state, c.n);
  const BoundReport<double>& main = rows.front();
  json j = report_json(main);
  if (c.table) {
    json all = json::array();
    for (const auto& r : rows) all.push_back(report_json(r));
    j = json{{"rows", all}};
  }
  j["n_passive"] = passive;
  const bool enforced = !main.asymptotic || c.n >= c.asymptotic_min_n;
  const bool holds = !enforced || !(main.slack < -c.slack_tol);
  j["bound_holds"] = holds;
  return {j.dump(2) + "\n", passive && holds ? 0 : 1};
}

Outcome do_flatten(const RunConfig& c, bool n_given) {
  const StateInput in = state_from_config(c);
  const FlattenResult<double> f = flatten(in.spectrum, in.state);
  json j{{"flattened", json::parse(state_json(in.spectrum, f.flattened))},
         {"delta_S", num(f.delta_S)},
         {"delta_S0", num(f.delta_S0)},
         {"energy", num(state_energy(in.spectrum, in.state))}};
  if (n_given) {
    try {
      const DeltaSBound<double> b = delta_S_bound(in.spectrum, in.state, c.n, passivity_options(c));
      j["delta_S_bound"] = num(b.bound);
      j["two_level_form"] = b.two_level;
    } catch (const HypothesisViolation& e) {
      j["delta_S_bound"] = nullptr;
      j["hypothesis"] = e.what();
    }
  }
  return {j.dump(2) + "\n", 0};
}

Outcome do_scan(const RunConfig& c) {
  const std::vector<double> e = parse_real_list(c.energies, "--energies");
  const std::vector<double> g = parse_real_list(c.degeneracies, "--degeneracies");
  if (e.size() != g.size()) throw InvalidInput("scan-alpha: --energies and --degeneracies differ in length");
  std::vector<std::size_t> idx(e.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });
  Eigen::VectorXd en(static_cast<Index>(e.size()));
  Eigen::VectorXd mult(static_cast<Index>(e.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    en[static_cast<Index>(k)] = e[idx[k]] - e[idx[0]];
    mult[static_cast<Index>(k)] = g[idx[k]];
  }
  const LevelSpectrumd ls = LevelSpectrumd::from_multiplicities(en, mult);
  if (c.points < 1) throw InvalidInput("scan-alpha: --points must be >= 1");
  std::vector<double> betas(static_cast<std::size_t>(c.points));
  for (int k = 0; k < c.points; ++k) {
    betas[static_cast<std::size_t>(k)] =
        c.points == 1 ? c.beta_min : c.beta_min + (c.beta_max - c.beta_min) * k / (c.points - 1);
  }
  ScanOptions so;
  so.resolution = c.resolution;
  if (c.method == "grid") {
    so.method = ScanMethod::Grid;
  } else if (c.method == "walk") {
    so.method = ScanMethod::Walk;
    if (!c.seed) throw InvalidInput("scan-alpha: --method walk is randomized and requires --seed");
  } else {
    throw InvalidInput("scan-alpha: --method must be grid or walk");
  }
  so.seed = c.seed;
  const auto rows = max_alpha_scan(ls, c.n, betas, so);
  std::ostringstream os;
  emit_scan_csv(rows, os);
  return {os.str(), 0};
}

Outcome do_saturate(const RunConfig& c) {
  const SaturationResult r = saturation_construct(c.n, c.m, c.frac);
  json checks = json::array();
  for (const SaturationCheck& k : r.checks) {
    checks.push_back({{"name", k.name}, {"holds", k.holds}, {"lhs", num(k.lhs)}, {"rhs", num(k.rhs)}});
  }
  const SaturationParams& p = r.params;
  json j{{"feasible", r.feasible},
         {"report", r.report},
         {"params",
          {{"N", p.N},
           {"m", p.m},
           {"r", num(p.r)},
           {"beta_eps1", num(p.beta_eps1)},
           {"log_g1", num(p.log_g1)},
           {"log_g2", num(p.log_g2)},
           {"log_xi", num(p.log_xi)},
           {"eta", num(p.eta)},
           {"k0", num(p.k0)},
           {"kappa", num(p.kappa)},
           {"alpha_star", num(p.alpha_star)}}},
         {"alpha_max", num(r.alpha_max)},
         {"alpha_limit", num(r.alpha_limit)},
         {"alpha_measured", num(r.alpha_measured)},
         {"alpha_pred", num(r.alpha_pred)},
         {"beta_eps1_measured", num(r.beta_eps1_measured)},
         {"n_passive", r.n_passive},
         {"checks", checks}};
  if (r.spectrum && r.state) {
    j["spectrum"] = {{"energies", vec(r.spectrum->energies)}, {"log_multiplicities", vec(r.spectrum->log_multiplicity)}};
    j["state"] = {{"log_populations", vec(r.state->log_populations)}};
  }
  return {j.dump(2) + "\n", r.feasible ? 0 : 1};
}

Outcome do_nstar(const RunConfig& c) {
  Spectrumd s;
  if (!c.rational.empty()) {
    std::vector<Rational> rat;
    std::istringstream is(c.rational);
    std::string tok;
    while (is >> tok) rat.push_back(Rational::parse(tok));
    if (rat.empty()) throw InvalidInput("nstar: --rational is empty");
    s = Spectrumd::from_rationals(rat);
  } else {
    s = spectrum_from_config(c);
  }
  const NStarReport rep = n_star(s, c.max_den, c.ratio_tol);
  json triples = json::array();
  for (const TripleRatio& t : rep.triples) {
    json e{{"levels", {t.levels[0], t.levels[1], t.levels[2]}}};
    if (t.ratio) {
      e["p"] = t.ratio->p;
      e["q"] = t.ratio->q;
    } else {
      e["ratio"] = nullptr;
    }
    triples.push_back(e);
  }
  const json j{{"n_star", rep.n_star ? json(*rep.n_star) : json(nullptr)},
               {"n_star_all_triples", rep.n_star_all_triples ? json(*rep.n_star_all_triples) : json(nullptr)},
               {"exact", rep.exact},
               {"triples", triples}};
  return {j.dump(2) + "\n", 0};
}

Outcome do_classify(const RunConfig& c) {
  const StateInput in = state_from_config(c);
  const CPClass<double> k = classify_complete_passivity(in.spectrum, in.state, c.cp_tol);
  const char* tag = k.tag == CPTag::Gibbs ? "Gibbs" : (k.tag == CPTag::GroundState ? "GroundState" : "NotCP");
  const json j{{"tag", tag}, {"beta", num(k.beta)}, {"fit_residual", num(k.fit_residual)}};
  return {j.dump(2) + "\n", 0};
}

Outcome dispatch(const RunConfig& c, bool n_given) {
  switch (c.command) {
    case Command::Check: return do_check(c);
    case Command::Ergotropy: return do_ergotropy(c);
    case Command::Gibbs: return do_gibbs(c);
    case Command::Bounds: return do_bounds(c);
    case Command::Flatten: return do_flatten(c, n_given);
    case Command::ScanAlpha: return do_scan(c);
    case Command::Saturate: return do_saturate(c);
    case Command::NStar: return do_nstar(c);
    case Command::ClassifyCp: return do_classify(c);
  }
  throw InvalidInput("unknown command");
}

int run_impl(const RunConfig& c, bool n_given, std::ostream& out, std::ostream& err) {
  Outcome o;
  try {
    if (c.n < 1) throw InvalidInput("--n must be >= 1");
    o = dispatch(c, n_given);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (c.output_path) {
    std::ofstream f(*c.output_path, std::ios::binary);
    if (!f || !(f << o.text)) {
      err << "error: cannot write " << *c.output_path << "\n";
      return 2;
    }
  } else {
    out << o.text;
  }
  return o.code;
}

}  // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_impl(config, config.command == Command::Flatten && config.n >= 2, out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"N-passive state analysis"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::string output;

  auto state_opt = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--state", c.input_path, "state JSON file");
    if (required) o->required();
    sub->add_option("--degeneracy-tol", c.degeneracy_tol, "relative gap below which levels merge");
    sub->add_option("--output", output, "write the result here instead of stdout");
  };
  auto pair_opts = [&](CLI::App* sub) {
    sub->add_option("--tol", c.tol, "log-space tolerance");
    sub->add_option("--energy-tol", c.energy_tol, "energy tie tolerance (default 1e-12 N eps_max)");
    sub->add_option("--cap", c.cap, "maximum number of occupation vectors");
  };

  CLI::App* check = app.add_subcommand("check", "N-passivity and structural stability");
  state_opt(check, true);
  pair_opts(check);
  check->add_option("--n", c.n, "order N")->required();
  auto* stab = check->add_option("--stability", "order k of the structural-stability check");

  CLI::App* ergo = app.add_subcommand("ergotropy", "single-copy and N-copy ergotropy");
  state_opt(ergo, true);
  ergo->add_option("--n", c.n, "number of copies");
  ergo->add_option("--cap", c.cap, "maximum number of occupation vectors");

  CLI::App* gibbs = app.add_subcommand("gibbs", "Gibbs point from beta or entropy");
  state_opt(gibbs, false);
  gibbs->add_option("--energies", c.energies, "energy list");
  auto* beta = gibbs->add_option("--beta", "inverse temperature");
  auto* entropy = gibbs->add_option("--entropy", "target entropy");

  CLI::App* bounds = app.add_subcommand("bounds", "energy bound report");
  state_opt(bounds, true);
  pair_opts(bounds);
  bounds->add_option("--n", c.n, "order N")->required();
  bounds->add_flag("--table", c.table, "all applicable rows");
  bounds->add_option("--slack-tol", c.slack_tol, "allowed negative slack");
  bounds->add_option("--asymptotic-min-n", c.asymptotic_min_n, "smallest N at which asymptotic rows are enforced");

  CLI::App* flat = app.add_subcommand("flatten", "level-averaged state and entropy gap");
  state_opt(flat, true);
  pair_opts(flat);
  auto* flat_n = flat->add_option("--n", c.n, "order N for the entropy-gap bound");

  CLI::App* scan = app.add_subcommand("scan-alpha", "largest alpha over an isoentropic beta grid");
  scan->add_option("--energies", c.energies, "distinct level energies")->required();
  scan->add_option("--degeneracies", c.degeneracies, "level multiplicities (reals)")->required();
  scan->add_option("--n", c.n, "order N")->required();
  scan->add_option("--beta-min", c.beta_min, "first beta");
  scan->add_option("--beta-max", c.beta_max, "last beta");
  scan->add_option("--points", c.points, "number of beta values");
  scan->add_option("--resolution", c.resolution, "grid points or sampled directions per beta");
  scan->add_option("--method", c.method, "grid or walk");
  auto* scan_seed = scan->add_option("--seed", seed, "random seed (walk method)");
  scan->add_option("--output", output, "CSV path instead of stdout");

  CLI::App* sat = app.add_subcommand("saturate", "state approaching alpha_max");
  sat->add_option("--n", c.n, "order N")->required();
  sat->add_option("--m", c.m, "integer m with m/N < 1/r <= (m+1)/N")->required();
  sat->add_option("--frac", c.frac, "target fraction of alpha_max");
  sat->add_option("--output", output, "write the result here instead of stdout");

  CLI::App* ns = app.add_subcommand("nstar", "commensurability order N*");
  ns->add_option("--energies", c.energies, "energy list (floats)");
  ns->add_option("--rational", c.rational, "exact energies such as \"0 1/1 3/1\"");
  ns->add_option("--max-den", c.max_den, "largest denominator accepted");
  ns->add_option("--tol", c.ratio_tol, "ratio tolerance");
  ns->add_option("--output", output, "write the result here instead of stdout");

  CLI::App* cp = app.add_subcommand("classify-cp", "complete-passivity class");
  state_opt(cp, true);
  cp->add_option("--tol", c.cp_tol, "fit tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (stab->count() > 0) c.k = stab->as<int>();
    if (beta->count() > 0) c.beta = beta->as<double>();
    if (entropy->count() > 0) c.entropy = entropy->as<double>();
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  if (scan_seed->count() > 0) c.seed = seed;
  if (!output.empty()) c.output_path = output;

  if (check->parsed()) c.command = Command::Check;
  if (ergo->parsed()) c.command = Command::Ergotropy;
  if (gibbs->parsed()) c.command = Command::Gibbs;
  if (bounds->parsed()) c.command = Command::Bounds;
  if (flat->parsed()) c.command = Command::Flatten;
  if (scan->parsed()) c.command = Command::ScanAlpha;
  if (sat->parsed()) c.command = Command::Saturate;
  if (ns->parsed()) c.command = Command::NStar;
  if (cp->parsed()) c.command = Command::ClassifyCp;
  return run_impl(c, flat_n->count() > 0, out, err);
}

}  // namespace npassive

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "npassive/extremal.hpp"
#include "npassive/spectra.hpp"

namespace npassive {

// Malformed input file; the message carries file:line:column when known.
class ParseError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

// A state file after normalization. order[k] is the input index of sorted
// position k.
struct StateInput {
  Spectrumd spectrum;
  DiagonalStated state;
  std::vector<Index> order;
};

// {"energies": [...], "populations": [...], "rational_energies": [[p, q], ...]}
// with the last field optional; rational energies take precedence.
StateInput parse_state_json(std::string_view text, const std::string& source = "<input>",
                            double degeneracy_tol = kDefaultDegeneracyTolerance);
StateInput load_state(const std::string& path, double degeneracy_tol = kDefaultDegeneracyTolerance);

// Normalized energies and populations; parse_state_json reads it back unchanged.
std::string state_json(const Spectrumd& s, const DiagonalStated& rho);

// Header beta,alpha,bound_inverse,bound_exponential; 17 significant digits.
void emit_scan_csv(const std::vector<AlphaScanRow>& rows, std::ostream& out);
void emit_scan_csv(const std::vector<AlphaScanRow>& rows, const std::string& path);

// Whitespace- or comma-separated reals.
std::vector<double> parse_real_list(std::string_view text, const std::string& what);

enum class Command { Check, Ergotropy, Gibbs, Bounds, Flatten, ScanAlpha, Saturate, NStar, ClassifyCp };

struct RunConfig {
  Command command = Command::Check;
  std::string input_path;                  // --state
  std::optional<std::string> output_path;  // --output, stdout when absent

  int n = 1;
  std::optional<int> k;  // --stability
  double tol = 1e-9;     // log-space tolerance of the pair checks
  double energy_tol = -1;  // < 0: 1e-12 N eps_max
  double degeneracy_tol = kDefaultDegeneracyTolerance;
  std::size_t cap = kDefaultOccupationCap;

  std::optional<double> beta;     // gibbs
  std::optional<double> entropy;  // gibbs
  std::string energies;           // gibbs, scan-alpha, nstar
  std::string degeneracies;       // scan-alpha
  std::string rational;           // nstar

  bool table = false;  // bounds
  double slack_tol = 1e-9;
  int asymptotic_min_n = 8;

  double beta_min = 0.0;  // scan-alpha
  double beta_max = 10.0;
  int points = 50;
  int resolution = 200;
  std::string method = "grid";
  std::optional<std::uint64_t> seed;

  int m = 1;  // saturate
  double frac = 0.9;

  std::int64_t max_den = 1'000'000;  // nstar
  double ratio_tol = 1e-9;

  double cp_tol = 1e-8;  // classify-cp
};

// Exit codes: 0 success or property holds, 1 property fails, 2 input error.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv (argv[0] is the program name) and runs.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace npassive

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "npassive/cli.hpp"

using namespace npassive;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "npassive");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("npassive_test_" + name);
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

const char* kFixture = R"({"energies": [0, 1, 1.9], "populations": [0.5, 0.35, 0.15]})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("check reports the witness and exits 1") {
    const auto path = write_temp("fixture.json", kFixture);
    const auto r = cli({"check", "--state", path, "--n", "2"});
    CHECK(r.code == 1);
    const json j = json::parse(r.out);
    CHECK(j["passive"] == false);
    CHECK(j["witness"]["higher"] == json({0, 2, 0}));
    CHECK(j["witness"]["lower"] == json({1, 0, 1}));
    CHECK(cli({"check", "--state", path, "--n", "1"}).code == 0);
  }

  TEST_CASE("witness counts follow the input order") {
    const auto path = write_temp("shuffled.json", R"({"energies": [1.9, 0, 1], "populations": [0.15, 0.5, 0.35]})");
    const json j = json::parse(cli({"check", "--state", path, "--n", "2"}).out);
    CHECK(j["witness"]["higher"] == json({0, 0, 2}));
    CHECK(j["witness"]["lower"] == json({1, 1, 0}));
  }

  TEST_CASE("stability flag") {
    const auto path = write_temp("stab.json", R"({"energies": [0, 1, 2], "populations": [0.5, 0.3, 0.2]})");
    const auto r = cli({"check", "--state", path, "--n", "1", "--stability", "2"});
    CHECK(r.code == 1);
    CHECK(json::parse(r.out)["stability"]["stable"] == false);
  }

  TEST_CASE("ergotropy") {
    const auto path = write_temp("qubit.json", R"({"energies": [0, 1], "populations": [0.3, 0.7]})");
    const auto r = cli({"ergotropy", "--state", path, "--n", "2"});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["ergotropy_1"].get<double>() == doctest::Approx(0.4));
    CHECK(j["n_ergotropy"].get<double>() == doctest::Approx(0.8));
  }

  TEST_CASE("gibbs from beta and from entropy") {
    const auto r = cli({"gibbs", "--energies", "0 1", "--beta", "0.6931471805599453"});
    CHECK(r.code == 0);
    CHECK(std::exp(json::parse(r.out)["log_z"].get<double>()) == doctest::Approx(1.5));
    const auto e = cli({"gibbs", "--energies", "0,1,2", "--entropy", "0.8"});
    CHECK(json::parse(e.out)["entropy"].get<double>() == doctest::Approx(0.8));
    CHECK(cli({"gibbs", "--energies", "0 1"}).code == 2);
    const auto cold = cli({"gibbs", "--energies", "0 0 1", "--entropy", "0.6931471805599453"});
    CHECK(json::parse(cold.out)["beta"] == "inf");
  }

  TEST_CASE("bounds") {
    const auto path = write_temp("gibbs.json", R"({"energies": [0, 1, 1.9], "populations": [0.6, 0.28, 0.12]})");
    const auto r = cli({"bounds", "--state", path, "--n", "1"});
    const json j = json::parse(r.out);
    CHECK(j.contains("regime"));
    CHECK(j.contains("slack"));
    const auto t = cli({"bounds", "--state", path, "--n", "5", "--table"});
    CHECK(json::parse(t.out)["rows"].is_array());
    const auto np = write_temp("fixture2.json", kFixture);
    CHECK(cli({"bounds", "--state", np, "--n", "2"}).code == 1);
  }

  TEST_CASE("flatten") {
    const auto path = write_temp("deg.json", R"({"energies": [0, 0, 1], "populations": [0.5, 0.3, 0.2]})");
    const auto r = cli({"flatten", "--state", path});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["flattened"]["populations"][0].get<double>() == doctest::Approx(0.4));
    CHECK(j["delta_S"].get<double>() > 0);
    CHECK_FALSE(j.contains("delta_S_bound"));
    const json k = json::parse(cli({"flatten", "--state", path, "--n", "2"}).out);
    CHECK(k.contains("delta_S_bound"));
  }

  TEST_CASE("scan CSV") {
    const auto r = cli({"scan-alpha", "--energies", "0 1 1.001", "--degeneracies", "1 1 1000", "--n", "5",
                        "--beta-min", "0", "--beta-max", "20", "--points", "5"});
    CHECK(r.code == 0);
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "beta,alpha,bound_inverse,bound_exponential");
    double prev = -1;
    int rows = 0;
    while (std::getline(is, line)) {
      double b = 0;
      double a = 0;
      double inv = 0;
      double ex = 0;
      REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &b, &a, &inv, &ex) == 4);
      CHECK(b > prev);
      CHECK(a <= inv + 1e-9);
      prev = b;
      ++rows;
    }
    CHECK(rows == 5);
  }

  TEST_CASE("walk needs a seed") {
    const auto r = cli({"scan-alpha", "--energies", "0 1 1.9", "--degeneracies", "1 1 1", "--n", "3", "--method",
                        "walk"});
    CHECK(r.code == 2);
    CHECK(r.err.find("seed") != std::string::npos);
    CHECK(cli({"scan-alpha", "--energies", "0 1 1.9", "--degeneracies", "1 1 1", "--n", "3", "--method", "walk",
               "--seed", "4", "--points", "2", "--resolution", "20"})
              .code == 0);
  }

  TEST_CASE("saturate") {
    const auto r = cli({"saturate", "--n", "2", "--m", "1", "--frac", "0.9"});
    CHECK(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["feasible"] == true);
    CHECK(j["n_passive"] == true);
    CHECK(cli({"saturate", "--n", "5", "--m", "1"}).code == 1);
  }

  TEST_CASE("nstar") {
    const json j = json::parse(cli({"nstar", "--rational", "0 1 2"}).out);
    CHECK(j["n_star"] == 2);
    CHECK(j["exact"] == true);
    CHECK(json::parse(cli({"nstar", "--energies", "0 1 3"}).out)["n_star"] == 3);
  }

  TEST_CASE("classify-cp") {
    const auto path = write_temp("cp.json", R"({"energies": [0, 1, 2], "populations": [0.5, 0.3, 0.2]})");
    CHECK(json::parse(cli({"classify-cp", "--state", path}).out)["tag"] == "NotCP");
  }

  TEST_CASE("input errors exit 2") {
    CHECK(cli({"check", "--n", "2"}).code == 2);
    CHECK(cli({"check", "--state", "/nonexistent.json", "--n", "2"}).code == 2);
    CHECK(cli({"check", "--state", write_temp("f.json", kFixture), "--n", "2", "--bogus"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({}).code == 2);
    CHECK(cli({"--help"}).code == 0);
    const auto bad = write_temp("bad.json", "{\n  \"energies\": [0, 1],\n  \"populations\": [0.5 0.5]\n}\n");
    const auto r = cli({"check", "--state", bad, "--n", "1"});
    CHECK(r.code == 2);
    CHECK(r.err.find(bad + ":3:") != std::string::npos);
    const auto neg = write_temp("neg.json", R"({"energies": [0, 1], "populations": [1.2, -0.2]})");
    CHECK(cli({"check", "--state", neg, "--n", "1"}).code == 2);
    const auto miss = write_temp("miss.json", R"({"energies": [0, 1]})");
    const auto m = cli({"check", "--state", miss, "--n", "1"});
    CHECK(m.code == 2);
    CHECK(m.err.find("populations") != std::string::npos);
  }

  TEST_CASE("state JSON round-trips") {
    const auto in = parse_state_json(R"({"energies": [2, 0, 1], "populations": [0.2, 0.5, 0.3]})");
    const std::string text = state_json(in.spectrum, in.state);
    const auto back = parse_state_json(text);
    CHECK(back.spectrum.energies() == in.spectrum.energies());
    CHECK(back.state.populations() == in.state.populations());
    CHECK(state_json(back.spectrum, back.state) == text);
    const auto rat = parse_state_json(R"({"energies": [0, 0.5], "populations": [0.6, 0.4], "rational_energies": [[0, 1], [1, 2]]})");
    REQUIRE(rat.spectrum.rational_energies().has_value());
    CHECK(parse_state_json(state_json(rat.spectrum, rat.state)).spectrum.rational_energies() ==
          rat.spectrum.rational_energies());
  }

  TEST_CASE("CSV keeps 17 significant digits") {
    AlphaScanRow row{0.1, 1.0 / 3.0, 0, 0, 1.25, 2.0, {}};
    std::ostringstream os;
    emit_scan_csv({row}, os);
    std::istringstream is(os.str());
    std::string header;
    std::string line;
    std::getline(is, header);
    std::getline(is, line);
    double a = 0;
    double b = 0;
    double c = 0;
    double d = 0;
    std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &c, &d);
    CHECK(b == 1.0 / 3.0);
  }

  TEST_CASE("the installed binary reports exit codes") {
    const auto path = write_temp("bin.json", kFixture);
    const std::string cmd = std::string(NPASSIVE_CLI_PATH) + " check --state " + path + " --n 2 > /dev/null";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 1);
    const int bad = std::system((std::string(NPASSIVE_CLI_PATH) + " check --n 2 2> /dev/null").c_str());
    CHECK(WEXITSTATUS(bad) == 2);
  }
}

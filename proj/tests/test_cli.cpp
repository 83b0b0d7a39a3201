#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cknscope/flowfield.hpp"
#include "cknscope/functionals.hpp"

using namespace cknscope;

namespace {

std::string binary() {
  const char* env = std::getenv("CKNSCOPE_BIN");
  REQUIRE_MESSAGE(env != nullptr, "CKNSCOPE_BIN must point at the cknscope binary");
  return env;
}

int run(const std::string& args) {
  const std::string cmd = binary() + " " + args + " > cli_stdout.txt 2> cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

}  // namespace

TEST_CASE("gen writes a loadable beltrami flow with pressure") {
  REQUIRE(run("gen --kind beltrami --n 32 --n-times 5 --t1 0.2 --out cli_bel.nsf") == 0);
  const SampledFlow flow = load_flow("cli_bel.nsf");
  CHECK(flow.grid.n == 32);
  CHECK(flow.has_pressure());
  CHECK_FALSE(flow.has_force());
  std::remove("cli_bel.nsf");
}

TEST_CASE("gen rejects an unknown generator kind") {
  CHECK(run("gen --kind vortex --out nothing.nsf") != 0);
}

TEST_CASE("a reloaded shear flow still passes the gradient oracle") {
  REQUIRE(run("gen --kind shear --n 64 --n-times 9 --t1 0.3 --out cli_shear.nsf") == 0);
  const SampledFlow flow = load_flow("cli_shear.nsf");
  const double e = eval_E(flow, flow.grid.center(), 0.3, 0.5);
  CHECK(e == doctest::Approx(4.0 * M_PI / 3.0 * 0.0625).epsilon(0.01));
  std::remove("cli_shear.nsf");
}

TEST_CASE("gen is byte-deterministic in the seed") {
  REQUIRE(run("gen --kind random --n 32 --n-times 5 --t1 0.5 --seed 9 --kmax 5 --out cli_r1.nsf") ==
          0);
  REQUIRE(run("gen --kind random --n 32 --n-times 5 --t1 0.5 --seed 9 --kmax 5 --out cli_r2.nsf") ==
          0);
  CHECK(slurp("cli_r1.nsf") == slurp("cli_r2.nsf"));
  REQUIRE(run("gen --kind random --n 32 --n-times 5 --t1 0.5 --seed 10 --kmax 5 --out cli_r3.nsf") ==
          0);
  CHECK(slurp("cli_r1.nsf") != slurp("cli_r3.nsf"));
  std::remove("cli_r1.nsf");
  std::remove("cli_r2.nsf");
  std::remove("cli_r3.nsf");
}

TEST_CASE("functionals CSV carries the shear oracle values") {
  REQUIRE(run("functionals --kind shear --n 64 --n-times 9 --t1 0.3 --center --r 0.5 "
              "--q 2 --out cli_fun.csv") == 0);
  const std::string text = slurp("cli_fun.csv");
  std::stringstream ss(text);
  std::string line, header, row;
  std::getline(ss, line);  // # provenance comment
  CHECK(line.rfind("# flow=shear", 0) == 0);
  std::getline(ss, header);
  std::getline(ss, row);
  const auto cols = split(header);
  const auto vals = split(row);
  REQUIRE(cols.size() == vals.size());
  double A = 0.0, Eq = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "A") A = std::stod(vals[i]);
    if (cols[i] == "E_q") Eq = std::stod(vals[i]);
  }
  CHECK(A == doctest::Approx(0.05236).epsilon(0.01));
  CHECK(Eq == doctest::Approx(0.2618).epsilon(0.01));
  std::remove("cli_fun.csv");
}

TEST_CASE("functionals --require-pressure rejects pressure-less flows") {
  CHECK(run("functionals --kind selfsimilar --n 32 --n-times 9 --t1 0.25 --sigma 1 "
            "--center --r 0.45 --require-pressure") != 0);
}

TEST_CASE("functionals JSON mirror parses and matches the schema") {
  REQUIRE(run("functionals --kind shear --n 64 --n-times 9 --t1 0.3 --center --r 0.5 "
              "--format json --out cli_fun.json") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_fun.json"));
  REQUIRE(j.contains("reports"));
  REQUIRE(j["reports"].size() == 1);
  const auto& rep = j["reports"][0];
  CHECK(rep.contains("A"));
  CHECK(rep.contains("E_q"));
  CHECK(rep["has_pressure"].get<bool>());
  std::remove("cli_fun.json");
}

TEST_CASE("verify single-lemma run echoes the exact exponents") {
  REQUIRE(run("verify --fields 1 --resolutions 32 --lemma L52 --q 2 --k 0.25 "
              "--out cli_verify.json") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_verify.json"));
  REQUIRE(j.contains("exponents"));
  CHECK(j["exponents"]["A_exponent"].get<std::string>() == "3/4");
  CHECK(j["exponents"]["Eq_exponent"].get<std::string>() == "3/4");
  CHECK(j["exponents"]["admissible"].get<bool>());
  REQUIRE(j.contains("fits"));
  REQUIRE(j["fits"].size() == 1);
  CHECK(j["fits"][0]["lemma"].get<std::string>() == "L52");
  std::remove("cli_verify.json");
}

TEST_CASE("verify output is byte-identical for a fixed seed") {
  const std::string args =
      "verify --fields 2 --resolutions 32 --seed 5 --no-balance --out cli_v1.json";
  REQUIRE(run(args) == 0);
  std::rename("cli_v1.json", "cli_v_first.json");
  REQUIRE(run(args) == 0);
  CHECK(slurp("cli_v1.json") == slurp("cli_v_first.json"));
  std::remove("cli_v1.json");
  std::remove("cli_v_first.json");
}

TEST_CASE("scan of the self-similar fixture flags the focal point only") {
  REQUIRE(run("scan --kind selfsimilar --n 64 --n-times 13 --t1 0.26 --sigma 1.5 "
              "--criterion theorem2 --epsilon 0.05 --rmax 0.5 --rho 0.8 --depth 2 "
              "--point 3.14159265358979,3.14159265358979,3.14159265358979,0.26 "
              "--point 4.1,3.14159265358979,3.14159265358979,0.26 --out cli_scan.csv") == 0);
  const std::string text = slurp("cli_scan.csv");
  std::stringstream ss(text);
  std::string line;
  std::getline(ss, line);  // comment
  std::getline(ss, line);  // header
  std::vector<std::vector<std::string>> rows;
  while (std::getline(ss, line))
    if (!line.empty()) rows.push_back(split(line));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].back() == "not-implied");
  CHECK(rows[1].back() == "regular");
  std::remove("cli_scan.csv");
}

TEST_CASE("scan over an interior lattice marks every smooth point regular") {
  REQUIRE(run("scan --kind beltrami --abc 0.3 0.3 0.3 --n 48 --n-times 25 --t1 1.5 "
              "--criterion ckn --epsilon 0.1 --rmax 0.7 --depth 1 --lattice 2 "
              "--out cli_lat.csv") == 0);
  std::stringstream ss(slurp("cli_lat.csv"));
  std::string line;
  std::getline(ss, line);  // comment
  std::getline(ss, line);  // header
  int rows = 0;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    ++rows;
    CHECK(split(line).back() == "regular");
  }
  CHECK(rows == 8);  // 2^3 lattice points, one criterion each
  std::remove("cli_lat.csv");
}

TEST_CASE("flow source must be a file or a generator, not both") {
  CHECK(run("functionals --flow nope.nsf --kind shear --r 0.5") != 0);
  CHECK(run("functionals --r 0.5") != 0);
}

TEST_CASE("scan records per-point errors without aborting the run") {
  REQUIRE(run("scan --kind beltrami --abc 0.3 0.3 0.3 --n 48 --n-times 25 --t1 1.5 --criterion ckn "
              "--rmax 0.7 --depth 2 --point 3.14,3.14,3.14,1.5 --point 3.14,3.14,3.14,0.01 "
              "--out cli_scan2.csv") == 0);
  const std::string text = slurp("cli_scan2.csv");
  CHECK(text.find("regular") != std::string::npos);
  CHECK(text.find("error:") != std::string::npos);
  // --strict turns the partial failure into a nonzero exit.
  CHECK(run("scan --kind beltrami --abc 0.3 0.3 0.3 --n 48 --n-times 25 --t1 1.5 --criterion ckn "
            "--rmax 0.7 --depth 2 --point 3.14,3.14,3.14,0.01 --strict "
            "--out cli_scan3.csv") == 2);
  std::remove("cli_scan2.csv");
  std::remove("cli_scan3.csv");
}

TEST_CASE("iteration trace converges to gamma M^2") {
  REQUIRE(run("trace --iteration --beta 2 --q 2 --M 2 --Y0 0 --steps 40 --out cli_it.csv") == 0);
  std::stringstream ss(slurp("cli_it.csv"));
  std::string line, last;
  std::getline(ss, line);
  CHECK(line.find("gamma=8192") != std::string::npos);
  CHECK(line.find("limit=32768") != std::string::npos);
  std::getline(ss, line);  // header
  while (std::getline(ss, line))
    if (!line.empty()) last = line;
  const auto cols = split(last);
  REQUIRE(cols.size() == 3);
  CHECK(std::stod(cols[1]) == doctest::Approx(32768.0).epsilon(1e-9));
  std::remove("cli_it.csv");
}

TEST_CASE("epsilon curve reproduces eps/M rows exactly") {
  REQUIRE(run("trace --epsilon-curve --eps 0.05 --Ms 1,2,4 --out cli_curve.csv") == 0);
  std::stringstream ss(slurp("cli_curve.csv"));
  std::string line;
  std::getline(ss, line);  // comment
  std::getline(ss, line);  // header
  const double want[3][2] = {{1.0, 0.05}, {2.0, 0.025}, {4.0, 0.0125}};
  for (int i = 0; i < 3; ++i) {
    REQUIRE(std::getline(ss, line));
    const auto cols = split(line);
    CHECK(std::stod(cols[0]) == want[i][0]);
    CHECK(std::stod(cols[1]) == want[i][1]);
  }
  std::remove("cli_curve.csv");
}

TEST_CASE("theorem-2 trace rejects the out-of-range epsilon") {
  CHECK(run("trace --theorem2 --M 1 --m 0.001 --eps 0.0625") != 0);
  CHECK(run("trace --theorem2 --M 1 --m 0.015625 --eps 0.03125 --out cli_t2.json") == 0);
  const auto j = nlohmann::json::parse(slurp("cli_t2.json"));
  CHECK(j["monomials"].size() == 5);
  std::remove("cli_t2.json");
}

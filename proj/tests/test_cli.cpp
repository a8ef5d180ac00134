#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"

#ifndef HUBERPL_CLI_PATH
#error "HUBERPL_CLI_PATH must be defined by the build"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(HUBERPL_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf;
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0)
    res.out.append(buf.data(), got);
  int st = pclose(pipe);
  res.exit_code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return res;
}

}  // namespace

TEST_CASE("exit codes: success, invalid arguments, numerical failure") {
  CHECK(run_cli("classical --eps 0.05").exit_code == 0);
  CHECK(run_cli("minimax --m 2 --eps 2").exit_code == 2);
  CHECK(run_cli("minimax --m 0.5 --eps 0.05").exit_code == 2);
  CHECK(run_cli("no-such-subcommand").exit_code == 2);
  // runtime failure (unwritable output path): reported, not a crash
  CHECK(run_cli("--out /nonexistent-dir/x.csv classical").exit_code == 3);
}

TEST_CASE("deterministic byte-identical output") {
  std::string args = "table1 --m 2";
  RunResult a = run_cli(args), b = run_cli(args);
  CHECK(a.exit_code == 0);
  CHECK(a.out == b.out);

  std::string mc = "monte-carlo --n 60 --p 20 --eps 0.05 --mu 5 --lambda 1 "
                   "--reps 4 --seed 9";
  RunResult m1 = run_cli(mc), m2 = run_cli(mc);
  CHECK(m1.exit_code == 0);
  CHECK(m1.out == m2.out);
}

TEST_CASE("csv carries the run header and the inf literal") {
  RunResult r = run_cli("table1 --m 2 --eps 0.05 0.25");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# huberpl table1", 0) == 0);  // provenance comment
  std::getline(in, line);
  CHECK(line == "eps,v_star");
  std::getline(in, line);
  CHECK(line.rfind("0.05,", 0) == 0);
  std::getline(in, line);
  CHECK(line == "0.25,inf");
}

TEST_CASE("json output is valid and encodes infinities as null") {
  RunResult r = run_cli("--format json table1 --m 2 --eps 0.05 0.25");
  REQUIRE(r.exit_code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  REQUIRE(j.contains("columns"));
  REQUIRE(j.contains("rows"));
  CHECK(j["rows"].size() == 2);
  CHECK(j["rows"][0][1].get<double>() == doctest::Approx(3.377).epsilon(1e-3));
  CHECK(j["rows"][1][1].is_null());
}

TEST_CASE("--out writes the same bytes as stdout") {
  std::string path = "cli_out_test.csv";
  RunResult direct = run_cli("classical --eps 0.05 0.1");
  RunResult filed = run_cli("--out " + path + " classical --eps 0.05 0.1");
  REQUIRE(filed.exit_code == 0);
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == direct.out);
  std::filesystem::remove(path);
}

TEST_CASE("breakdown and minimax spot values") {
  RunResult r = run_cli("--format json breakdown --m 2");
  REQUIRE(r.exit_code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  double e2 = j["rows"][0][1].get<double>();
  CHECK(std::fabs(e2 - 0.1924) <= 5e-4);

  r = run_cli("--format json minimax --m 2 --eps 0.05");
  REQUIRE(r.exit_code == 0);
  j = nlohmann::json::parse(r.out);
  // columns: m, eps, kappa_underline_star, lambda_star, v_star, breakdown
  auto row = j["rows"][0];
  CHECK(row[4].get<double>() == doctest::Approx(3.377).epsilon(1e-3));
  CHECK(row[5].get<double>() == 0.0);
}

TEST_CASE("phase emits grid cells plus the critical curve") {
  RunResult r = run_cli("phase --grid 8x8");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.out);
  std::string line;
  int cells = 0, curve = 0;
  while (std::getline(in, line)) {
    if (line.rfind("cell,", 0) == 0) ++cells;
    if (line.rfind("curve,", 0) == 0) ++curve;
  }
  CHECK(cells == 64);
  CHECK(curve > 100);
}

TEST_CASE("semaps orders the proper curves under the envelope") {
  RunResult r = run_cli(
      "--format json semaps --m 5 --eps 0.05 --mu 2 10 --kappa 0.7");
  REQUIRE(r.exit_code == 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  // locate column indices
  auto cols = j["columns"];
  int ci_curve = -1, ci_tau = -1, ci_t = -1;
  for (int i = 0; i < int(cols.size()); ++i) {
    if (cols[i] == "curve") ci_curve = i;
    if (cols[i] == "tau_sq") ci_tau = i;
    if (cols[i] == "value") ci_t = i;
  }
  REQUIRE(ci_curve >= 0);
  REQUIRE(ci_tau >= 0);
  REQUIRE(ci_t >= 0);
  std::map<std::string, std::map<double, double>> curves;
  for (auto& row : j["rows"])
    curves[row[ci_curve].get<std::string>()][row[ci_tau].get<double>()] =
        row[ci_t].get<double>();
  REQUIRE(curves.count("least-favorable"));
  REQUIRE(curves.count("mu=2"));
  REQUIRE(curves.count("mu=10"));
  for (auto& [ts, lf] : curves["least-favorable"]) {
    CHECK(curves["mu=2"][ts] <= lf + 1e-9);
    CHECK(curves["mu=10"][ts] <= lf + 1e-9);
    CHECK(curves["mu=2"][ts] <= curves["mu=10"][ts] + 1e-9);
  }
}

TEST_CASE("lambda-mono reports the monotonicity verdict") {
  RunResult r = run_cli("lambda-mono --m 2 --eps 0.05");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("yes") != std::string::npos);
  CHECK(r.out.find("no\n") == std::string::npos);
}

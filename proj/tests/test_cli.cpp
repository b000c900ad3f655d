// Runs the mocalc binary as a subprocess and checks exit codes and output.

#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#ifndef MOCALC_CLI
#error "MOCALC_CLI must name the binary under test"
#endif
#ifndef MOCALC_TEST_DATA
#error "MOCALC_TEST_DATA must name the fixture directory"
#endif

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string data(const std::string& name) { return std::string(MOCALC_TEST_DATA) + "/" + name; }

// stderr is discarded; `env` is prefixed to the command line.
Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + MOCALC_CLI + "' " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), p)) > 0;) r.out.append(buf.data(), n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  for (std::string line; std::getline(ss, line);) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("gamma prints matrices") {
  auto r = run("gamma " + data("identity2.json"));
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["data"][0][0] == 1.0);
  CHECK(doc["data"][1][0] == 0.0);

  r = run("gamma " + data("diag_half_three_halves.json"));
  REQUIRE(r.code == 0);
  doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["data"][0][0].get<double>() - 1.7724539) < 1e-7);
  CHECK(std::abs(doc["data"][3][0].get<double>() - 0.8862269) < 1e-7);
}

TEST_CASE("input errors exit 2") {
  CHECK(run("gamma " + data("truncated.json")).code == 2);
  CHECK(run("gamma " + data("missing.json")).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("integrate " + data("one.json") + " t 2:1:0").code == 2);
  CHECK(run("integrate " + data("one.json") + " t 1,0.5").code == 2);
  CHECK(run("integrate " + data("one.json") + " 't +' 1").code == 2);
  CHECK(run("integrate " + data("one.json") + " t 1", "MOCALC_DEFAULT_TOL=abc").code == 2);
  CHECK(run("verify --suite nope").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("integrate a constant at order one half") {
  const auto r = run("integrate " + data("half_identity2.json") + " 1 0.25:2:8");
  REQUIRE(r.code == 0);
  const auto rows = csv(r.out);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"x", "F[0][0].re", "F[0][0].im", "F[1][0].re", "F[1][0].im",
                                            "err_estimate"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    const double want = 2.0 * std::sqrt(x / std::numbers::pi);
    CHECK(std::abs(std::stod(rows[i][1]) - want) < 1e-10);
    CHECK(std::abs(std::stod(rows[i][3]) - want) < 1e-10);
    CHECK(std::stod(rows[i][2]) == 0.0);
  }
  CHECK(run("integrate " + data("half_identity2.json") + " 1 0.25:2:8").out == r.out);
}

TEST_CASE("integrate t once") {
  const auto r = run("integrate " + data("one.json") + " t 2 --format json");
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["values"][0]["data"][0][0].get<double>() - 2.0) < 1e-12);
}

TEST_CASE("derivative window violation exits 3") {
  CHECK(run("differentiate " + data("three_halves.json") + " 1 0.5:1:3").code == 3);
}

TEST_CASE("solve exit codes") {
  auto r = run("solve " + data("solve_single.json"));
  REQUIRE(r.code == 0);
  auto rows = csv(r.out);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].back() == "residual");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i].back()) <= 1e-3);

  r = run("solve " + data("solve_zero.json") + " --format json");
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  for (const auto& v : doc["parts"][0]["values"]) CHECK(v["data"][0][0] == 0.0);

  CHECK(run("solve " + data("solve_noncommuting.json")).code == 3);

  // Tolerance unmet: the values are still written.
  r = run("solve " + data("solve_closed_form.json"));
  CHECK(r.code == 1);
  CHECK(csv(r.out).size() == 4);
}

TEST_CASE("verify reports") {
  auto r = run("verify --suite gamma --trials 10 --seed 42");
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["passed"] == true);
  CHECK(doc["results"].size() == 10);
  for (const auto& c : doc["results"]) CHECK(c["residual"].get<double>() <= 1e-6);
  CHECK(run("verify --suite gamma --trials 10 --seed 42").out == r.out);

  r = run("verify --suite semigroup --trials 1");
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["results"][1]["residual"].get<double>() <= 1e-5);

  CHECK(run("verify --suite gamma --trials 0").code == 3);
}

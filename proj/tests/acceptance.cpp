// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "mocalc/solvers.hpp"
#include "mocalc/verify.hpp"
#include "oracles.hpp"

#ifndef MOCALC_CLI
#error "MOCALC_CLI must name the CLI binary"
#endif

using namespace mocalc;

namespace {

constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED[" << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(a + (b - a) * i / (n - 1));
  return g;
}

MatrixFunction column(std::initializer_list<const char*> entries) {
  std::vector<FunctionExpr> e;
  for (const char* s : entries) e.push_back(parse(s));
  const auto n = static_cast<Eigen::Index>(e.size());
  return MatrixFunction(n, 1, std::move(e));
}

ComplexMatrix scalar(double v) { return ComplexMatrix::Constant(1, 1, v); }

double worst(const VerifyReport& r, const std::string& check = "") {
  double w = 0.0;
  for (const auto& c : r.results)
    if (check.empty() || c.check == check) w = std::max(w, c.residual);
  return w;
}

double worst(const Solution& s) {
  double w = 0.0;
  for (const auto& p : s.parts) w = std::max(w, p.max_residual());
  return w;
}

void suite_detail(Outcome& o, const VerifyReport& r) {
  std::size_t failed = 0;
  for (const auto& c : r.results) failed += !c.passed();
  o.detail << r.results.size() << " checks, " << failed << " failed";
  o.require(!r.results.empty() && failed == 0, "suite checks");
}

Outcome c1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_verify(Suite::Gamma, 10, kSeed);
  const double dt = seconds_since(t0);
  suite_detail(o, r);
  o.detail << "; max rel err " << worst(r) << "; " << dt << " s";
  o.require(dt < 10.0, "runtime < 10 s");
  return o;
}

Outcome c2() {
  Outcome o;
  const auto r = run_verify(Suite::Beta, 10, kSeed);
  suite_detail(o, r);
  o.detail << "; beta max rel err " << worst(r, "beta_oracle") << ", functional eq " << worst(r, "functional_equation");
  return o;
}

Outcome c3() {
  Outcome o;
  const auto r = run_verify(Suite::Reduction, 1, kSeed);
  suite_detail(o, r);
  o.require(r.results.size() == 18, "9 (alpha, p) pairs x 2 rules");
  o.detail << "; J max rel " << worst(r, "integral_power_rule") << ", D max rel " << worst(r, "derivative_power_rule");
  return o;
}

Outcome c4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_verify(Suite::Semigroup, 10, kSeed);
  const double dt = seconds_since(t0);
  suite_detail(o, r);
  std::size_t dim1 = 0, dim2 = 0;
  for (const auto& c : r.results) (c.dim == 1 ? dim1 : dim2)++;
  o.require(dim2 == 10 && dim1 == 5, "10 matrix + 5 scalar trials");
  o.detail << "; max residual " << worst(r) << "; " << dt << " s";
  o.require(dt < 60.0, "runtime < 60 s");
  return o;
}

Outcome c5() {
  Outcome o;
  const auto r = run_verify(Suite::Inverse, 5, kSeed);
  suite_detail(o, r);
  o.detail << "; max residual " << worst(r);
  return o;
}

Outcome c6() {
  Outcome o;
  const auto r = run_verify(Suite::Mixed, 5, kSeed);
  suite_detail(o, r);
  o.detail << "; max residual " << worst(r);
  return o;
}

Outcome c7() {
  Outcome o;
  const OperatorConfig cfg;
  const auto grid = linspace(2.0 / 33, 2.0, 33);
  const auto grid8 = linspace(0.25, 2.0, 8);
  const ComplexMatrix one = scalar(1.0);

  const auto single = solve_single(scalar(0.5), column({"1"}), grid, cfg);
  o.require(worst(single) <= 1e-3, "single <= 1e-3");

  const auto two = solve_two_term_nh(one, one, scalar(0.9), scalar(0.4), column({"t^2"}), scalar(0.0), grid, cfg);
  o.require(worst(two) <= 1e-3, "two-term <= 1e-3");

  const auto nterm = solve_n_term_nh({one, one, one}, {scalar(0.9), scalar(0.6), scalar(0.3)}, column({"t"}),
                                     scalar(0.0), grid, cfg);
  o.require(worst(nterm) <= 1e-3, "n-term <= 1e-3");

  // Independent dense-grid discretization on [0, 2].
  const int steps = 4000;
  const auto ref = oracles::two_term_scalar(1.0, 1.0, 0.9, 0.4, [](double t) { return t * t; }, 2.0, steps);
  const std::vector<double> probe = {0.5, 1.0, 2.0};
  const auto at = solve_two_term_nh(one, one, scalar(0.9), scalar(0.4), column({"t^2"}), scalar(0.0), probe, cfg);
  double oracle_err = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double r = ref[static_cast<std::size_t>(std::lround(probe[i] / 2.0 * steps))];
    oracle_err = std::max(oracle_err, std::abs(at.parts[0].values[i](0, 0).real() - r) / std::abs(r));
  }
  o.require(oracle_err <= 1e-3, "oracle agreement <= 1e-3");

  const auto eigen = solve_eigen({one, scalar(0.5)}, {scalar(0.8), scalar(0.3)}, one, grid8, cfg);
  o.require(eigen.passed() && worst(eigen) <= 1e-2, "eigen <= 1e-2");
  const auto homog = solve_homogeneous({one, one}, {scalar(0.9), scalar(0.4)}, one, grid8, cfg);
  o.require(homog.passed() && worst(homog) <= 1e-2, "homogeneous <= 1e-2");
  const auto system = solve_system(scalar(0.5), scalar(0.5), one, grid8, cfg);
  o.require(system.passed() && worst(system) <= 1e-2, "system <= 1e-2");
  const auto pde = solve_pde_separable(scalar(0.5), scalar(0.5), one, one, one, grid8, grid8, cfg);
  o.require(pde.passed() && worst(pde) <= 5e-2, "pde <= 5e-2");

  o.detail << "single " << worst(single) << ", two-term " << worst(two) << ", n-term " << worst(nterm)
           << ", oracle rel " << oracle_err << ", eigen " << worst(eigen) << ", homogeneous " << worst(homog)
           << ", system " << worst(system) << ", pde " << worst(pde);
  return o;
}

Outcome c8() {
  Outcome o;
  const OperatorConfig cfg;
  const auto grid = linspace(0.25, 2.0, 8);
  MatrixSampler s(kSeed);
  const ComplexMatrix m = s.seed_matrix(2, 0.3, 0.9);
  const ComplexMatrix n = s.partner(m, 0.3, 0.9);
  const ComplexMatrix p = s.partner(m, 0.3, 0.9);

  struct Case {
    const char* name;
    std::vector<ComplexMatrix> orders;
    MatrixFunction f;
    double tol;
  };
  const std::vector<Case> cases = {
      {"1x1 n=2", {scalar(0.5), scalar(0.5)}, column({"1"}), 1e-4},
      {"1x1 n=3", {scalar(0.5), scalar(0.7), scalar(0.8)}, column({"t"}), 1e-4},
      {"2x2 n=2", {m, n}, column({"t", "1 + t"}), 1e-3},
      {"2x2 n=3", {m, n, p}, column({"1 + t", "exp(-t)"}), 1e-3},
  };
  for (const auto& c : cases) {
    const auto sol = solve_iterated(c.orders, c.f, grid, cfg);
    o.require(worst(sol) <= c.tol, c.name);
    o.detail << c.name << " " << worst(sol) << "; ";
  }
  return o;
}

Outcome c9() {
  Outcome o;
  const auto r = run_verify(Suite::Equivariance, 5, kSeed);
  suite_detail(o, r);
  o.detail << "; j_m " << worst(r, "j_m_equivariance") << ", d_m " << worst(r, "d_m_equivariance") << ", solve_eigen "
           << worst(r, "solve_eigen_equivariance") << ", decoupling " << worst(r, "diagonal_decoupling");
  return o;
}

std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + MOCALC_CLI + "' " + args;
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {-1, ""};
  std::array<char, 1 << 14> buf{};
  for (std::size_t k; (k = std::fread(buf.data(), 1, buf.size(), p)) > 0;) out.append(buf.data(), k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Outcome c10() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = run_cli("verify --suite all --seed 42");
  const double dt = seconds_since(t0);
  const auto b = run_cli("verify --suite all --seed 42");
  o.require(a.first == 0, "first run exit 0");
  o.require(b.first == 0, "second run exit 0");
  o.require(!a.second.empty() && a.second == b.second, "byte-identical reports");
  o.require(dt < 300.0, "full suite < 5 min");
  o.detail << a.second.size() << " bytes, identical=" << (a.second == b.second) << "; " << dt << " s per run";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"matrix gamma oracle agreement", c1},
      {"beta identity and gamma functional equation", c2},
      {"scalar reduction", c3},
      {"semigroup", c4},
      {"inverse", c5},
      {"mixed composition", c6},
      {"solver defects", c7},
      {"iterated-order cross-check", c8},
      {"equivariance and decoupling", c9},
      {"determinism", c10},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "threw: " << e.what();
    }
    all = all && o.ok;
    std::cout << "criterion " << i + 1 << ": " << (o.ok ? "PASS" : "FAIL") << "  " << criteria[i].first << "  ("
              << o.detail.str() << ")" << std::endl;
  }
  return all ? 0 : 1;
}

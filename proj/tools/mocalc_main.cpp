// mocalc: evaluate matrix-order operators, run solvers and the identity suites.
//
// Exit codes: 0 success, 1 numerical failure, 2 input error,
// 3 precondition violation.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mocalc/fracops.hpp"
#include "mocalc/gammafn.hpp"
#include "mocalc/solvers.hpp"
#include "mocalc/verify.hpp"

using namespace mocalc;
using nlohmann::json;

namespace {

constexpr const char* kTolEnv = "MOCALC_DEFAULT_TOL";

struct Options {
  std::string format = "csv";
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::string out;
};

[[noreturn]] void bad_input(const std::string& msg) { throw Error(ErrorKind::MalformedInput, msg); }

json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_input("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    bad_input(path + ": " + e.what());
  }
}

ComplexMatrix read_matrix(const std::string& path) {
  const json doc = read_json(path);
  try {
    return matrix_from_json(doc);
  } catch (const json::exception& e) {
    bad_input(path + ": " + e.what());
  }
}

// Env default first, then explicit flags.
std::optional<double> env_tol() {
  const char* raw = std::getenv(kTolEnv);
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(raw, &end);
  if (*end != '\0' || !(v > 0.0)) bad_input(std::string(kTolEnv) + " must be a positive number, got '" + raw + "'");
  return v;
}

void apply_tolerances(OperatorConfig& cfg, const Options& o, bool rel_from_env) {
  if (rel_from_env)
    if (auto t = env_tol()) cfg.quad.rel_tol = *t;
  if (o.rel_tol) cfg.quad.rel_tol = *o.rel_tol;
  if (o.abs_tol) cfg.quad.abs_tol = *o.abs_tol;
  cfg.validate();
}

// "start:stop:count", a comma list, or a JSON grid document.
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> xs;
  const auto first = spec.find_first_not_of(" \t");
  if (first != std::string::npos && (spec[first] == '[' || spec[first] == '{')) {
    try {
      xs = grid_from_json(json::parse(spec));
    } catch (const json::exception& e) {
      bad_input(std::string("grid: ") + e.what());
    }
  } else {
    auto number = [&](const std::string& s) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || s.find_first_not_of(" \t", used) != std::string::npos) bad_input("grid: bad number '" + s + "'");
      return v;
    };
    std::vector<std::string> parts;
    const char sep = spec.find(':') != std::string::npos ? ':' : ',';
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
    if (sep == ':') {
      if (parts.size() != 3) bad_input("grid: expected start:stop:count");
      const double c = number(parts[2]);
      if (c != std::floor(c)) bad_input("grid: count must be an integer");
      xs = grid_from_json({{"start", number(parts[0])}, {"stop", number(parts[1])}, {"count", static_cast<long long>(c)}});
    } else {
      for (const auto& p : parts) xs.push_back(number(p));
    }
  }
  if (xs.empty()) bad_input("grid is empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !std::isfinite(xs[i])) bad_input("grid points must be positive and finite");
    if (i > 0 && !(xs[i] > xs[i - 1])) bad_input("grid must be strictly increasing");
  }
  return xs;
}

// A JSON matrix function, or one expression broadcast down a column.
MatrixFunction parse_fn(const std::string& src, Eigen::Index n) {
  const auto first = src.find_first_not_of(" \t");
  if (first != std::string::npos && (src[first] == '[' || src[first] == '{')) {
    try {
      return matrix_function_from_json(json::parse(src));
    } catch (const json::exception& e) {
      bad_input(std::string("function: ") + e.what());
    }
  }
  return MatrixFunction::broadcast(parse(src), n, 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void emit(const std::string& text, const Options& o) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) bad_input("cannot write '" + o.out + "'");
  f << text;
}

int cmd_gamma(const std::string& path, const Options& o) {
  emit(matrix_to_json(mat_gamma(read_matrix(path))).dump(2) + "\n", o);
  return 0;
}

int cmd_beta(const std::string& m, const std::string& n, const Options& o) {
  emit(matrix_to_json(mat_beta(read_matrix(m), read_matrix(n))).dump(2) + "\n", o);
  return 0;
}

int cmd_operator(bool integrate, const std::string& order_path, const std::string& fn, const std::string& grid,
                 const Options& o) {
  const ComplexMatrix m = read_matrix(order_path);
  const std::vector<double> xs = parse_grid(grid);
  OperatorConfig cfg;
  apply_tolerances(cfg, o, true);
  const ExprMatrixFn f(parse_fn(fn, m.rows()));

  std::vector<QuadResult> out;
  out.reserve(xs.size());
  if (integrate) {
    const OrderIntegral op(m);
    for (double x : xs) out.push_back(op(f, x, cfg.quad));
  } else {
    const OrderDerivative op(m);
    for (double x : xs) out.push_back(op(f, x, cfg));
  }

  if (o.format == "json") {
    json doc = {{"operator", integrate ? "integrate" : "differentiate"},
                {"order", matrix_to_json(m)},
                {"function", matrix_function_to_json(f.expr())},
                {"grid", xs},
                {"values", json::array()},
                {"err_estimate", json::array()}};
    for (const auto& r : out) {
      doc["values"].push_back(matrix_to_json(r.value));
      doc["err_estimate"].push_back(r.err_estimate);
    }
    emit(doc.dump(2) + "\n", o);
    return 0;
  }
  std::string csv = "x";
  const auto rows = out.front().value.rows(), cols = out.front().value.cols();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::string name = "F[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      csv += "," + name + ".re," + name + ".im";
    }
  csv += ",err_estimate\n";
  for (std::size_t k = 0; k < xs.size(); ++k) {
    csv += fmt(xs[k]);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j)
        csv += "," + fmt(out[k].value(i, j).real()) + "," + fmt(out[k].value(i, j).imag());
    csv += "," + fmt(out[k].err_estimate) + "\n";
  }
  emit(csv, o);
  return 0;
}

int cmd_solve(const std::string& path, const Options& o) {
  const json doc = read_json(path);
  SolveRequest req = request_from_json(doc);
  const bool has_rel = doc.contains("config") && doc["config"].is_object() && doc["config"].contains("rel_tol");
  apply_tolerances(req.cfg, o, !has_rel);
  const Solution sol = solve(req);
  emit(o.format == "json" ? sol.to_json().dump(2) + "\n" : sol.to_csv(), o);
  if (!sol.passed()) {
    double worst = 0.0;
    for (const auto& part : sol.parts) worst = std::max(worst, part.max_residual());
    std::cerr << "mocalc: ToleranceUnmet: max residual " << fmt(worst) << " exceeds " << fmt(sol.tolerance) << "\n";
    return 1;
  }
  return 0;
}

int cmd_verify(const std::string& suite, int trials, std::uint64_t seed, const std::string& report, const Options& o) {
  OperatorConfig cfg;
  apply_tolerances(cfg, o, true);
  const VerifyReport r = run_verify(suite_from_string(suite), trials, seed, cfg);
  const std::string text = r.to_json().dump(2) + "\n";
  if (!report.empty()) {
    std::ofstream f(report, std::ios::binary);
    if (!f) bad_input("cannot write '" + report + "'");
    f << text;
  }
  emit(text, o);
  if (!r.passed()) {
    std::size_t failed = 0;
    for (const auto& c : r.results) failed += !c.passed();
    std::cerr << "mocalc: " << failed << " of " << r.results.size() << " checks failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-order fractional calculus toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Options o;
  auto common = [&](CLI::App* sub, bool with_format) {
    if (with_format) sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--rel-tol", o.rel_tol, "Quadrature relative tolerance (default from " + std::string(kTolEnv) + ")");
    sub->add_option("--abs-tol", o.abs_tol, "Quadrature absolute tolerance");
    sub->add_option("-o,--out", o.out, "Write output here instead of stdout");
  };

  std::string m_path, n_path;
  auto* gamma = app.add_subcommand("gamma", "Matrix gamma of a matrix file");
  gamma->add_option("matrix", m_path, "Matrix JSON file")->required();
  gamma->add_option("-o,--out", o.out, "Write output here instead of stdout");

  auto* beta = app.add_subcommand("beta", "Matrix beta B(M, N) of two commuting matrices");
  beta->add_option("m", m_path, "Matrix JSON file for M")->required();
  beta->add_option("n", n_path, "Matrix JSON file for N")->required();
  beta->add_option("-o,--out", o.out, "Write output here instead of stdout");

  std::string fn, grid;
  auto* integrate = app.add_subcommand("integrate", "J^M F on a grid");
  auto* differentiate = app.add_subcommand("differentiate", "D^M F on a grid");
  for (auto* sub : {integrate, differentiate}) {
    sub->add_option("order", m_path, "Order matrix JSON file")->required();
    sub->add_option("fn", fn, "Expression in t, or a JSON matrix function")->required();
    sub->add_option("grid", grid, "start:stop:count, a comma list, or a JSON grid")->required();
    common(sub, true);
  }

  std::string request;
  auto* solve_cmd = app.add_subcommand("solve", "Run a solver request");
  solve_cmd->add_option("request", request, "SolveRequest JSON file")->required();
  common(solve_cmd, true);

  std::string suite = "all", report;
  int trials = 10;
  std::uint64_t seed = 42;
  auto* verify = app.add_subcommand("verify", "Seeded identity checks; prints a JSON report");
  verify->add_option("--suite", suite, "gamma, beta, semigroup, inverse, mixed, reduction, equivariance or all");
  verify->add_option("--trials", trials, "Trials per suite (at least 1)");
  verify->add_option("--seed", seed, "Generator seed");
  verify->add_option("--report", report, "Also write the report to this file");
  common(verify, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gamma->parsed()) return cmd_gamma(m_path, o);
    if (beta->parsed()) return cmd_beta(m_path, n_path, o);
    if (integrate->parsed()) return cmd_operator(true, m_path, fn, grid, o);
    if (differentiate->parsed()) return cmd_operator(false, m_path, fn, grid, o);
    if (solve_cmd->parsed()) return cmd_solve(request, o);
    if (verify->parsed()) return cmd_verify(suite, trials, seed, report, o);
  } catch (const Error& e) {
    std::cerr << "mocalc: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    std::cerr << "mocalc: MalformedInput: " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    std::cerr << "mocalc: out of memory\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mocalc: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

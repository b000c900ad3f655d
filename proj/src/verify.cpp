#include "mocalc/verify.hpp"

#include <array>
#include <cmath>

#include "mocalc/gammafn.hpp"
#include "mocalc/solvers.hpp"

namespace mocalc {

namespace {

constexpr std::array<std::pair<Suite, const char*>, 8> kSuites = {{{Suite::Gamma, "gamma"},
                                                                  {Suite::Beta, "beta"},
                                                                  {Suite::Semigroup, "semigroup"},
                                                                  {Suite::Inverse, "inverse"},
                                                                  {Suite::Mixed, "mixed"},
                                                                  {Suite::Reduction, "reduction"},
                                                                  {Suite::Equivariance, "equivariance"},
                                                                  {Suite::All, "all"}}};

double rel(const ComplexMatrix& got, const ComplexMatrix& want) {
  return max_norm(got - want) / std::max(1.0, max_norm(want));
}

std::vector<double> check_grid() {
  std::vector<double> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(0.25 * (i + 1));
  return xs;
}

MatrixFunction column(std::initializer_list<const char*> entries, Eigen::Index n) {
  std::vector<FunctionExpr> e;
  for (const char* s : entries) {
    if (static_cast<Eigen::Index>(e.size()) == n) break;
    e.push_back(parse(s));
  }
  return MatrixFunction(n, 1, std::move(e));
}

class Runner {
 public:
  Runner(Suite suite, int trials, std::uint64_t seed, const OperatorConfig& cfg, VerifyReport& out)
      : name_(to_string(suite)), trials_(trials), sampler_(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<int>(suite) + 1))),
        cfg_(cfg), out_(out) {}

  void run(Suite s) {
    switch (s) {
      case Suite::Gamma: return gamma_suite();
      case Suite::Beta: return beta_suite();
      case Suite::Semigroup: return semigroup_suite();
      case Suite::Inverse: return inverse_suite();
      case Suite::Mixed: return mixed_suite();
      case Suite::Reduction: return reduction_suite();
      case Suite::Equivariance: return equivariance_suite();
      case Suite::All: break;
    }
  }

 private:
  std::string name_;
  int trials_;
  MatrixSampler sampler_;
  OperatorConfig cfg_;
  VerifyReport& out_;

  void record(const char* check, int trial, Eigen::Index dim, double residual, double threshold,
              nlohmann::json inputs = nlohmann::json::object()) {
    CheckResult r;
    r.suite = name_;
    r.check = check;
    r.trial = trial;
    r.dim = dim;
    r.residual = residual;
    r.threshold = threshold;
    r.inputs = std::move(inputs);
    out_.results.push_back(std::move(r));
  }

  void gamma_suite() {
    for (int t = 0; t < trials_; ++t) {
      const Eigen::Index n = t % 2 == 0 ? 2 : 3;
      const ComplexMatrix a = sampler_.seed_matrix(n, 0.3, 3.0);
      record("gamma_oracle", t, n, rel(mat_gamma(a), mat_gamma_integral_oracle(a, 60.0, 1e-10)), 1e-6,
             {{"A", matrix_to_json(a)}});
    }
  }

  void beta_suite() {
    for (int t = 0; t < trials_; ++t) {
      const ComplexMatrix m = sampler_.seed_matrix(2, 0.3, 3.0);
      const ComplexMatrix n = sampler_.partner(m, 0.3, 3.0);
      nlohmann::json in = {{"M", matrix_to_json(m)}, {"N", matrix_to_json(n)}};
      record("beta_oracle", t, 2, rel(mat_beta(m, n), mat_beta_integral_oracle(m, n, 1e-10)), 1e-6, in);
      const ComplexMatrix id = identity(2);
      record("functional_equation", t, 2, rel(mat_gamma(ComplexMatrix(m + id)), m * mat_gamma(m)), 1e-8, in);
    }
  }

  void semigroup_suite() {
    const auto xs = check_grid();
    for (int t = 0; t < trials_; ++t) {
      const ComplexMatrix m = sampler_.seed_matrix(2, 0.2, 1.5);
      const ComplexMatrix n = sampler_.partner(m, 0.2, 1.5);
      const ExprMatrixFn f(column({"1 + t", "exp(-t)"}, 2));
      record("semigroup", t, 2, verify_semigroup(m, n, f, xs, cfg_).max_residual, 1e-5,
             {{"M", matrix_to_json(m)}, {"N", matrix_to_json(n)}});
    }
    // Scalar trials; the first is M = N = 1/2.
    const int scalar = std::max(1, trials_ / 2);
    for (int t = 0; t < scalar; ++t) {
      const ComplexMatrix m = t == 0 ? ComplexMatrix::Constant(1, 1, 0.5) : sampler_.seed_matrix(1, 0.2, 1.5);
      const ComplexMatrix n = t == 0 ? ComplexMatrix::Constant(1, 1, 0.5) : sampler_.seed_matrix(1, 0.2, 1.5);
      const ExprMatrixFn f(column({"1"}, 1));
      record("semigroup", trials_ + t, 1, verify_semigroup(m, n, f, xs, cfg_).max_residual, 1e-5,
             {{"M", matrix_to_json(m)}, {"N", matrix_to_json(n)}});
    }
  }

  void inverse_suite() {
    const auto xs = check_grid();
    for (int t = 0; t < trials_; ++t) {
      const Eigen::Index dim = t % 2 == 0 ? 2 : 1;
      const ComplexMatrix m = sampler_.seed_matrix(dim, 0.2, 0.8);
      const ExprMatrixFn f(column({"1 + t", "exp(-t)"}, dim));
      record("inverse", t, dim, verify_inverse(m, f, xs, cfg_).max_residual, 1e-4, {{"M", matrix_to_json(m)}});
    }
  }

  void mixed_suite() {
    const auto xs = check_grid();
    for (int t = 0; t < trials_; ++t) {
      const ComplexMatrix m = sampler_.seed_matrix(2, 0.2, 0.6);
      const ComplexMatrix n = m + sampler_.partner(m, 0.1, 0.5);
      const ExprMatrixFn f(column({"1 + t", "t^2"}, 2));
      record("mixed", t, 2, verify_mixed(m, n, f, xs, cfg_).max_residual, 1e-4,
             {{"M", matrix_to_json(m)}, {"N", matrix_to_json(n)}});
    }
  }

  void reduction_suite() {
    const auto xs = check_grid();
    int t = 0;
    for (double alpha : {0.25, 0.5, 0.75})
      for (int p : {0, 1, 2}) {
        const ComplexMatrix m = ComplexMatrix::Constant(1, 1, alpha);
        const FunctionExpr e = p == 0 ? parse("1") : p == 1 ? parse("t") : parse("t^2");
        const ExprMatrixFn f(MatrixFunction(1, 1, {e}));
        double j_err = 0.0, d_err = 0.0;
        for (double x : xs) {
          const double j_want = std::tgamma(p + 1.0) / std::tgamma(p + 1.0 + alpha) * std::pow(x, p + alpha);
          const double d_want = std::tgamma(p + 1.0) / std::tgamma(p + 1.0 - alpha) * std::pow(x, p - alpha);
          j_err = std::max(j_err, std::abs(j_m(m, f, x, cfg_).value(0, 0) - j_want) / std::abs(j_want));
          d_err = std::max(d_err, std::abs(d_m(m, f, x, cfg_).value(0, 0) - d_want) / std::abs(d_want));
        }
        const nlohmann::json in = {{"alpha", alpha}, {"p", p}};
        record("integral_power_rule", t, 1, j_err, 1e-6, in);
        record("derivative_power_rule", t, 1, d_err, 1e-4, in);
        ++t;
      }
  }

  void equivariance_suite() {
    const auto xs = check_grid();
    for (int t = 0; t < trials_; ++t) {
      const ComplexMatrix m = sampler_.seed_matrix(2, 0.2, 0.8);
      const ComplexMatrix s = sampler_.similarity(2);
      const ComplexMatrix si = s.inverse();
      const ComplexMatrix ms = s * m * si;
      const auto f = make_expr_fn(column({"1 + t", "t^2"}, 2));
      const auto sf = left_multiply(s, f);
      double j_err = 0.0, d_err = 0.0;
      for (double x : xs) {
        j_err = std::max(j_err, rel(j_m(ms, *sf, x, cfg_).value, s * j_m(m, *f, x, cfg_).value));
        d_err = std::max(d_err, rel(d_m(ms, *sf, x, cfg_).value, s * d_m(m, *f, x, cfg_).value));
      }
      const nlohmann::json in = {{"M", matrix_to_json(m)}, {"S", matrix_to_json(s)}};
      record("j_m_equivariance", t, 2, j_err, 1e-5, in);
      record("d_m_equivariance", t, 2, d_err, 1e-5, in);

      const ComplexMatrix m1 = sampler_.seed_matrix(2, 0.6, 0.9);
      const ComplexMatrix m2 = sampler_.partner(m1, 0.1, 0.4);
      const ComplexMatrix id = identity(2);
      const ComplexMatrix c2 = 0.5 * id;
      const auto base = solve_eigen({id, c2}, {m1, m2}, id, xs, cfg_);
      const auto moved = solve_eigen({id, c2}, {s * m1 * si, s * m2 * si}, s, xs, cfg_);
      double e_err = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i)
        e_err = std::max(e_err, rel(moved.parts[0].values[i], s * base.parts[0].values[i]));
      record("solve_eigen_equivariance", t, 2, e_err, 1e-5,
             {{"M_1", matrix_to_json(m1)}, {"M_2", matrix_to_json(m2)}, {"S", matrix_to_json(s)}});

      // Diagonal orders act channel by channel.
      ComplexMatrix d = ComplexMatrix::Zero(2, 2);
      d(0, 0) = sampler_.uniform(0.2, 0.8);
      d(1, 1) = sampler_.uniform(0.2, 0.8);
      const auto g = make_expr_fn(column({"1 + t", "exp(-t)"}, 2));
      const auto g0 = make_expr_fn(column({"1 + t"}, 1));
      const auto g1 = make_expr_fn(MatrixFunction(1, 1, {parse("exp(-t)")}));
      double dec = 0.0;
      for (double x : xs) {
        const ComplexMatrix jv = j_m(d, *g, x, cfg_).value;
        const ComplexMatrix dv = d_m(d, *g, x, cfg_).value;
        const ComplexMatrix d0 = ComplexMatrix::Constant(1, 1, d(0, 0)), d1 = ComplexMatrix::Constant(1, 1, d(1, 1));
        dec = std::max({dec, std::abs(jv(0, 0) - j_m(d0, *g0, x, cfg_).value(0, 0)),
                        std::abs(jv(1, 0) - j_m(d1, *g1, x, cfg_).value(0, 0)),
                        std::abs(dv(0, 0) - d_m(d0, *g0, x, cfg_).value(0, 0)),
                        std::abs(dv(1, 0) - d_m(d1, *g1, x, cfg_).value(0, 0))});
      }
      record("diagonal_decoupling", t, 2, dec, 1e-10, {{"M", matrix_to_json(d)}});
    }
  }
};

}  // namespace

std::string to_string(Suite s) {
  for (const auto& [k, name] : kSuites)
    if (k == s) return name;
  return "unknown";
}

Suite suite_from_string(const std::string& s) {
  for (const auto& [k, name] : kSuites)
    if (s == name) return k;
  throw Error(ErrorKind::MalformedInput,
              "unknown suite '" + s + "' (expected gamma, beta, semigroup, inverse, mixed, reduction, equivariance or all)");
}

double MatrixSampler::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

ComplexMatrix MatrixSampler::into_window(const ComplexMatrix& a, double lo, double hi) {
  const ComplexVector ev = eig_decompose(a).values;
  double rmin = ev(0).real(), rmax = ev(0).real();
  for (Eigen::Index i = 1; i < ev.size(); ++i) {
    rmin = std::min(rmin, ev(i).real());
    rmax = std::max(rmax, ev(i).real());
  }
  // Keep a margin of 5% of the window on both sides.
  const double margin = 0.05 * (hi - lo);
  const double room = hi - lo - 2.0 * margin;
  const double span = rmax - rmin;
  const double scale = span > room ? room / span : 1.0;
  const double slack = room - scale * span;
  const double shift = lo + margin + uniform(0.0, 1.0) * slack - scale * rmin;
  return scale * a + shift * identity(a.rows());
}

ComplexMatrix MatrixSampler::seed_matrix(Eigen::Index n, double lo, double hi) {
  for (;;) {
    ComplexMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = uniform(-1.0, 1.0);
    ComplexMatrix w = into_window(a, lo, hi);
    try {
      if (eig_decompose(w).cond_estimate <= 1e3) return w;
    } catch (const Error&) {
      // not diagonalizable: draw again
    }
  }
}

ComplexMatrix MatrixSampler::partner(const ComplexMatrix& seed, double lo, double hi) {
  const double c1 = uniform(-1.0, 1.0);
  const double c2 = uniform(-1.0, 1.0);
  return into_window(ComplexMatrix(c1 * seed + c2 * seed * seed), lo, hi);
}

ComplexMatrix MatrixSampler::similarity(Eigen::Index n) {
  for (;;) {
    ComplexMatrix s = identity(n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) s(i, j) += cplx(uniform(-0.5, 0.5), uniform(-0.2, 0.2));
    const Eigen::JacobiSVD<ComplexMatrix> svd(s);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 0.2 * sv(0)) return s;
  }
}

bool VerifyReport::passed() const {
  for (const auto& r : results)
    if (!r.passed()) return false;
  return !results.empty();
}

nlohmann::json VerifyReport::to_json() const {
  nlohmann::json out;
  out["suite"] = suite;
  out["seed"] = seed;
  out["trials"] = trials;
  out["passed"] = passed();
  std::size_t failed = 0;
  for (const auto& r : results) failed += !r.passed();
  out["checks"] = results.size();
  out["failed"] = failed;
  out["results"] = nlohmann::json::array();
  for (const auto& r : results)
    out["results"].push_back({{"suite", r.suite},
                              {"check", r.check},
                              {"trial", r.trial},
                              {"dim", r.dim},
                              {"residual", r.residual},
                              {"threshold", r.threshold},
                              {"passed", r.passed()},
                              {"inputs", r.inputs}});
  return out;
}

VerifyReport run_verify(Suite suite, int trials, std::uint64_t seed, const OperatorConfig& cfg) {
  if (trials < 1) throw Error(ErrorKind::PreconditionViolated, "trials must be at least 1");
  cfg.validate();
  VerifyReport report;
  report.suite = to_string(suite);
  report.seed = seed;
  report.trials = trials;
  for (const auto& [s, _] : kSuites) {
    if (s == Suite::All || (suite != Suite::All && s != suite)) continue;
    Runner(s, trials, seed, cfg, report).run(s);
  }
  return report;
}

}  // namespace mocalc

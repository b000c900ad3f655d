#include <chrono>
#include <cmath>
#include <numbers>

#include "mocalc/fracops.hpp"
#include "mocalc/gammafn.hpp"
#include "support.hpp"

using namespace mocalc;
using testing::mat;

namespace {

MatrixFnPtr expr_fn(std::initializer_list<const char*> entries) {
  std::vector<FunctionExpr> e;
  for (const char* s : entries) e.push_back(parse(s));
  const auto n = static_cast<Eigen::Index>(e.size());
  return make_expr_fn(MatrixFunction(n, 1, std::move(e)));
}

// J^alpha t^p = Gamma(p+1)/Gamma(p+1+alpha) x^{p+alpha}
double rl_power(double alpha, double p, double x) {
  return std::tgamma(p + 1) / std::tgamma(p + 1 + alpha) * std::pow(x, p + alpha);
}

const double kSqrtPi = std::sqrt(std::numbers::pi);

}  // namespace

TEST_CASE("j_m examples") {
  OperatorConfig cfg;
  CHECK(std::abs(j_m(mat({{1}}), *expr_fn({"1"}), 1.5, cfg).value(0, 0) - 1.5) < 1e-12);
  const auto half = j_m(mat({{0.5, 0}, {0, 0.5}}), *expr_fn({"1", "1"}), 1.0, cfg).value;
  CHECK(std::abs(half(0, 0) - 2.0 / kSqrtPi) < 1e-9);
  CHECK(std::abs(half(1, 0) - 1.12838) < 1e-5);
  const auto diag = j_m(mat({{1, 0}, {0, 2}}), *expr_fn({"1", "1"}), 1.0, cfg).value;
  CHECK(std::abs(diag(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(diag(1, 0) - 0.5) < 1e-12);
}

TEST_CASE("d_m examples") {
  OperatorConfig cfg;
  const ComplexMatrix h = mat({{0.5, 0}, {0, 0.5}});
  const auto dt = d_m(h, *expr_fn({"t", "t"}), 1.0, cfg);
  CHECK(std::abs(dt.value(0, 0) - 2.0 / kSqrtPi) < 1e-6);
  CHECK(std::abs(dt.value(1, 0) - 1.12838) < 1e-5);
  const auto d1 = d_m(h, *expr_fn({"1", "1"}), 1.0, cfg);
  CHECK(std::abs(d1.value(0, 0) - 1.0 / kSqrtPi) < 1e-6);
  CHECK(d1.err_estimate < 1e-4);
  try {
    d_m(mat({{1.2}}), *expr_fn({"1"}), 1.0, cfg);
    FAIL("expected EigenvalueOutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EigenvalueOutOfDomain);
  }
  try {
    d_m(mat({{0.5}}), *expr_fn({"1"}), 1e-4, cfg);
    FAIL("expected StencilOutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StencilOutOfDomain);
  }
}

TEST_CASE("operator config validation") {
  OperatorConfig cfg;
  cfg.fd_step_scale = 0.2;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.fd_step_scale = 1e-3;
  cfg.fd_order = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("scalar reduction of j_m and the power rule for d_m") {
  OperatorConfig cfg;
  const char* sources[] = {"1", "t", "t^2"};
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (int p = 0; p < 3; ++p) {
      const auto f = expr_fn({sources[p], sources[p]});
      const ComplexMatrix m = alpha * identity(2);
      for (int k = 1; k <= 8; ++k) {
        const double x = 0.25 * k;
        const double want = rl_power(alpha, p, x);
        const ComplexMatrix got = j_m(m, *f, x, cfg).value;
        CHECK(std::abs(got(0, 0) - want) <= 1e-6 * want);
        CHECK(std::abs(got(1, 0) - want) <= 1e-6 * want);
        const double dwant = std::tgamma(p + 1.0) / std::tgamma(p + 1.0 - alpha) * std::pow(x, p - alpha);
        const ComplexMatrix dgot = d_m(m, *f, x, cfg).value;
        CHECK(std::abs(dgot(0, 0) - dwant) <= 1e-4 * std::abs(dwant));
      }
    }
  }
}

TEST_CASE("diagonal decoupling") {
  OperatorConfig cfg;
  cfg.quad.rel_tol = 1e-12;
  const auto f = expr_fn({"exp(t)", "cos(t)"});
  for (double x : {0.3, 1.0, 1.7}) {
    const ComplexMatrix both = j_m(mat({{0.3, 0}, {0, 1.4}}), *f, x, cfg).value;
    const ComplexMatrix first = j_m(mat({{0.3}}), *expr_fn({"exp(t)"}), x, cfg).value;
    const ComplexMatrix second = j_m(mat({{1.4}}), *expr_fn({"cos(t)"}), x, cfg).value;
    CHECK(std::abs(both(0, 0) - first(0, 0)) < 1e-10);
    CHECK(std::abs(both(1, 0) - second(0, 0)) < 1e-10);
  }
}

TEST_CASE("property: similarity equivariance and linearity") {
  testing::Gen gen(0x5eed41);
  OperatorConfig cfg;
  cfg.quad.rel_tol = 1e-10;
  const auto f = expr_fn({"1 + t", "sin(t)"});
  const auto g = expr_fn({"t^2", "exp(-t)"});
  for (int trial = 0; trial < 6; ++trial) {
    ComplexVector vals(2);
    vals << gen.complex(0.2, 0.45, 0.1), gen.complex(0.55, 0.8, 0.1);
    const ComplexMatrix m = gen.with_spectrum(vals);
    ComplexMatrix s = identity(2);
    s(0, 1) = gen.complex(-0.5, 0.5, 0.5);
    s(1, 0) = gen.complex(-0.5, 0.5, 0.5);
    const ComplexMatrix sm = s * m * s.inverse();
    const auto sf = left_multiply(s, f);
    const double x = gen.uniform(0.3, 2.0);
    const ComplexMatrix lhs = j_m(sm, *sf, x, cfg).value;
    const ComplexMatrix rhs = s * j_m(m, *f, x, cfg).value;
    CHECK(testing::rel_diff(lhs, rhs) < 1e-6);
    const ComplexMatrix dl = d_m(sm, *sf, x, cfg).value;
    const ComplexMatrix dr = s * d_m(m, *f, x, cfg).value;
    CHECK(testing::rel_diff(dl, dr) < 1e-6);

    const cplx a = gen.complex(-2, 2, 1);
    const auto combo = make_fn(2, 1, [&](double t) { return ComplexMatrix(a * (*f)(t) + (*g)(t)); });
    const ComplexMatrix lin = j_m(m, *combo, x, cfg).value;
    const ComplexMatrix sep = a * j_m(m, *f, x, cfg).value + j_m(m, *g, x, cfg).value;
    CHECK(testing::rel_diff(lin, sep) < 1e-8);
    const ComplexMatrix dlin = d_m(m, *combo, x, cfg).value;
    const ComplexMatrix dsep = a * d_m(m, *f, x, cfg).value + d_m(m, *g, x, cfg).value;
    CHECK(testing::rel_diff(dlin, dsep) < 1e-6);
  }
}

TEST_CASE("semigroup checker") {
  OperatorConfig cfg;
  const std::vector<double> xs{0.25, 0.5, 1.0, 1.5, 2.0};
  CHECK(verify_semigroup(mat({{0.5}}), mat({{0.5}}), *expr_fn({"1"}), xs, cfg).max_residual <= 1e-5);
  CHECK(verify_semigroup(mat({{1}}), mat({{1}}), *expr_fn({"t"}), xs, cfg).max_residual <= 1e-8);
  const ComplexMatrix seed = mat({{0.6, 0.2}, {-0.1, 0.4}});
  const ComplexMatrix other = 0.5 * seed * seed + 0.3 * seed + 0.2 * identity(2);
  CHECK(verify_semigroup(seed, other, *expr_fn({"t", "t^2"}), xs, cfg).max_residual <= 1e-5);
  try {
    verify_semigroup(mat({{0.5, 1}, {0, 0.6}}), mat({{0.5, 0}, {1, 0.6}}), *expr_fn({"1", "1"}), xs, cfg);
    FAIL("expected NotCommuting");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotCommuting);
  }
}

TEST_CASE("inverse checker") {
  OperatorConfig cfg;
  const std::vector<double> xs{0.25, 0.75, 1.25, 2.0};
  CHECK(verify_inverse(0.5 * identity(2), *expr_fn({"t", "t"}), xs, cfg).max_residual <= 1e-4);
  CHECK(verify_inverse(mat({{0.3}}), *expr_fn({"1"}), xs, cfg).max_residual <= 1e-4);
  CHECK(verify_inverse(mat({{0.3}}), *expr_fn({"0"}), xs, cfg).max_residual <= cfg.quad.abs_tol);
}

TEST_CASE("mixed checker") {
  OperatorConfig cfg;
  const std::vector<double> xs{0.25, 0.75, 1.25, 2.0};
  CHECK(verify_mixed(mat({{0.5}}), mat({{1.0}}), *expr_fn({"1"}), xs, cfg).max_residual <= 1e-4);
  const ComplexMatrix m = mat({{0.4, 0.1}, {0.05, 0.5}});
  const ComplexMatrix n = m * m + 0.6 * identity(2);
  CHECK(verify_mixed(m, n, *expr_fn({"1", "t"}), xs, cfg).max_residual <= 1e-4);
  try {
    verify_mixed(mat({{0.5}}), mat({{0.3}}), *expr_fn({"1"}), xs, cfg);
    FAIL("expected EigenvalueOutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EigenvalueOutOfDomain);
  }
}

TEST_CASE("derivative composition is not additive in general") {
  // F = t^{-0.6} lies in the kernel of D^{0.4}, so D^{0.3} D^{0.4} F = 0,
  // while D^{0.7} F = Gamma(0.4)/Gamma(-0.3) x^{-1.3}.
  OperatorConfig cfg;
  const auto f = expr_fn({"t^(-0.6)"});
  const OrderDerivative d04(mat({{0.4}})), d03(mat({{0.3}})), d07(mat({{0.7}}));
  const double x = 1.0;
  const auto layout = std::make_shared<PanelLayout>(stencil_reach(x, cfg), cfg.sampling);
  const auto inner = sample(layout, 1, 1, [&](double t) { return d04(*f, t, cfg, true).value; });
  const QuadResult composed = d03(*inner, x, cfg);
  const QuadResult direct = d07(*f, x, cfg);
  const double want = std::tgamma(0.4) / std::tgamma(-0.3);
  CHECK(std::abs(direct.value(0, 0) - want) < 1e-4);
  const double residual = std::abs(composed.value(0, 0) - direct.value(0, 0));
  CHECK(residual > 10.0 * (composed.err_estimate + direct.err_estimate));
  CHECK(std::abs(composed.value(0, 0)) < 1e-3);
}

#include <cmath>
#include <numbers>
#include <string>

#include "mocalc/exprfn.hpp"
#include "support.hpp"

using namespace mocalc;

TEST_CASE("parse and evaluate") {
  CHECK(std::abs(parse("t^2 + 1").eval(2.0) - 5.0) < 1e-15);
  CHECK(parse("exp(0)").eval(0.0) == 1.0);
  CHECK(std::abs(parse("ln(t)").eval(std::numbers::e) - 1.0) < 1e-15);
  CHECK(std::abs(parse("-t^2").eval(3.0) + 9.0) < 1e-15);
  CHECK(std::abs(parse("2^3^2").eval(0.0) - 512.0) < 1e-12);
  CHECK(std::abs(parse("1.5e-3 * t").eval(2.0) - 3e-3) < 1e-18);
  CHECK(std::abs(parse("  sqrt( t ) ").eval(4.0) - 2.0) < 1e-15);
  CHECK(std::abs(parse("t^-1").eval(4.0) - 0.25) < 1e-15);
  CHECK(std::abs(parse("(1+2*i)*t").eval(2.0) - cplx(2, 4)) < 1e-15);
}

TEST_CASE("syntax errors carry offsets") {
  try {
    parse("t*");
    FAIL("expected SyntaxError");
  } catch (const ExprSyntaxError& e) {
    CHECK(e.kind() == ErrorKind::SyntaxError);
    CHECK(e.offset() == 2);
    CHECK_FALSE(e.expected().empty());
  }
  auto offset_of = [](const char* src) -> long {
    try {
      parse(src);
    } catch (const ExprSyntaxError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  CHECK(offset_of("") == 0);
  CHECK(offset_of("(t") == 2);
  CHECK(offset_of("t)") == 1);
  CHECK(offset_of("foo(t)") == 0);
  CHECK(offset_of("sin t") == 4);
  CHECK(offset_of("t^t") == 2);
  CHECK(offset_of("2 t") == 2);
  CHECK(offset_of("t $ 1") == 2);
}

TEST_CASE("domain errors") {
  try {
    parse("1/t").eval(0.0);
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  CHECK_THROWS_AS(parse("ln(t)").eval(-1.0), Error);
  CHECK_THROWS_AS(parse("sqrt(t)").eval(-1.0), Error);
  CHECK_THROWS_AS(parse("t^0.5").eval(-1.0), Error);
  EvalOptions cx;
  cx.complex_mode = true;
  CHECK(std::abs(parse("sqrt(t)").eval(-1.0, cx) - cplx(0, 1)) < 1e-15);
  CHECK(parse("sqrt(t)").eval(0.0) == 0.0);
}

TEST_CASE("derivatives") {
  CHECK(std::abs(parse("t^3").diff().eval(2.0) - 12.0) < 1e-14);
  CHECK(std::abs(parse("exp(2*t)").diff().eval(0.0) - 2.0) < 1e-15);
  CHECK(std::abs(parse("sin(t)").diff().eval(0.0) - 1.0) < 1e-15);
  CHECK(parse("5").diff().is_zero());
}

TEST_CASE("round trip through the canonical printer") {
  const char* sources[] = {"sin(t)*exp(t)", "t^2 + 1", "-(t - 3)/(2*t)", "sqrt(ln(t + 2))^1.5",
                           "(1 - 2*i) * cos(t) ^ -2", "1e-300 + t", "exp(-t)*0.1"};
  for (const char* s : sources) {
    const FunctionExpr e = parse(s);
    CHECK_MESSAGE(parse(e.print()) == e, s);
  }
}

namespace {

// Random expression trees over the full grammar, as source text.
std::string random_source(testing::Gen& g, int depth) {
  if (depth == 0 || g.integer(0, 3) == 0) {
    switch (g.integer(0, 2)) {
      case 0: return "t";
      case 1: return std::to_string(g.uniform(0.1, 3.0));
      default: return "(t + " + std::to_string(g.integer(1, 3)) + ")";
    }
  }
  const std::string a = random_source(g, depth - 1);
  switch (g.integer(0, 9)) {
    case 0: return "(" + a + " + " + random_source(g, depth - 1) + ")";
    case 1: return "(" + a + " - " + random_source(g, depth - 1) + ")";
    case 2: return "(" + a + " * " + random_source(g, depth - 1) + ")";
    case 3: return "(" + a + ") / (2 + " + "exp(" + random_source(g, depth - 1) + "))";
    case 4: return "sin(" + a + ")";
    case 5: return "cos(" + a + ")";
    case 6: return "exp(" + a + " / 4)";
    case 7: return "(" + a + ")^" + std::to_string(g.integer(2, 3));
    case 8: return "-" + a;
    default: return "sqrt(1 + (" + a + ")^2)";
  }
}

}  // namespace

TEST_CASE("property: diff agrees with central differences") {
  testing::Gen gen(0x5eed31);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const FunctionExpr e = parse(random_source(gen, 4));
    const FunctionExpr d = e.diff();
    double worst = 0.0;
    for (int k = 0; k < 16; ++k) {
      const double t = gen.uniform(0.1, 1.5);
      const double h = 1e-4;
      const cplx fd = (-e.eval(t + 2 * h) + 8.0 * e.eval(t + h) - 8.0 * e.eval(t - h) + e.eval(t - 2 * h)) / (12.0 * h);
      const cplx exact = d.eval(t);
      worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
    }
    CHECK_MESSAGE(worst <= 1e-6, e.print());
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("property: diff is linear") {
  testing::Gen gen(0x5eed32);
  for (int trial = 0; trial < 30; ++trial) {
    const FunctionExpr e1 = parse(random_source(gen, 3));
    const FunctionExpr e2 = parse(random_source(gen, 3));
    const cplx a(gen.uniform(-2, 2), gen.uniform(-1, 1));
    const FunctionExpr combo = FunctionExpr::constant(a) * e1 + e2;
    for (int k = 0; k < 4; ++k) {
      const double t = gen.uniform(0.1, 2.0);
      const cplx lhs = combo.diff().eval(t);
      const cplx rhs = a * e1.diff().eval(t) + e2.diff().eval(t);
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("property: round trip on random trees") {
  testing::Gen gen(0x5eed33);
  for (int trial = 0; trial < 200; ++trial) {
    const FunctionExpr e = parse(random_source(gen, 5));
    CHECK(parse(e.print()) == e);
  }
}

TEST_CASE("property: parser is total on mutated input") {
  testing::Gen gen(0x5eed34);
  const std::string alphabet = "t0123456789.+-*/^()eisnqrpcolx $";
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s = random_source(gen, 3);
    const int edits = gen.integer(1, 4);
    for (int k = 0; k < edits && !s.empty(); ++k) {
      const auto pos = static_cast<std::size_t>(gen.integer(0, static_cast<int>(s.size()) - 1));
      const char c = alphabet[static_cast<std::size_t>(gen.integer(0, static_cast<int>(alphabet.size()) - 1))];
      switch (gen.integer(0, 2)) {
        case 0: s[pos] = c; break;
        case 1: s.insert(pos, 1, c); break;
        default: s.erase(pos, 1); break;
      }
    }
    try {
      parse(s);
    } catch (const ExprSyntaxError& e) {
      CHECK(e.offset() <= s.size());
    }
  }
  CHECK_THROWS_AS(parse(std::string(5000, '(') + "t" + std::string(5000, ')')), ExprSyntaxError);
}

TEST_CASE("matrix functions") {
  const MatrixFunction col(2, 1, {parse("1"), parse("t")});
  const ComplexMatrix v = eval_matrix(col, 3.0);
  CHECK(v(0, 0) == 1.0);
  CHECK(v(1, 0) == 3.0);
  CHECK(eval_matrix(MatrixFunction::zero(2, 2), 0.7).isZero(0.0));
  CHECK(MatrixFunction::zero(3, 1).is_zero());
  const MatrixFunction bad(2, 2, {parse("1"), parse("t"), parse("1/t"), parse("2")});
  try {
    eval_matrix(bad, 0.0);
    FAIL("expected DomainError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
    CHECK(std::string(e.what()).find("(1, 0)") != std::string::npos);
  }
  CHECK_THROWS_AS(MatrixFunction(2, 2, {parse("1")}), Error);
}

TEST_CASE("matrix function json") {
  const auto doc = nlohmann::json::parse(R"js({"n_rows":2,"n_cols":1,"entries":["sin(t)","t^2"]})js");
  const MatrixFunction f = matrix_function_from_json(doc);
  CHECK(f.rows() == 2);
  const MatrixFunction back = matrix_function_from_json(matrix_function_to_json(f));
  CHECK(back.at(1, 0) == f.at(1, 0));
  CHECK(matrix_function_from_json(nlohmann::json("t")).rows() == 1);
  CHECK(matrix_function_from_json(nlohmann::json::parse(R"(["1","t","t^2"])")).rows() == 3);
}

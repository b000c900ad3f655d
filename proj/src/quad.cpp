#include "mocalc/quad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace mocalc {

namespace {

constexpr double kTsHalfWidth = 6.0;  // |u| range; exp(-pi sinh 6) ~ 1e-275
constexpr double kTsBaseStep = 0.5;
constexpr int kTsMaxLevel = 10;
constexpr int kTsFirstCheck = 2;

// One tanh-sinh abscissa in normalized form. `near` is the normalized
// distance to the closer endpoint, computed without cancellation.
struct TsNode {
  double near;
  double far;
  bool near_is_hi;
  double weight;
};

TsNode make_ts_node(double u) {
  const double r = std::exp(-std::numbers::pi * std::abs(std::sinh(u)));
  TsNode n;
  n.near = r / (1.0 + r);
  n.far = 1.0 / (1.0 + r);
  n.near_is_hi = u >= 0.0;
  n.weight = std::numbers::pi * std::cosh(u) * r / ((1.0 + r) * (1.0 + r));
  return n;
}

// Level 0 holds every multiple of the base step; level k > 0 holds the odd
// multiples of base / 2^k. Built once, read-only afterwards.
const std::vector<std::vector<TsNode>>& ts_levels() {
  static const std::vector<std::vector<TsNode>> levels = [] {
    std::vector<std::vector<TsNode>> out(kTsMaxLevel + 1);
    const int half = static_cast<int>(kTsHalfWidth / kTsBaseStep);
    for (int j = -half; j <= half; ++j) out[0].push_back(make_ts_node(j * kTsBaseStep));
    for (int k = 1; k <= kTsMaxLevel; ++k) {
      const double h = kTsBaseStep / std::ldexp(1.0, k);
      const int count = static_cast<int>(std::lround(kTsHalfWidth / h));
      for (int j = -count + 1; j < count; j += 2) out[static_cast<std::size_t>(k)].push_back(make_ts_node(j * h));
    }
    return out;
  }();
  return levels;
}

void check_finite(const ComplexMatrix& v, double t) {
  if (!v.allFinite())
    throw Error(ErrorKind::FunctionEvalError, "integrand is not finite at t = " + std::to_string(t));
}

}  // namespace

void QuadSpec::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || max_refinements < 1)
    throw Error(ErrorKind::PreconditionViolated, "quadrature tolerances must be positive and max_refinements >= 1");
}

QuadSpec QuadSpec::tightened(double factor) const {
  QuadSpec s = *this;
  s.rel_tol = std::max(rel_tol * factor, 1e-14);
  s.abs_tol = std::max(abs_tol * factor, 1e-300);
  return s;
}

QuadResult tanh_sinh(double lo, double hi, const PieceIntegrand& f, const QuadSpec& spec) {
  const double len = hi - lo;
  if (!(len > 0.0)) throw Error(ErrorKind::PreconditionViolated, "tanh_sinh needs lo < hi");
  const auto& levels = ts_levels();
  const int max_level = std::min(spec.max_refinements, kTsMaxLevel);

  QuadResult res;
  ComplexMatrix acc;
  auto add_level = [&](int k) {
    for (const TsNode& n : levels[static_cast<std::size_t>(k)]) {
      QuadNode q;
      if (n.near_is_hi) {
        q.to_hi = len * n.near;
        q.from_lo = len * n.far;
        q.t = hi - q.to_hi;
      } else {
        q.from_lo = len * n.near;
        q.to_hi = len * n.far;
        q.t = lo + q.from_lo;
      }
      ComplexMatrix v = f(q);
      check_finite(v, q.t);
      ++res.evaluations;
      if (acc.size() == 0) acc = ComplexMatrix::Zero(v.rows(), v.cols());
      acc += n.weight * v;
    }
  };

  add_level(0);
  ComplexMatrix prev = kTsBaseStep * len * acc;
  for (int k = 1; k <= max_level; ++k) {
    add_level(k);
    const double h = kTsBaseStep / std::ldexp(1.0, k);
    ComplexMatrix cur = h * len * acc;
    if (k >= kTsFirstCheck) {
      const double diff = max_norm(cur - prev);
      if (diff <= std::max(spec.abs_tol, spec.rel_tol * max_norm(cur))) {
        res.value = std::move(cur);
        res.err_estimate = diff;
        return res;
      }
    }
    prev = std::move(cur);
  }
  throw Error(ErrorKind::ToleranceUnmet, "tanh-sinh did not converge on [" + std::to_string(lo) + ", " +
                                             std::to_string(hi) + "] after " + std::to_string(max_level) +
                                             " refinements");
}

const GaussRule& gauss_rule(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  // Golub-Welsch: eigenvalues of the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jac(k, k - 1) = b;
    jac(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussRule rule;
  for (int k = 0; k < n; ++k) {
    rule.nodes.push_back(es.eigenvalues()(k));
    const double v0 = es.eigenvectors()(0, k);
    rule.weights.push_back(2.0 * v0 * v0);
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

QuadResult gauss_legendre(double lo, double hi, const PieceIntegrand& f, int n) {
  const double half = 0.5 * (hi - lo);
  auto run = [&](int m, long long& evals) {
    const GaussRule& r = gauss_rule(m);
    ComplexMatrix acc;
    for (int k = 0; k < m; ++k) {
      const double xi = r.nodes[static_cast<std::size_t>(k)];
      QuadNode q{lo + half * (1.0 + xi), half * (1.0 + xi), half * (1.0 - xi)};
      ComplexMatrix v = f(q);
      check_finite(v, q.t);
      ++evals;
      if (acc.size() == 0) acc = ComplexMatrix::Zero(v.rows(), v.cols());
      acc += r.weights[static_cast<std::size_t>(k)] * v;
    }
    return ComplexMatrix(half * acc);
  };
  QuadResult res;
  res.value = run(n, res.evaluations);
  const ComplexMatrix coarse = run(std::max(2, (2 * n) / 3), res.evaluations);
  res.err_estimate = max_norm(res.value - coarse);
  return res;
}

QuadResult channel_convolution(const ComplexVector& omega, const std::function<ComplexMatrix(double)>& g,
                               std::span<const double> breaks, double x, const QuadSpec& spec) {
  if (!(x > 0.0)) throw Error(ErrorKind::PreconditionViolated, "integration endpoint must be positive");
  std::vector<double> edges{0.0};
  for (double b : breaks)
    if (b > edges.back() && b < x) edges.push_back(b);
  edges.push_back(x);

  QuadResult total;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double lo = edges[p];
    const double hi = edges[p + 1];
    const double gap = x - hi;
    PieceIntegrand integrand = [&](const QuadNode& q) -> ComplexMatrix {
      const double dist = gap + q.to_hi;
      const double ln_d = std::log(dist);
      ComplexMatrix v = g(q.t);
      if (v.rows() != omega.size())
        throw Error(ErrorKind::DimensionMismatch, "integrand has " + std::to_string(v.rows()) + " rows, kernel has " +
                                                      std::to_string(omega.size()) + " channels");
      for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i) *= std::exp(omega(i) * ln_d);
      return v;
    };
    const bool use_ts = p == 0 || p + 2 == edges.size() || gap < hi - lo;
    QuadResult piece = use_ts ? tanh_sinh(lo, hi, integrand, spec) : gauss_legendre(lo, hi, integrand);
    if (total.value.size() == 0) total.value = std::move(piece.value);
    else total.value += piece.value;
    total.err_estimate += piece.err_estimate;
    total.evaluations += piece.evaluations;
  }
  return total;
}

QuadResult singular_convolution(const EigenSystem& a, const MatrixFn& f, double x, const QuadSpec& spec) {
  spec.validate();
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a.values(i).real() > 0.0))
      throw Error(ErrorKind::EigenvalueOutOfDomain,
                  "kernel order eigenvalue has non-positive real part: " + std::to_string(a.values(i).real()));
  if (f.rows() != a.size())
    throw Error(ErrorKind::DimensionMismatch, "function has " + std::to_string(f.rows()) + " rows, order matrix is " +
                                                  std::to_string(a.size()) + "x" + std::to_string(a.size()));
  const ComplexVector omega = a.values.array() - 1.0;
  auto g = [&](double t) -> ComplexMatrix {
    try {
      return a.vectors_inv * f(t);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::DomainError)
        throw Error(ErrorKind::FunctionEvalError, std::string(e.what()) + " (quadrature node t = " +
                                                      std::to_string(t) + ")");
      throw;
    }
  };
  QuadResult r = channel_convolution(omega, g, f.breakpoints(), x, spec);
  r.value = a.vectors * r.value;
  r.err_estimate *= a.vectors.cwiseAbs().rowwise().sum().maxCoeff();
  return r;
}

QuadResult singular_convolution(const ComplexMatrix& a, const MatrixFn& f, double x, const QuadSpec& spec) {
  return singular_convolution(eig_decompose(a), f, x, spec);
}

ScalarQuadResult gamma_tail_quadrature(cplx lambda, double upper_cut, const QuadSpec& spec) {
  spec.validate();
  if (!(lambda.real() > 0.0))
    throw Error(ErrorKind::EigenvalueOutOfDomain, "gamma integral needs Re(lambda) > 0");
  if (!(upper_cut > 0.0)) throw Error(ErrorKind::PreconditionViolated, "upper_cut must be positive");
  const cplx p = lambda - 1.0;
  QuadResult r = tanh_sinh(
      0.0, upper_cut,
      [&](const QuadNode& q) {
        ComplexMatrix v(1, 1);
        v(0, 0) = std::exp(p * std::log(q.from_lo) - q.t);
        return v;
      },
      spec);
  return {r.value(0, 0), r.err_estimate, r.evaluations};
}

ScalarQuadResult beta_quadrature(cplx a, cplx b, const QuadSpec& spec) {
  spec.validate();
  if (!(a.real() > 0.0) || !(b.real() > 0.0))
    throw Error(ErrorKind::EigenvalueOutOfDomain, "beta integral needs positive real parts");
  QuadResult r = tanh_sinh(
      0.0, 1.0,
      [&](const QuadNode& q) {
        ComplexMatrix v(1, 1);
        v(0, 0) = std::exp((a - 1.0) * std::log(q.to_hi) + (b - 1.0) * std::log(q.from_lo));
        return v;
      },
      spec);
  return {r.value(0, 0), r.err_estimate, r.evaluations};
}

}  // namespace mocalc

#include "mocalc/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mocalc/gammafn.hpp"

namespace mocalc {

namespace {

double row_sum_norm(const ComplexMatrix& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

std::string describe(cplx z) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
  return buf;
}

QuadResult zero_result(Eigen::Index rows, Eigen::Index cols) {
  QuadResult r;
  r.value = ComplexMatrix::Zero(rows, cols);
  return r;
}

double max_of(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(ErrorKind::PreconditionViolated, "empty evaluation grid");
  for (double x : xs)
    if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::PreconditionViolated, "grid points must be positive");
  return *std::max_element(xs.begin(), xs.end());
}

void require_commuting(const ComplexMatrix& m, const ComplexMatrix& n) {
  require_same_size(m, n, "order matrices");
  if (!commute_check(m, n, kCommuteTol)) throw Error(ErrorKind::NotCommuting, "order matrices M and N do not commute");
}

}  // namespace

void OperatorConfig::validate() const {
  quad.validate();
  sampling.validate();
  if (!(fd_step_scale > 0.0 && fd_step_scale <= 0.1))
    throw Error(ErrorKind::PreconditionViolated, "fd_step_scale must lie in (0, 0.1]");
  if (fd_order != 2 && fd_order != 4) throw Error(ErrorKind::PreconditionViolated, "fd_order must be 2 or 4");
}

void require_integral_window(const ComplexVector& values, const char* what) {
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!(values(i).real() > 0.0))
      throw Error(ErrorKind::EigenvalueOutOfDomain,
                  std::string(what) + " has eigenvalue " + describe(values(i)) + "; integral needs Re > 0");
}

void require_derivative_window(const ComplexVector& values, const char* what) {
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!(values(i).real() > 0.0 && values(i).real() < 1.0))
      throw Error(ErrorKind::EigenvalueOutOfDomain,
                  std::string(what) + " has eigenvalue " + describe(values(i)) + "; derivative needs 0 < Re < 1");
}

OrderIntegral::OrderIntegral(const ComplexMatrix& m) : OrderIntegral(m, eig_decompose(m)) {}

OrderIntegral::OrderIntegral(const ComplexMatrix& m, EigenSystem es) : m_(m), es_(std::move(es)) {
  require_integral_window(es_.values, "integral order");
  rgamma_ = mat_gamma_inv(es_);
  rgamma_norm_ = row_sum_norm(rgamma_);
}

QuadResult OrderIntegral::operator()(const MatrixFn& f, double x, const QuadSpec& spec) const {
  if (!(x > 0.0)) throw Error(ErrorKind::PreconditionViolated, "integral needs x > 0");
  if (f.rows() != m_.rows())
    throw Error(ErrorKind::DimensionMismatch, "function has " + std::to_string(f.rows()) + " rows, order is " +
                                                  std::to_string(m_.rows()) + "x" + std::to_string(m_.rows()));
  if (f.is_zero()) return zero_result(f.rows(), f.cols());
  QuadResult r = singular_convolution(es_, f, x, spec);
  r.value = rgamma_ * r.value;
  r.err_estimate *= rgamma_norm_;
  return r;
}

OrderDerivative::OrderDerivative(const ComplexMatrix& m) : m_(m) {
  require_derivative_window(eig_decompose(m).values, "derivative order");
  complement_ = eig_decompose(ComplexMatrix(identity(m.rows()) - m));
  rgamma_ = mat_gamma_inv(complement_);
  rgamma_norm_ = row_sum_norm(rgamma_);
}

QuadResult OrderDerivative::operator()(const MatrixFn& f, double x, const OperatorConfig& cfg,
                                       bool relative_step) const {
  if (f.rows() != m_.rows())
    throw Error(ErrorKind::DimensionMismatch, "function has " + std::to_string(f.rows()) + " rows, order is " +
                                                  std::to_string(m_.rows()) + "x" + std::to_string(m_.rows()));
  const double h = relative_step ? cfg.fd_step_scale * x : stencil_step(x, cfg);
  if (!(x - 2.0 * h > 0.0))
    throw Error(ErrorKind::StencilOutOfDomain, "derivative stencil at x = " + std::to_string(x) + " with h = " +
                                                   std::to_string(h) + " reaches t <= 0");
  if (f.is_zero()) return zero_result(f.rows(), f.cols());

  // Differencing divides the quadrature error by h, so tighten it to match.
  const QuadSpec inner = cfg.quad.tightened(cfg.fd_step_scale);
  const double offsets[4] = {-2.0, -1.0, 1.0, 2.0};
  ComplexMatrix c[4];
  QuadResult out;
  double quad_err = 0.0;
  for (int s = 0; s < 4; ++s) {
    QuadResult r = singular_convolution(complement_, f, x + offsets[s] * h, inner);
    c[s] = std::move(r.value);
    quad_err = std::max(quad_err, r.err_estimate);
    out.evaluations += r.evaluations;
  }
  const ComplexMatrix d2 = (c[2] - c[1]) / (2.0 * h);
  const ComplexMatrix d2_wide = (c[3] - c[0]) / (4.0 * h);
  const ComplexMatrix d4 = (c[0] - 8.0 * c[1] + 8.0 * c[2] - c[3]) / (12.0 * h);
  ComplexMatrix d;
  double fd_err;
  if (cfg.fd_order == 4) {
    d = d4;
    fd_err = max_norm(d4 - d2);
    quad_err *= 1.5 / h;
  } else {
    d = d2;
    fd_err = max_norm(d2 - d2_wide);
    quad_err *= 1.0 / h;
  }
  out.value = rgamma_ * d;
  out.err_estimate = rgamma_norm_ * (quad_err + fd_err);
  return out;
}

QuadResult j_m(const ComplexMatrix& m, const MatrixFn& f, double x, const OperatorConfig& cfg) {
  cfg.validate();
  return OrderIntegral(m)(f, x, cfg.quad);
}

QuadResult d_m(const ComplexMatrix& m, const MatrixFn& f, double x, const OperatorConfig& cfg) {
  cfg.validate();
  return OrderDerivative(m)(f, x, cfg);
}

double stencil_step(double x, const OperatorConfig& cfg) { return std::max(1e-4, cfg.fd_step_scale * x); }

double stencil_reach(double x_max, const OperatorConfig& cfg) {
  return (x_max + 2.0 * stencil_step(x_max, cfg)) * (1.0 + 1e-9);
}

std::shared_ptr<const PanelFunction> sample_integral(const OrderIntegral& op, const MatrixFn& f,
                                                     const PanelLayoutPtr& layout, const QuadSpec& spec) {
  return sample(layout, op.order().rows(), f.cols(), [&](double t) { return op(f, t, spec).value; });
}

nlohmann::json ResidualReport::to_json() const {
  return {{"xs", xs}, {"residuals", residuals}, {"budgets", budgets}, {"max_residual", max_residual}};
}

namespace {

ResidualReport compare(const std::vector<double>& xs, const std::function<QuadResult(double)>& lhs,
                       const std::function<QuadResult(double)>& rhs) {
  ResidualReport rep;
  rep.xs = xs;
  rep.residuals.resize(xs.size());
  rep.budgets.resize(xs.size());
  parallel_for(static_cast<int>(xs.size()), [&](int i) {
    const QuadResult a = lhs(xs[static_cast<std::size_t>(i)]);
    const QuadResult b = rhs(xs[static_cast<std::size_t>(i)]);
    rep.residuals[static_cast<std::size_t>(i)] = max_norm(a.value - b.value);
    rep.budgets[static_cast<std::size_t>(i)] = a.err_estimate + b.err_estimate;
  });
  for (double r : rep.residuals) rep.max_residual = std::max(rep.max_residual, r);
  return rep;
}

QuadResult exact(const MatrixFn& f, double x) {
  QuadResult r;
  r.value = f(x);
  return r;
}

}  // namespace

ResidualReport verify_semigroup(const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& f,
                                const std::vector<double>& xs, const OperatorConfig& cfg) {
  cfg.validate();
  require_commuting(m, n);
  const OrderIntegral jm(m), jn(n), jmn(ComplexMatrix(m + n));
  const auto layout = std::make_shared<PanelLayout>(max_of(xs), cfg.sampling);
  const auto inner = sample_integral(jn, f, layout, cfg.quad);
  return compare(
      xs, [&](double x) { return jm(*inner, x, cfg.quad); }, [&](double x) { return jmn(f, x, cfg.quad); });
}

ResidualReport verify_inverse(const ComplexMatrix& m, const MatrixFn& f, const std::vector<double>& xs,
                              const OperatorConfig& cfg) {
  return verify_mixed(m, m, f, xs, cfg);
}

ResidualReport verify_mixed(const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& f,
                            const std::vector<double>& xs, const OperatorConfig& cfg) {
  cfg.validate();
  require_commuting(m, n);
  const OrderDerivative dm(m);
  const OrderIntegral jn(n);
  const ComplexMatrix diff = n - m;
  std::optional<OrderIntegral> jd;
  if (max_norm(diff) > 1e-12 * std::max(1.0, max_norm(n))) jd.emplace(diff);
  const auto layout = std::make_shared<PanelLayout>(stencil_reach(max_of(xs), cfg), cfg.sampling);
  const auto inner = sample_integral(jn, f, layout, cfg.quad);
  return compare(
      xs, [&](double x) { return dm(*inner, x, cfg); },
      [&](double x) { return jd ? (*jd)(f, x, cfg.quad) : exact(f, x); });
}

}  // namespace mocalc

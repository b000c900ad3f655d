#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocalc/exprfn.hpp"
#include "mocalc/function.hpp"
#include "mocalc/matcore.hpp"
#include "mocalc/quad.hpp"
#include "mocalc/sampling.hpp"

namespace mocalc {

struct OperatorConfig {
  QuadSpec quad;
  /// Stencil step h = max(1e-4, fd_step_scale * x).
  double fd_step_scale = 1e-3;
  int fd_order = 4;
  SamplingSpec sampling;

  void validate() const;
};

/// Riemann-Liouville integral of matrix order M,
/// J^M F(x) = Gamma^{-1}(M) * int_0^x (x - t)^{M - I} F(t) dt.
class OrderIntegral {
 public:
  explicit OrderIntegral(const ComplexMatrix& m);
  OrderIntegral(const ComplexMatrix& m, EigenSystem es);

  QuadResult operator()(const MatrixFn& f, double x, const QuadSpec& spec) const;
  const ComplexMatrix& order() const { return m_; }

 private:
  ComplexMatrix m_;
  EigenSystem es_;
  ComplexMatrix rgamma_;
  double rgamma_norm_;
};

/// Riemann-Liouville derivative for orders with eigenvalues in the strip
/// 0 < Re(lambda) < 1: Gamma^{-1}(I - M) d/dx of the convolution with
/// (x - t)^{-M}, differentiated by a central stencil.
class OrderDerivative {
 public:
  explicit OrderDerivative(const ComplexMatrix& m);

  /// `relative_step` uses h = fd_step_scale * x with no floor, so points
  /// arbitrarily close to 0 are admissible (used when sampling derivatives).
  QuadResult operator()(const MatrixFn& f, double x, const OperatorConfig& cfg, bool relative_step = false) const;
  const ComplexMatrix& order() const { return m_; }

 private:
  ComplexMatrix m_;
  EigenSystem complement_;  // of I - M
  ComplexMatrix rgamma_;
  double rgamma_norm_;
};

QuadResult j_m(const ComplexMatrix& m, const MatrixFn& f, double x, const OperatorConfig& cfg);
QuadResult d_m(const ComplexMatrix& m, const MatrixFn& f, double x, const OperatorConfig& cfg);

/// Step used by d_m at x.
double stencil_step(double x, const OperatorConfig& cfg);
/// Upper end of the sampling range needed to differentiate at every point up
/// to x_max.
double stencil_reach(double x_max, const OperatorConfig& cfg);

/// Throws EigenvalueOutOfDomain unless every eigenvalue has Re in (0, 1).
void require_derivative_window(const ComplexVector& values, const char* what);
/// Throws EigenvalueOutOfDomain unless every eigenvalue has Re > 0.
void require_integral_window(const ComplexVector& values, const char* what);

/// Samples x -> J^M F(x) on the layout (the inner stage of a composition).
std::shared_ptr<const PanelFunction> sample_integral(const OrderIntegral& op, const MatrixFn& f,
                                                     const PanelLayoutPtr& layout, const QuadSpec& spec);

struct ResidualReport {
  std::vector<double> xs;
  std::vector<double> residuals;
  /// Numerical error estimate of both sides at each point.
  std::vector<double> budgets;
  double max_residual = 0.0;

  nlohmann::json to_json() const;
};

/// ||J^M (J^N F)(x) - J^{M+N} F(x)|| per point.
ResidualReport verify_semigroup(const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& f,
                                const std::vector<double>& xs, const OperatorConfig& cfg);
/// ||D^M (J^M F)(x) - F(x)|| per point.
ResidualReport verify_inverse(const ComplexMatrix& m, const MatrixFn& f, const std::vector<double>& xs,
                              const OperatorConfig& cfg);
/// ||D^M (J^N F)(x) - J^{N-M} F(x)|| per point; N = M is the inverse check.
ResidualReport verify_mixed(const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& f,
                            const std::vector<double>& xs, const OperatorConfig& cfg);

}  // namespace mocalc

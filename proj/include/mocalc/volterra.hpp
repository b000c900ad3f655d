#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "mocalc/power_terms.hpp"
#include "mocalc/sampling.hpp"

namespace mocalc {

/// A function in an eigenbasis: piecewise-polynomial part plus explicit
/// power terms. When `basis` is set the value is mapped back as basis * v.
class BasisFunction final : public MatrixFn {
 public:
  BasisFunction(std::shared_ptr<const PanelFunction> regular, PowerSeries series, ComplexMatrix basis = {});

  Eigen::Index rows() const override;
  Eigen::Index cols() const override { return series_.cols(); }
  ComplexMatrix operator()(double t) const override;
  std::span<const double> breakpoints() const override { return regular_->breakpoints(); }
  bool is_zero() const override { return regular_->is_zero() && series_.empty(); }

  /// Value in the eigenbasis (no back transform).
  ComplexMatrix local(double t) const { return (*regular_)(t) + series_(t); }
  const PanelFunction& regular() const { return *regular_; }
  const PowerSeries& series() const { return series_; }
  std::shared_ptr<const PanelFunction> regular_ptr() const { return regular_; }
  /// Same data, different back transform.
  std::shared_ptr<BasisFunction> with_basis(ComplexMatrix basis) const;

 private:
  std::shared_ptr<const PanelFunction> regular_;
  PowerSeries series_;
  ComplexMatrix basis_;
};

/// coef * J^{diag(exponents)} acting row-wise in the eigenbasis.
struct VolterraKernel {
  ComplexMatrix coef;
  ComplexVector exponents;
};

/// Product-integration (Nystrom) solver for second-kind equations
///   C0 G(x) + sum_j C_j (J^{a_j} G)(x) = f(x) + P(x)
/// on a graded panel layout, where J acts channel-wise, f is sampled and P
/// is a PowerSeries. Terms of P that are singular at 0 are carried
/// analytically; the remainder is solved panel by panel (the discrete system
/// is block lower triangular).
class VolterraEngine {
 public:
  explicit VolterraEngine(PanelLayoutPtr layout);

  const PanelLayoutPtr& layout() const { return layout_; }

  BasisFunction solve(const ComplexMatrix& c0, const std::vector<VolterraKernel>& kernels,
                      const std::function<ComplexMatrix(double)>& forcing, const PowerSeries& explicit_terms) const;

  /// J^{diag(a)} applied row-wise to g, nodal values from the weights and
  /// the explicit terms in closed form.
  BasisFunction integrate(const BasisFunction& g, const ComplexVector& a) const;

  /// Row q holds the weights of the node-q integral with kernel
  /// (x_q - t)^{a - 1} / Gamma(a) against each nodal basis function.
  const ComplexMatrix& weights(cplx a) const;

 private:
  PanelLayoutPtr layout_;
  mutable std::mutex mu_;
  mutable std::vector<std::pair<cplx, std::unique_ptr<ComplexMatrix>>> cache_;

  std::vector<ComplexMatrix> apply_weights(const std::vector<ComplexMatrix>& nodal, const ComplexVector& a) const;
};

}  // namespace mocalc

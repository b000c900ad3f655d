#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "mocalc/function.hpp"

namespace mocalc {

/// Layout of the piecewise Chebyshev grid used to sample inner functions.
/// [0, x_max / 4] is split geometrically toward 0 (ratio 2), the rest into
/// equal panels, so functions behaving like t^lambda near 0 are resolved.
struct SamplingSpec {
  int geometric_panels = 36;
  int uniform_panels = 4;
  int nodes_per_panel = 16;

  void validate() const;
};

class PanelLayout {
 public:
  PanelLayout(double x_max, const SamplingSpec& spec);

  double x_max() const { return edges_.back(); }
  int panels() const { return static_cast<int>(edges_.size()) - 1; }
  int nodes_per_panel() const { return per_panel_; }
  int size() const { return static_cast<int>(nodes_.size()); }

  double lo(int p) const { return edges_[static_cast<std::size_t>(p)]; }
  double hi(int p) const { return edges_[static_cast<std::size_t>(p) + 1]; }
  /// Node coordinates, panel-major.
  const std::vector<double>& nodes() const { return nodes_; }
  double node(int p, int k) const { return nodes_[static_cast<std::size_t>(p * per_panel_ + k)]; }
  /// Interior panel boundaries (sorted), usable as quadrature breakpoints.
  std::span<const double> interior_edges() const { return {edges_.data() + 1, edges_.size() - 2}; }

  /// Panel containing t (clamped to the first and last panel).
  int panel_of(double t) const;

  /// Lagrange basis of panel p evaluated at t, written into `out` (size n).
  void basis(int p, double t, double* out) const;

 private:
  std::vector<double> edges_;
  std::vector<double> nodes_;
  std::vector<double> bary_;  // barycentric weights of one panel
  int per_panel_;
};

using PanelLayoutPtr = std::shared_ptr<const PanelLayout>;

/// Piecewise polynomial interpolant of nodal matrix values.
class PanelFunction final : public MatrixFn {
 public:
  PanelFunction(PanelLayoutPtr layout, std::vector<ComplexMatrix> values);

  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  ComplexMatrix operator()(double t) const override;
  std::span<const double> breakpoints() const override { return layout_->interior_edges(); }
  bool is_zero() const override { return zero_; }

  const PanelLayout& layout() const { return *layout_; }
  const std::vector<ComplexMatrix>& values() const { return values_; }

 private:
  PanelLayoutPtr layout_;
  std::vector<ComplexMatrix> values_;
  Eigen::Index rows_, cols_;
  bool zero_;
};

/// Runs body(i) for i in [0, n) on worker threads. Each index writes only its
/// own output slot, so results do not depend on scheduling. The exception of
/// the smallest failing index is rethrown.
void parallel_for(int n, const std::function<void(int)>& body);

/// Samples f at every node of the layout (concurrently) and wraps the result.
std::shared_ptr<const PanelFunction> sample(const PanelLayoutPtr& layout, Eigen::Index rows, Eigen::Index cols,
                                            const std::function<ComplexMatrix(double)>& f);

}  // namespace mocalc

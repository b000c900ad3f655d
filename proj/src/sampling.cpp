#include "mocalc/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

namespace mocalc {

void SamplingSpec::validate() const {
  if (geometric_panels < 1 || geometric_panels > 60 || uniform_panels < 1 || uniform_panels > 1000 ||
      nodes_per_panel < 2 || nodes_per_panel > 64)
    throw Error(ErrorKind::PreconditionViolated, "sampling layout out of range");
}

PanelLayout::PanelLayout(double x_max, const SamplingSpec& spec) : per_panel_(spec.nodes_per_panel) {
  spec.validate();
  if (!(x_max > 0.0) || !std::isfinite(x_max))
    throw Error(ErrorKind::PreconditionViolated, "sampling range must be positive");
  const double split = x_max / spec.uniform_panels;
  edges_.push_back(0.0);
  for (int j = spec.geometric_panels; j >= 1; --j) edges_.push_back(std::ldexp(split, -j));
  for (int j = 1; j < spec.uniform_panels; ++j) edges_.push_back(split * j);
  edges_.push_back(x_max);

  // First-kind Chebyshev nodes, ascending, with their barycentric weights.
  const int n = per_panel_;
  std::vector<double> ref(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double theta = (2.0 * (n - 1 - k) + 1.0) * std::numbers::pi / (2.0 * n);
    ref[static_cast<std::size_t>(k)] = std::cos(theta);
    bary_.push_back(((n - 1 - k) % 2 == 0 ? 1.0 : -1.0) * std::sin(theta));
  }
  for (int p = 0; p < panels(); ++p) {
    const double mid = 0.5 * (lo(p) + hi(p));
    const double half = 0.5 * (hi(p) - lo(p));
    for (double r : ref) nodes_.push_back(mid + half * r);
  }
}

int PanelLayout::panel_of(double t) const {
  const auto it = std::upper_bound(edges_.begin() + 1, edges_.end() - 1, t);
  return static_cast<int>(it - edges_.begin()) - 1;
}

void PanelLayout::basis(int p, double t, double* out) const {
  const double* x = nodes_.data() + static_cast<std::size_t>(p * per_panel_);
  double denom = 0.0;
  for (int k = 0; k < per_panel_; ++k) {
    const double d = t - x[k];
    if (d == 0.0) {
      std::fill(out, out + per_panel_, 0.0);
      out[k] = 1.0;
      return;
    }
    out[k] = bary_[static_cast<std::size_t>(k)] / d;
    denom += out[k];
  }
  for (int k = 0; k < per_panel_; ++k) out[k] /= denom;
}

PanelFunction::PanelFunction(PanelLayoutPtr layout, std::vector<ComplexMatrix> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != layout_->size())
    throw Error(ErrorKind::DimensionMismatch, "sample count does not match the layout");
  rows_ = values_.front().rows();
  cols_ = values_.front().cols();
  zero_ = std::all_of(values_.begin(), values_.end(), [](const ComplexMatrix& v) { return v.isZero(0.0); });
}

ComplexMatrix PanelFunction::operator()(double t) const {
  const PanelLayout& l = *layout_;
  if (!(t >= 0.0) || t > l.x_max() * (1.0 + 1e-12))
    throw Error(ErrorKind::DomainError, "sampled function evaluated at t = " + std::to_string(t) +
                                            " outside [0, " + std::to_string(l.x_max()) + "]");
  if (zero_) return ComplexMatrix::Zero(rows_, cols_);
  const int p = l.panel_of(t);
  const int n = l.nodes_per_panel();
  double w[64];
  l.basis(p, t, w);
  ComplexMatrix out = ComplexMatrix::Zero(rows_, cols_);
  for (int k = 0; k < n; ++k) out += w[k] * values_[static_cast<std::size_t>(p * n + k)];
  return out;
}

void parallel_for(int n, const std::function<void(int)>& body) {
  if (n <= 0) return;
  const int workers = std::min<int>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto run = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::shared_ptr<const PanelFunction> sample(const PanelLayoutPtr& layout, Eigen::Index rows, Eigen::Index cols,
                                            const std::function<ComplexMatrix(double)>& f) {
  std::vector<ComplexMatrix> values(static_cast<std::size_t>(layout->size()));
  parallel_for(layout->size(), [&](int i) {
    ComplexMatrix v = f(layout->nodes()[static_cast<std::size_t>(i)]);
    if (v.rows() != rows || v.cols() != cols)
      throw Error(ErrorKind::DimensionMismatch, "sampled value has unexpected shape");
    values[static_cast<std::size_t>(i)] = std::move(v);
  });
  return std::make_shared<PanelFunction>(layout, std::move(values));
}

}  // namespace mocalc

#include "mocalc/volterra.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "mocalc/gammafn.hpp"
#include "mocalc/quad.hpp"

namespace mocalc {

BasisFunction::BasisFunction(std::shared_ptr<const PanelFunction> regular, PowerSeries series, ComplexMatrix basis)
    : regular_(std::move(regular)), series_(std::move(series)), basis_(std::move(basis)) {
  if (regular_->rows() != series_.rows() || regular_->cols() != series_.cols())
    throw Error(ErrorKind::DimensionMismatch, "regular part and power terms differ in shape");
}

Eigen::Index BasisFunction::rows() const { return basis_.size() ? basis_.rows() : series_.rows(); }

ComplexMatrix BasisFunction::operator()(double t) const {
  ComplexMatrix v = local(t);
  return basis_.size() ? ComplexMatrix(basis_ * v) : v;
}

std::shared_ptr<BasisFunction> BasisFunction::with_basis(ComplexMatrix basis) const {
  return std::make_shared<BasisFunction>(regular_, series_, std::move(basis));
}

VolterraEngine::VolterraEngine(PanelLayoutPtr layout) : layout_(std::move(layout)) {}

const ComplexMatrix& VolterraEngine::weights(cplx a) const {
  {
    std::lock_guard lock(mu_);
    for (const auto& [key, w] : cache_)
      if (key == a) return *w;
  }
  if (!(a.real() > 0.0)) throw Error(ErrorKind::EigenvalueOutOfDomain, "kernel exponent needs Re > 0");
  const PanelLayout& l = *layout_;
  const int n = l.nodes_per_panel();
  const int total = l.size();
  auto w = std::make_unique<ComplexMatrix>(ComplexMatrix::Zero(total, total));
  const cplx am1 = a - 1.0;
  const cplx scale = rgamma(a);
  QuadSpec spec;
  spec.rel_tol = 1e-13;
  spec.abs_tol = 1e-300;
  const GaussRule& gl = gauss_rule(24);

  parallel_for(total, [&](int q) {
    const int own = q / n;
    const double x = l.nodes()[static_cast<std::size_t>(q)];
    double basis[64];
    for (int p = 0; p <= own; ++p) {
      const double lo = l.lo(p);
      const double hi = p == own ? x : l.hi(p);
      const double gap = p == own ? 0.0 : x - hi;
      const double width = hi - lo;
      ComplexMatrix acc = ComplexMatrix::Zero(n, 1);
      if (p < own && gap >= width) {
        const double half = 0.5 * width;
        for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
          const double t = lo + half * (1.0 + gl.nodes[g]);
          const double dist = gap + half * (1.0 - gl.nodes[g]);
          l.basis(p, t, basis);
          const cplx kern = gl.weights[g] * half * std::exp(am1 * std::log(dist));
          for (int k = 0; k < n; ++k) acc(k, 0) += kern * basis[k];
        }
      } else {
        acc = tanh_sinh(
                  lo, hi,
                  [&](const QuadNode& node) {
                    double b[64];
                    l.basis(p, node.t, b);
                    const cplx kern = std::exp(am1 * std::log(gap + node.to_hi));
                    ComplexMatrix v(n, 1);
                    for (int k = 0; k < n; ++k) v(k, 0) = kern * b[k];
                    return v;
                  },
                  spec)
                  .value;
      }
      w->block(q, p * n, 1, n) = scale * acc.transpose();
    }
  });

  std::lock_guard lock(mu_);
  for (const auto& [key, existing] : cache_)
    if (key == a) return *existing;
  cache_.emplace_back(a, std::move(w));
  return *cache_.back().second;
}

std::vector<ComplexMatrix> VolterraEngine::apply_weights(const std::vector<ComplexMatrix>& nodal,
                                                         const ComplexVector& a) const {
  const int total = layout_->size();
  const Eigen::Index rows = nodal.front().rows();
  const Eigen::Index cols = nodal.front().cols();
  std::vector<ComplexMatrix> out(static_cast<std::size_t>(total), ComplexMatrix::Zero(rows, cols));
  for (Eigen::Index i = 0; i < rows; ++i) {
    ComplexMatrix chan(total, cols);
    for (int q = 0; q < total; ++q) chan.row(q) = nodal[static_cast<std::size_t>(q)].row(i);
    const ComplexMatrix z = weights(a(i)) * chan;
    for (int q = 0; q < total; ++q) out[static_cast<std::size_t>(q)].row(i) = z.row(q);
  }
  return out;
}

BasisFunction VolterraEngine::integrate(const BasisFunction& g, const ComplexVector& a) const {
  PowerSeries series = g.series().integrate(a);
  if (g.regular().is_zero()) return BasisFunction(g.regular_ptr(), std::move(series));
  auto regular = std::make_shared<PanelFunction>(layout_, apply_weights(g.regular().values(), a));
  return BasisFunction(std::move(regular), std::move(series));
}

BasisFunction VolterraEngine::solve(const ComplexMatrix& c0, const std::vector<VolterraKernel>& kernels,
                                    const std::function<ComplexMatrix(double)>& forcing,
                                    const PowerSeries& explicit_terms) const {
  const Eigen::Index rows = c0.rows();
  const Eigen::Index cols = explicit_terms.cols();
  const Eigen::PartialPivLU<ComplexMatrix> c0_lu(c0);
  const ComplexMatrix c0_inv = c0_lu.inverse();

  // Peel the terms that are singular at 0: each round solves C0 T = (singular
  // remainder) exactly and pushes the kernel images of T one order up.
  auto [singular, regular_terms] = explicit_terms.split(0.0);
  PowerSeries peeled(rows, cols);
  PowerSeries t = singular.left_multiply(c0_inv);
  for (int round = 0; round < 4096 && !t.empty(); ++round) {
    peeled.add(t);
    PowerSeries image(rows, cols);
    for (const VolterraKernel& k : kernels) image.add(t.integrate(k.exponents).left_multiply(k.coef));
    auto [still_singular, smooth] = image.split(0.0);
    regular_terms.add(smooth, -1.0);
    t = still_singular.left_multiply(-c0_inv);
  }
  if (!t.empty()) throw Error(ErrorKind::ToleranceUnmet, "singular power terms did not clear");

  const PanelLayout& l = *layout_;
  const int total = l.size();
  const int n = l.nodes_per_panel();
  if (!forcing && regular_terms.empty()) {
    std::vector<ComplexMatrix> zeros(static_cast<std::size_t>(total), ComplexMatrix::Zero(rows, cols));
    return BasisFunction(std::make_shared<PanelFunction>(layout_, std::move(zeros)), std::move(peeled));
  }

  std::vector<ComplexMatrix> rhs(static_cast<std::size_t>(total));
  parallel_for(total, [&](int q) {
    const double x = l.nodes()[static_cast<std::size_t>(q)];
    ComplexMatrix v = regular_terms(x);
    if (forcing) v += forcing(x);
    if (!v.allFinite())
      throw Error(ErrorKind::FunctionEvalError, "forcing is not finite at t = " + std::to_string(x));
    rhs[static_cast<std::size_t>(q)] = std::move(v);
  });

  // Weight matrices per kernel and channel.
  std::vector<std::vector<const ComplexMatrix*>> w(kernels.size());
  for (std::size_t j = 0; j < kernels.size(); ++j)
    for (Eigen::Index i = 0; i < rows; ++i) w[j].push_back(&weights(kernels[j].exponents(i)));

  // Solution stored channel-major: chan[i] is total x cols.
  std::vector<ComplexMatrix> chan(static_cast<std::size_t>(rows), ComplexMatrix::Zero(total, cols));
  const Eigen::Index block = n * rows;
  for (int p = 0; p < l.panels(); ++p) {
    const int start = p * n;
    ComplexMatrix a = ComplexMatrix::Zero(block, block);
    ComplexMatrix b(block, cols);
    for (int kq = 0; kq < n; ++kq) {
      const int q = start + kq;
      ComplexMatrix r = rhs[static_cast<std::size_t>(q)];
      for (std::size_t j = 0; j < kernels.size(); ++j) {
        if (start > 0) {
          ComplexMatrix hist(rows, cols);
          for (Eigen::Index i = 0; i < rows; ++i)
            hist.row(i) = w[j][static_cast<std::size_t>(i)]->row(q).head(start) *
                          chan[static_cast<std::size_t>(i)].topRows(start);
          r -= kernels[j].coef * hist;
        }
        for (int k = 0; k < n; ++k)
          for (Eigen::Index i = 0; i < rows; ++i) {
            const cplx wq = (*w[j][static_cast<std::size_t>(i)])(q, start + k);
            for (Eigen::Index rr = 0; rr < rows; ++rr) a(kq * rows + rr, k * rows + i) += kernels[j].coef(rr, i) * wq;
          }
      }
      for (Eigen::Index rr = 0; rr < rows; ++rr)
        for (Eigen::Index i = 0; i < rows; ++i) a(kq * rows + rr, kq * rows + i) += c0(rr, i);
      b.middleRows(kq * rows, rows) = r;
    }
    const ComplexMatrix x = a.partialPivLu().solve(b);
    if (!x.allFinite()) throw Error(ErrorKind::SingularCoefficient, "panel system is singular");
    for (int k = 0; k < n; ++k)
      for (Eigen::Index i = 0; i < rows; ++i) chan[static_cast<std::size_t>(i)].row(start + k) = x.row(k * rows + i);
  }

  std::vector<ComplexMatrix> nodal(static_cast<std::size_t>(total), ComplexMatrix(rows, cols));
  for (int q = 0; q < total; ++q)
    for (Eigen::Index i = 0; i < rows; ++i) nodal[static_cast<std::size_t>(q)].row(i) = chan[static_cast<std::size_t>(i)].row(q);
  return BasisFunction(std::make_shared<PanelFunction>(layout_, std::move(nodal)), std::move(peeled));
}

}  // namespace mocalc

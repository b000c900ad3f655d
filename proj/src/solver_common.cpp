#include <algorithm>
#include <cmath>

#include <Eigen/SVD>

#include "mocalc/gammafn.hpp"
#include "solver_detail.hpp"

namespace mocalc::detail {

void validate_grid(const std::vector<double>& grid, const char* what) {
  if (grid.empty()) throw Error(ErrorKind::MalformedInput, std::string(what) + " is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw Error(ErrorKind::MalformedInput, std::string(what) + " points must be positive and finite");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw Error(ErrorKind::MalformedInput, std::string(what) + " must be strictly increasing");
  }
}

void require_square_family(const std::vector<ComplexMatrix>& mats, Eigen::Index n, const char* what) {
  for (std::size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != mats[i].cols())
      throw Error(ErrorKind::NonSquare, std::string(what) + " " + std::to_string(i + 1) + " is not square");
    if (mats[i].rows() != n)
      throw Error(ErrorKind::DimensionMismatch, std::string(what) + " " + std::to_string(i + 1) + " is " +
                                                    std::to_string(mats[i].rows()) + "x" +
                                                    std::to_string(mats[i].cols()) + ", expected " +
                                                    std::to_string(n) + "x" + std::to_string(n));
  }
}

void require_commuting(const std::vector<ComplexMatrix>& mats, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = i + 1; j < mats.size(); ++j)
      if (!commute_check(mats[i], mats[j], kCommuteTol))
        throw Error(ErrorKind::NotCommuting, names[i] + " and " + names[j] + " do not commute");
}

void require_invertible(const ComplexMatrix& c, const std::string& name) {
  const Eigen::JacobiSVD<ComplexMatrix> svd(c);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(s.size() - 1) > 1e-12 * s(0)))
    throw Error(ErrorKind::SingularCoefficient, name + " is not invertible");
}

void require_forcing_vanishes(const MatrixFunction& phi, const OperatorConfig& cfg) {
  ComplexMatrix at0;
  try {
    at0 = eval_matrix(phi, 0.0);
  } catch (const Error& e) {
    throw Error(ErrorKind::PreconditionViolated, std::string("forcing must satisfy phi(0) = 0; ") + e.what());
  }
  const double v = max_norm(at0);
  if (!(v <= cfg.quad.abs_tol))
    throw Error(ErrorKind::PreconditionViolated,
                "forcing must satisfy phi(0) = 0, got |phi(0)| = " + std::to_string(v));
}

std::vector<std::string> labels(const char* stem, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(std::string(stem) + "_" + std::to_string(i + 1));
  return out;
}

namespace {

class KernelTermFn final : public MatrixFn {
 public:
  KernelTermFn(ComplexMatrix v, PowerSeries s) : v_(std::move(v)), s_(std::move(s)) {}
  Eigen::Index rows() const override { return v_.rows(); }
  Eigen::Index cols() const override { return s_.cols(); }
  ComplexMatrix operator()(double t) const override { return v_ * s_(t); }
  bool is_zero() const override { return s_.empty(); }

 private:
  ComplexMatrix v_;
  PowerSeries s_;
};

class SumFn final : public MatrixFn {
 public:
  SumFn(MatrixFnPtr a, MatrixFnPtr b) : a_(std::move(a)), b_(std::move(b)) {
    std::merge(a_->breakpoints().begin(), a_->breakpoints().end(), b_->breakpoints().begin(),
               b_->breakpoints().end(), std::back_inserter(breaks_));
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());
  }
  Eigen::Index rows() const override { return a_->rows(); }
  Eigen::Index cols() const override { return a_->cols(); }
  ComplexMatrix operator()(double t) const override { return (*a_)(t) + (*b_)(t); }
  std::span<const double> breakpoints() const override { return breaks_; }
  bool is_zero() const override { return a_->is_zero() && b_->is_zero(); }

 private:
  MatrixFnPtr a_, b_;
  std::vector<double> breaks_;
};

}  // namespace

MatrixFnPtr kernel_term_fn(const ComplexMatrix& v, const ComplexMatrix& v_inv, const ComplexVector& e,
                           const ComplexMatrix& k) {
  return std::make_shared<KernelTermFn>(v, PowerSeries::kernel_term(e, v_inv * k));
}

MatrixFnPtr sum_fn(MatrixFnPtr a, MatrixFnPtr b) {
  if (a->rows() != b->rows() || a->cols() != b->cols())
    throw Error(ErrorKind::DimensionMismatch, "summands differ in shape");
  return std::make_shared<SumFn>(std::move(a), std::move(b));
}

double max_of(const std::vector<double>& grid) { return *std::max_element(grid.begin(), grid.end()); }

std::vector<std::optional<double>> residuals_on(const std::vector<double>& grid,
                                                const std::function<double(double)>& at) {
  const double cutoff = kResidualCutoff * max_of(grid);
  std::vector<std::optional<double>> out(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const double x = grid[static_cast<std::size_t>(i)];
    if (x < cutoff) return;
    try {
      out[static_cast<std::size_t>(i)] = at(x);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StencilOutOfDomain) throw;
    }
  });
  return out;
}

std::vector<ComplexMatrix> values_on(const std::vector<double>& grid, const MatrixFn& f) {
  std::vector<ComplexMatrix> out(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    ComplexMatrix v = f(grid[static_cast<std::size_t>(i)]);
    if (!v.allFinite())
      throw Error(ErrorKind::FunctionEvalError,
                  "solution is not finite at x = " + std::to_string(grid[static_cast<std::size_t>(i)]));
    out[static_cast<std::size_t>(i)] = std::move(v);
  });
  return out;
}

JointEigenbasis check_n_term(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m) {
  if (m.empty()) throw Error(ErrorKind::MalformedInput, "at least one order matrix is required");
  if (c.size() != m.size())
    throw Error(ErrorKind::DimensionMismatch, std::to_string(m.size()) + " orders but " + std::to_string(c.size()) +
                                                  " coefficients");
  const Eigen::Index n = m.front().rows();
  require_square_family(m, n, "order");
  require_square_family(c, n, "coefficient");
  require_commuting(m, labels("M", m.size()));
  require_invertible(c.front(), "C_1");
  JointEigenbasis jb = joint_diagonalize(m);
  require_integral_window(jb.values[0], "M_1");
  for (std::size_t j = 1; j < m.size(); ++j) {
    const std::string what = "A_" + std::to_string(j) + " = M_1 - M_" + std::to_string(j + 1);
    require_integral_window(ComplexVector(jb.values[0] - jb.values[j]), what.c_str());
  }
  return jb;
}

SampledSolution part(std::string name, const std::vector<double>& grid, std::vector<ComplexMatrix> values,
                     std::vector<std::optional<double>> residuals) {
  SampledSolution s;
  s.name = std::move(name);
  s.grid = grid;
  s.values = std::move(values);
  s.residuals = std::move(residuals);
  return s;
}

Solution finish(SolverKind kind, Route route, Eigen::Index dim, std::vector<SampledSolution> parts,
                nlohmann::json meta) {
  Solution s{kind, route, solver_tolerance(kind, dim), std::move(parts), std::move(meta)};
  std::size_t computed = 0;
  for (const auto& p : s.parts)
    for (const auto& r : p.residuals) computed += r.has_value();
  s.meta["residuals_computed"] = computed;
  s.meta["residual_cutoff"] = kind == SolverKind::Iterated ? 0.0 : kResidualCutoff;
  return s;
}

}  // namespace mocalc::detail

namespace mocalc::residual {

namespace {

std::vector<std::optional<double>> none(std::size_t n) { return std::vector<std::optional<double>>(n); }

// Empty when some order is outside the derivative window.
std::optional<std::vector<OrderDerivative>> derivatives(const std::vector<ComplexMatrix>& m) {
  std::vector<OrderDerivative> out;
  try {
    for (const auto& mi : m) out.emplace_back(mi);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EigenvalueOutOfDomain) throw;
    return std::nullopt;
  }
  return out;
}

MatrixFnPtr borrow(const MatrixFn& f) { return MatrixFnPtr(&f, [](const MatrixFn*) {}); }

}  // namespace

std::vector<std::optional<double>> n_term(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                                          const MatrixFn& f, const MatrixFn* rhs, const std::vector<double>& grid,
                                          const OperatorConfig& cfg) {
  const auto ops = derivatives(m);
  if (!ops) return none(grid.size());
  return detail::residuals_on(grid, [&](double x) {
    ComplexMatrix acc = rhs ? ComplexMatrix(-(*rhs)(x)) : ComplexMatrix::Zero(f.rows(), f.cols());
    for (std::size_t j = 0; j < ops->size(); ++j) acc += c[j] * (*ops)[j](f, x, cfg).value;
    return max_norm(acc);
  });
}

double iterated_eigen_reach(std::size_t depth, double x_max, const OperatorConfig& cfg) {
  double r = stencil_reach(x_max, cfg);
  for (std::size_t k = 1; k < depth; ++k) r *= (1.0 + 2.0 * cfg.fd_step_scale) * (1.0 + 1e-9);
  return r;
}

std::vector<std::optional<double>> iterated_eigen(const std::vector<ComplexMatrix>& m, const MatrixFn& f,
                                                  const std::vector<double>& grid, const OperatorConfig& cfg) {
  const auto ops = derivatives(m);
  if (!ops) return none(grid.size());
  const std::size_t depth = m.size();
  const double x_max = detail::max_of(grid);
  // stage k holds D^{M_k} ... D^{M_1} F, sampled with the relative stencil so
  // that it is defined arbitrarily close to 0.
  MatrixFnPtr stage = borrow(f);
  for (std::size_t k = 1; k < depth; ++k) {
    const double reach = iterated_eigen_reach(depth - k, x_max, cfg);
    auto layout = std::make_shared<const PanelLayout>(reach, cfg.sampling);
    const OrderDerivative& d = (*ops)[k - 1];
    const MatrixFn& prev = *stage;
    stage = sample(layout, f.rows(), f.cols(), [&](double t) { return d(prev, t, cfg, true).value; });
  }
  const OrderDerivative& outer = ops->back();
  return detail::residuals_on(grid, [&](double x) { return max_norm(outer(*stage, x, cfg).value - f(x)); });
}

std::vector<std::optional<double>> pde(const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& psi_x,
                                       const MatrixFn& psi_y, const std::vector<double>& grid_x,
                                       const std::vector<double>& grid_y, const OperatorConfig& cfg) {
  const std::size_t total = grid_x.size() * grid_y.size();
  const auto ops = derivatives({m, n});
  if (!ops) return none(total);
  const OrderDerivative& dx = (*ops)[0];
  const OrderDerivative& dy = (*ops)[1];
  const Eigen::Index dim = psi_x.rows();

  std::vector<std::optional<ComplexMatrix>> left(grid_x.size());
  const double cut_x = detail::kResidualCutoff * detail::max_of(grid_x);
  parallel_for(static_cast<int>(grid_x.size()), [&](int i) {
    const double x = grid_x[static_cast<std::size_t>(i)];
    if (x < cut_x) return;
    try {
      left[static_cast<std::size_t>(i)] = dx(psi_x, x, cfg).value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StencilOutOfDomain) throw;
    }
  });

  // D^N (B Psi_y) is linear in the constant matrix B = Psi_x(x), so one
  // derivative per unit matrix E_ab covers every x.
  std::vector<std::optional<std::vector<ComplexMatrix>>> right(grid_y.size());
  const double cut_y = detail::kResidualCutoff * detail::max_of(grid_y);
  parallel_for(static_cast<int>(grid_y.size()), [&](int i) {
    const double y = grid_y[static_cast<std::size_t>(i)];
    if (y < cut_y) return;
    std::vector<ComplexMatrix> parts;
    try {
      for (Eigen::Index a = 0; a < dim; ++a)
        for (Eigen::Index b = 0; b < dim; ++b) {
          const LambdaFn unit(dim, psi_y.cols(), [&](double t) {
            ComplexMatrix out = ComplexMatrix::Zero(dim, psi_y.cols());
            out.row(a) = psi_y(t).row(b);
            return out;
          });
          parts.push_back(dy(unit, y, cfg).value);
        }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::StencilOutOfDomain) throw;
      return;
    }
    right[static_cast<std::size_t>(i)] = std::move(parts);
  });

  std::vector<std::optional<double>> out(total);
  for (std::size_t i = 0; i < grid_x.size(); ++i) {
    if (!left[i]) continue;
    const ComplexMatrix px = psi_x(grid_x[i]);
    for (std::size_t j = 0; j < grid_y.size(); ++j) {
      if (!right[j]) continue;
      ComplexMatrix r = *left[i] * psi_y(grid_y[j]);
      for (Eigen::Index a = 0; a < dim; ++a)
        for (Eigen::Index b = 0; b < dim; ++b) r -= px(a, b) * (*right[j])[static_cast<std::size_t>(a * dim + b)];
      out[i * grid_y.size() + j] = max_norm(r);
    }
  }
  return out;
}

std::pair<std::vector<std::optional<double>>, std::vector<std::optional<double>>> system(
    const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& f, const MatrixFn& g,
    const std::vector<double>& grid, const OperatorConfig& cfg) {
  const auto ops = derivatives({n, m});
  if (!ops) return {none(grid.size()), none(grid.size())};
  auto first = detail::residuals_on(grid, [&](double x) { return max_norm((*ops)[0](f, x, cfg).value + g(x)); });
  auto second = detail::residuals_on(grid, [&](double x) { return max_norm((*ops)[1](g, x, cfg).value - f(x)); });
  return {std::move(first), std::move(second)};
}

}  // namespace mocalc::residual

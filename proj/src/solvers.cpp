#include "mocalc/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "mocalc/gammafn.hpp"
#include "solver_detail.hpp"

namespace mocalc {

namespace {

struct KindName {
  SolverKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {SolverKind::Single, "single"},           {SolverKind::TwoTermNh, "two_term_nh"},
    {SolverKind::NTermNh, "n_term_nh"},       {SolverKind::Eigen, "eigen"},
    {SolverKind::Homogeneous, "homogeneous"}, {SolverKind::Iterated, "iterated"},
    {SolverKind::IteratedEigen, "iterated_eigen"}, {SolverKind::PdeSeparable, "pde_separable"},
    {SolverKind::System, "system"},
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(SolverKind k) {
  for (const auto& e : kKindNames)
    if (e.kind == k) return e.name;
  return "unknown";
}

std::string to_string(Route r) { return r == Route::Volterra ? "volterra" : "closed_form"; }

SolverKind solver_kind_from_string(const std::string& s) {
  for (const auto& e : kKindNames)
    if (s == e.name) return e.kind;
  std::string known;
  for (const auto& e : kKindNames) known += std::string(known.empty() ? "" : ", ") + e.name;
  throw Error(ErrorKind::MalformedInput, "unknown solver '" + s + "' (expected one of " + known + ")");
}

Route route_from_string(const std::string& s) {
  if (s == "volterra") return Route::Volterra;
  if (s == "closed_form") return Route::ClosedForm;
  throw Error(ErrorKind::MalformedInput, "unknown route '" + s + "' (expected volterra or closed_form)");
}

double SampledSolution::max_residual() const {
  double m = 0.0;
  for (const auto& r : residuals)
    if (r) m = std::isnan(*r) ? *r : std::max(m, *r);
  return m;
}

bool SampledSolution::within(double tol) const {
  for (const auto& r : residuals)
    if (r && !(*r <= tol)) return false;
  return true;
}

bool Solution::passed() const {
  for (const auto& p : parts)
    if (!p.within(tolerance)) return false;
  return true;
}

nlohmann::json Solution::to_json() const {
  nlohmann::json out;
  out["solver"] = to_string(solver);
  out["route"] = to_string(route);
  out["tolerance"] = tolerance;
  out["passed"] = passed();
  double worst = 0.0;
  for (const auto& p : parts) worst = std::max(worst, p.max_residual());
  out["max_residual"] = worst;
  out["meta"] = meta;
  out["parts"] = nlohmann::json::array();
  for (const auto& p : parts) {
    nlohmann::json j;
    j["name"] = p.name;
    j["grid"] = p.grid;
    if (!p.grid_y.empty()) j["grid_y"] = p.grid_y;
    j["values"] = nlohmann::json::array();
    for (const auto& v : p.values) j["values"].push_back(matrix_to_json(v));
    j["residuals"] = nlohmann::json::array();
    for (const auto& r : p.residuals) j["residuals"].push_back(r ? nlohmann::json(*r) : nlohmann::json());
    out["parts"].push_back(std::move(j));
  }
  return out;
}

std::string Solution::to_csv() const {
  std::string out;
  if (parts.empty()) return out;
  const SampledSolution& first = parts.front();
  const bool two_d = !first.grid_y.empty();
  out += two_d ? "x,y" : "x";
  for (const auto& p : parts)
    for (Eigen::Index i = 0; i < p.values.front().rows(); ++i)
      for (Eigen::Index j = 0; j < p.values.front().cols(); ++j) {
        const std::string c = p.name + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        out += "," + c + ".re," + c + ".im";
      }
  for (const auto& p : parts) out += parts.size() == 1 ? std::string(",residual") : "," + p.name + ".residual";
  out += "\n";
  for (std::size_t row = 0; row < first.values.size(); ++row) {
    if (two_d) {
      const std::size_t ny = first.grid_y.size();
      out += fmt(first.grid[row / ny]) + "," + fmt(first.grid_y[row % ny]);
    } else {
      out += fmt(first.grid[row]);
    }
    for (const auto& p : parts) {
      const ComplexMatrix& v = p.values[row];
      for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (Eigen::Index j = 0; j < v.cols(); ++j) out += "," + fmt(v(i, j).real()) + "," + fmt(v(i, j).imag());
    }
    for (const auto& p : parts) out += "," + (p.residuals[row] ? fmt(*p.residuals[row]) : std::string());
    out += "\n";
  }
  return out;
}

double solver_tolerance(SolverKind k, Eigen::Index dim) {
  switch (k) {
    case SolverKind::Single:
    case SolverKind::TwoTermNh:
    case SolverKind::NTermNh:
      return 1e-3;
    case SolverKind::Eigen:
    case SolverKind::Homogeneous:
    case SolverKind::IteratedEigen:
    case SolverKind::System:
      return 1e-2;
    case SolverKind::PdeSeparable:
      return 5e-2;
    case SolverKind::Iterated:
      return dim == 1 ? 1e-4 : 1e-3;
  }
  return 0.0;
}

namespace {

using detail::finish;
using detail::part;

enum class Family { Forced, Eigen, Homogeneous };

PanelLayoutPtr layout_for(double reach, const OperatorConfig& cfg) {
  return std::make_shared<const PanelLayout>(reach, cfg.sampling);
}

/// F = J^{M_1} (C_1^{-1} phi) + x^{M_1 - I} Gamma^{-1}(M_1) K by direct
/// quadrature (one term: there is no Volterra equation to solve).
Solution one_term(const ComplexMatrix& c, const ComplexMatrix& m, const MatrixFunction* phi, const ComplexMatrix& k,
                  const JointEigenbasis& jb, const std::vector<double>& grid, const OperatorConfig& cfg,
                  SolverKind kind, Family family) {
  MatrixFnPtr forcing = phi ? MatrixFnPtr(std::make_shared<ExprMatrixFn>(*phi)) : nullptr;
  MatrixFnPtr scaled = forcing ? left_multiply(c.inverse(), forcing) : nullptr;
  const OrderIntegral op(m);
  MatrixFnPtr term = detail::kernel_term_fn(jb.vectors, jb.vectors_inv, jb.values[0], k);

  std::vector<ComplexMatrix> values(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const double x = grid[static_cast<std::size_t>(i)];
    ComplexMatrix v = (*term)(x);
    if (scaled && !forcing->is_zero()) v += op(*scaled, x, cfg.quad).value;
    values[static_cast<std::size_t>(i)] = std::move(v);
  });

  MatrixFnPtr f = term;
  if (scaled && !forcing->is_zero()) {
    auto layout = layout_for(stencil_reach(detail::max_of(grid), cfg), cfg);
    f = detail::sum_fn(sample_integral(op, *scaled, layout, cfg.quad), term);
  }
  auto res = residual::n_term({c}, {m}, *f, family == Family::Forced ? forcing.get() : nullptr, grid, cfg);
  nlohmann::json meta = {{"formulation", "F = J^{M_1} (C_1^{-1} phi) + x^{M_1 - I} Gamma^{-1}(M_1) K"},
                         {"K", matrix_to_json(k)}};
  return finish(kind, Route::Volterra, m.rows(), {part("F", grid, std::move(values), std::move(res))},
                std::move(meta));
}

Solution n_term_core(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                     const MatrixFunction* phi, const ComplexMatrix& k, const std::vector<double>& grid,
                     const OperatorConfig& cfg, SolverKind kind, Family family) {
  cfg.validate();
  detail::validate_grid(grid, "grid");
  const JointEigenbasis jb = detail::check_n_term(c, m);
  const Eigen::Index n = m.front().rows();
  if (phi) {
    if (phi->rows() != n)
      throw Error(ErrorKind::DimensionMismatch, "forcing has " + std::to_string(phi->rows()) + " rows, orders are " +
                                                    std::to_string(n) + "x" + std::to_string(n));
    detail::require_forcing_vanishes(*phi, cfg);
  }
  if (k.rows() != n || (phi && k.cols() != phi->cols()))
    throw Error(ErrorKind::DimensionMismatch, "constant K has the wrong shape");
  if (m.size() == 1 && family != Family::Eigen) return one_term(c[0], m[0], phi, k, jb, grid, cfg, kind, family);

  const Eigen::Index cols = k.cols();
  const ComplexMatrix& v = jb.vectors;
  const ComplexMatrix& vi = jb.vectors_inv;
  const ComplexMatrix k_hat = vi * k;
  const ComplexVector& lam1 = jb.values[0];

  std::vector<VolterraKernel> kernels;
  PowerSeries terms(n, cols);
  for (std::size_t j = 1; j < m.size(); ++j) {
    const ComplexVector a = lam1 - jb.values[j];
    const ComplexMatrix c_hat = vi * c[j] * v;
    kernels.push_back({c_hat, a});
    terms.add(PowerSeries::kernel_term(a, k_hat).left_multiply(c_hat), -1.0);
  }
  if (family == Family::Eigen) {
    kernels.push_back({-identity(n), lam1});
    terms.add(PowerSeries::kernel_term(lam1, k_hat));
  }
  std::function<ComplexMatrix(double)> forcing;
  if (phi && !phi->is_zero()) forcing = [&](double x) -> ComplexMatrix { return vi * eval_matrix(*phi, x); };

  const VolterraEngine engine(layout_for(stencil_reach(detail::max_of(grid), cfg), cfg));
  const BasisFunction g = engine.solve(vi * c[0] * v, kernels, forcing, terms);
  const BasisFunction f_int = engine.integrate(g, lam1);
  PowerSeries f_terms = f_int.series();
  f_terms.add(PowerSeries::kernel_term(lam1, k_hat));
  const BasisFunction f(f_int.regular_ptr(), std::move(f_terms), v);

  std::unique_ptr<ExprMatrixFn> phi_fn;
  if (phi) phi_fn = std::make_unique<ExprMatrixFn>(*phi);
  const MatrixFn* rhs = nullptr;
  if (family == Family::Forced) rhs = phi_fn.get();
  if (family == Family::Eigen) rhs = &f;
  auto res = residual::n_term(c, m, f, rhs, grid, cfg);

  nlohmann::json meta;
  meta["formulation"] = "F = J^{M_1} G + x^{M_1 - I} Gamma^{-1}(M_1) K";
  meta["equation"] = family == Family::Eigen
                         ? "C_1 G + sum_j C_j J^{A_{j-1}} G - J^{M_1} G = x^{M_1 - I} Gamma^{-1}(M_1) K - sum_j C_j "
                           "x^{A_{j-1} - I} Gamma^{-1}(A_{j-1}) K"
                         : "C_1 G + sum_j C_j J^{A_{j-1}} G = phi - sum_j C_j x^{A_{j-1} - I} Gamma^{-1}(A_{j-1}) K";
  meta["K"] = matrix_to_json(k);
  return finish(kind, Route::Volterra, n, {part("F", grid, detail::values_on(grid, f), std::move(res))},
                std::move(meta));
}

ComplexMatrix default_k(const std::optional<ComplexMatrix>& k, Eigen::Index n, bool identity_default,
                        Eigen::Index cols) {
  if (k) return *k;
  return identity_default ? identity(n) : ComplexMatrix::Zero(n, cols);
}

std::vector<ComplexMatrix> default_coefficients(const std::vector<ComplexMatrix>& c, std::size_t count,
                                                Eigen::Index n) {
  if (!c.empty()) return c;
  return std::vector<ComplexMatrix>(count, identity(n));
}

}  // namespace

Solution solve_single(const ComplexMatrix& m, const MatrixFunction& phi, const std::vector<double>& grid,
                      const OperatorConfig& cfg) {
  cfg.validate();
  detail::validate_grid(grid, "grid");
  require_square(m, "order M");
  require_derivative_window(eig_decompose(m).values, "M");
  if (phi.rows() != m.rows())
    throw Error(ErrorKind::DimensionMismatch, "forcing has " + std::to_string(phi.rows()) + " rows, M is " +
                                                  std::to_string(m.rows()) + "x" + std::to_string(m.rows()));
  if (phi.is_zero()) throw Error(ErrorKind::PreconditionViolated, "single-term solver needs a nonzero forcing");
  const JointEigenbasis jb = joint_diagonalize(std::vector<ComplexMatrix>{m});
  const ComplexMatrix zero_k = ComplexMatrix::Zero(m.rows(), phi.cols());
  return one_term(identity(m.rows()), m, &phi, zero_k, jb, grid, cfg, SolverKind::Single, Family::Forced);
}

Solution solve_two_term_nh(const ComplexMatrix& c_m, const ComplexMatrix& c_n, const ComplexMatrix& m,
                           const ComplexMatrix& n, const MatrixFunction& phi, const ComplexMatrix& k,
                           const std::vector<double>& grid, const OperatorConfig& cfg, Route route) {
  if (route == Route::ClosedForm)
    return closed_form::two_term_or_n_term({c_m, c_n}, {m, n}, phi, k, grid, cfg, SolverKind::TwoTermNh);
  return n_term_core({c_m, c_n}, {m, n}, &phi, k, grid, cfg, SolverKind::TwoTermNh, Family::Forced);
}

Solution solve_n_term_nh(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                         const MatrixFunction& phi, const ComplexMatrix& k, const std::vector<double>& grid,
                         const OperatorConfig& cfg, Route route) {
  if (route == Route::ClosedForm && m.size() > 1)
    return closed_form::two_term_or_n_term(c, m, phi, k, grid, cfg, SolverKind::NTermNh);
  return n_term_core(c, m, &phi, k, grid, cfg, SolverKind::NTermNh, Family::Forced);
}

Solution solve_eigen(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
                     const std::vector<double>& grid, const OperatorConfig& cfg, Route route) {
  if (route == Route::ClosedForm) return closed_form::eigen(c, m, k, grid, cfg);
  return n_term_core(c, m, nullptr, k, grid, cfg, SolverKind::Eigen, Family::Eigen);
}

Solution solve_homogeneous(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                           const ComplexMatrix& k, const std::vector<double>& grid, const OperatorConfig& cfg,
                           Route route) {
  if (route == Route::ClosedForm) return closed_form::homogeneous(c, m, k, grid, cfg);
  return n_term_core(c, m, nullptr, k, grid, cfg, SolverKind::Homogeneous, Family::Homogeneous);
}

Solution solve_iterated(const std::vector<ComplexMatrix>& m, const MatrixFunction& phi,
                        const std::vector<double>& grid, const OperatorConfig& cfg) {
  cfg.validate();
  detail::validate_grid(grid, "grid");
  if (m.empty()) throw Error(ErrorKind::MalformedInput, "at least one order matrix is required");
  const Eigen::Index n = m.front().rows();
  detail::require_square_family(m, n, "order");
  detail::require_commuting(m, detail::labels("M", m.size()));
  if (phi.rows() != n) throw Error(ErrorKind::DimensionMismatch, "forcing rows do not match the orders");
  ComplexMatrix total = ComplexMatrix::Zero(n, n);
  for (const auto& mi : m) total += mi;

  std::vector<OrderIntegral> ops;
  for (const auto& mi : m) ops.emplace_back(mi);
  const OrderIntegral direct(total);
  const ExprMatrixFn f(phi);

  // Innermost order M_n first; each stage is sampled for the next one out.
  auto layout = layout_for(detail::max_of(grid), cfg);
  MatrixFnPtr stage = std::make_shared<ExprMatrixFn>(phi);
  for (std::size_t j = m.size(); j-- > 1;) stage = sample_integral(ops[j], *stage, layout, cfg.quad);

  std::vector<ComplexMatrix> values(grid.size());
  std::vector<std::optional<double>> res(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    const double x = grid[static_cast<std::size_t>(i)];
    ComplexMatrix nested = ops.front()(*stage, x, cfg.quad).value;
    const ComplexMatrix once = direct(f, x, cfg.quad).value;
    res[static_cast<std::size_t>(i)] = max_norm(nested - once) / std::max(1.0, max_norm(once));
    values[static_cast<std::size_t>(i)] = std::move(nested);
  });
  nlohmann::json meta = {{"formulation", "F = J^{M_1} J^{M_2} ... J^{M_n} phi"},
                         {"residual", "relative difference from J^{M_1 + ... + M_n} phi"}};
  return finish(SolverKind::Iterated, Route::Volterra, n, {part("F", grid, std::move(values), std::move(res))},
                std::move(meta));
}

Solution solve_iterated_eigen(const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
                              const std::vector<double>& grid, const OperatorConfig& cfg, Route route) {
  if (route == Route::ClosedForm) return closed_form::iterated_eigen(m, k, grid, cfg);
  cfg.validate();
  detail::validate_grid(grid, "grid");
  if (m.empty()) throw Error(ErrorKind::MalformedInput, "at least one order matrix is required");
  const Eigen::Index n = m.front().rows();
  detail::require_square_family(m, n, "order");
  detail::require_commuting(m, detail::labels("M", m.size()));
  if (k.rows() != n) throw Error(ErrorKind::DimensionMismatch, "constant K has the wrong number of rows");
  const JointEigenbasis jb = joint_diagonalize(m);
  ComplexVector lam = ComplexVector::Zero(n);
  for (std::size_t j = 0; j < m.size(); ++j) {
    const std::string what = "M_" + std::to_string(j + 1);
    require_integral_window(jb.values[j], what.c_str());
    lam += jb.values[j];
  }

  // F = G solves G - J^L G = x^{L - I} Gamma^{-1}(L) K with L = sum M_j.
  const double reach = residual::iterated_eigen_reach(m.size(), detail::max_of(grid), cfg);
  const VolterraEngine engine(layout_for(reach, cfg));
  const BasisFunction g =
      engine.solve(identity(n), {{-identity(n), lam}}, nullptr, PowerSeries::kernel_term(lam, jb.vectors_inv * k));
  const auto f = g.with_basis(jb.vectors);
  auto res = residual::iterated_eigen(m, *f, grid, cfg);
  nlohmann::json meta = {{"formulation", "F = J^L F + x^{L - I} Gamma^{-1}(L) K, L = M_1 + ... + M_n"},
                         {"K", matrix_to_json(k)}};
  return finish(SolverKind::IteratedEigen, Route::Volterra, n,
                {part("F", grid, detail::values_on(grid, *f), std::move(res))}, std::move(meta));
}

Solution solve_pde_separable(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& kappa,
                             const ComplexMatrix& c_eta, const ComplexMatrix& c_tau, const std::vector<double>& grid_x,
                             const std::vector<double>& grid_y, const OperatorConfig& cfg, Route route) {
  if (route == Route::ClosedForm) return closed_form::pde_separable(m, n, kappa, c_eta, c_tau, grid_x, grid_y, cfg);
  cfg.validate();
  detail::validate_grid(grid_x, "grid");
  detail::validate_grid(grid_y, "grid_y");
  const Eigen::Index dim = m.rows();
  detail::require_square_family({m, n, kappa, c_eta, c_tau}, dim, "matrix");
  detail::require_commuting({m, n, kappa}, {"M", "N", "kappa"});
  const JointEigenbasis jb = joint_diagonalize(std::vector<ComplexMatrix>{m, n, kappa});
  require_integral_window(jb.values[0], "M");
  require_integral_window(jb.values[1], "N");
  const ComplexMatrix kappa_hat = jb.similar(kappa);

  // eta = kappa J^M eta + x^{M - I} Gamma^{-1}(M) C_eta and Psi = kappa eta,
  // so D^M Psi = kappa Psi; likewise along y with N and C_tau.
  auto factor = [&](const ComplexVector& lam, const ComplexMatrix& c, const std::vector<double>& grid) {
    const VolterraEngine engine(layout_for(stencil_reach(detail::max_of(grid), cfg), cfg));
    const BasisFunction eta =
        engine.solve(identity(dim), {{-kappa_hat, lam}}, nullptr, PowerSeries::kernel_term(lam, jb.vectors_inv * c));
    return left_multiply(kappa, eta.with_basis(jb.vectors));
  };
  const MatrixFnPtr psi_x = factor(jb.values[0], c_eta, grid_x);
  const MatrixFnPtr psi_y = factor(jb.values[1], c_tau, grid_y);

  const auto px = detail::values_on(grid_x, *psi_x);
  const auto py = detail::values_on(grid_y, *psi_y);
  std::vector<ComplexMatrix> values;
  for (const auto& a : px)
    for (const auto& b : py) values.push_back(a * b);
  SampledSolution s = part("F", grid_x, std::move(values), residual::pde(m, n, *psi_x, *psi_y, grid_x, grid_y, cfg));
  s.grid_y = grid_y;
  nlohmann::json meta = {{"formulation", "F(x, y) = Psi_x(x) Psi_y(y), D^M Psi_x = kappa Psi_x, D^N Psi_y = kappa Psi_y"},
                         {"residual", "||d_x^M F - d_y^N F||"}};
  return finish(SolverKind::PdeSeparable, Route::Volterra, dim, {std::move(s)}, std::move(meta));
}

Solution solve_system(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& k,
                      const std::vector<double>& grid, const OperatorConfig& cfg, Route route) {
  if (route == Route::ClosedForm) return closed_form::system(m, n, k, grid, cfg);
  cfg.validate();
  detail::validate_grid(grid, "grid");
  const Eigen::Index dim = m.rows();
  detail::require_square_family({m, n}, dim, "order");
  detail::require_commuting({m, n}, {"M", "N"});
  if (k.rows() != dim) throw Error(ErrorKind::DimensionMismatch, "constant K has the wrong number of rows");
  const JointEigenbasis jb = joint_diagonalize(std::vector<ComplexMatrix>{m, n});
  require_integral_window(jb.values[0], "M");
  require_integral_window(jb.values[1], "N");
  const ComplexVector lam_s = jb.values[0] + jb.values[1];
  const ComplexMatrix k_hat = jb.vectors_inv * k;

  // H + J^{M+N} H = -x^{M+N-I} Gamma^{-1}(M+N) K; F = H, G = J^M H + x^{M-I} Gamma^{-1}(M) K.
  const VolterraEngine engine(layout_for(stencil_reach(detail::max_of(grid), cfg), cfg));
  PowerSeries h_terms(dim, k.cols());
  h_terms.add(PowerSeries::kernel_term(lam_s, k_hat), -1.0);
  const BasisFunction h = engine.solve(identity(dim), {{identity(dim), lam_s}}, nullptr, h_terms);
  const BasisFunction g_int = engine.integrate(h, jb.values[0]);
  PowerSeries g_terms = g_int.series();
  g_terms.add(PowerSeries::kernel_term(jb.values[0], k_hat));
  const auto f = h.with_basis(jb.vectors);
  const BasisFunction g(g_int.regular_ptr(), std::move(g_terms), jb.vectors);

  auto [res_f, res_g] = residual::system(m, n, *f, g, grid, cfg);
  std::vector<ComplexMatrix> g_values = detail::values_on(grid, g);
  std::vector<ComplexMatrix> r_values;
  for (const auto& v : g_values) r_values.push_back(-v);
  nlohmann::json meta = {{"formulation", "F = H, G = J^M H + x^{M - I} Gamma^{-1}(M) K, R = -G, F = J^N R"},
                         {"residual_F", "||D^N F + G||"},
                         {"residual_G", "||D^M G - F||"},
                         {"K", matrix_to_json(k)}};
  std::vector<SampledSolution> parts;
  parts.push_back(part("F", grid, detail::values_on(grid, *f), std::move(res_f)));
  parts.push_back(part("G", grid, std::move(g_values), std::move(res_g)));
  parts.push_back(part("R", grid, std::move(r_values), std::vector<std::optional<double>>(grid.size())));
  return finish(SolverKind::System, Route::Volterra, dim, std::move(parts), std::move(meta));
}

Solution solve(const SolveRequest& req) {
  const auto need_orders = [&](std::size_t count) {
    if (req.orders.size() != count)
      throw Error(ErrorKind::MalformedInput, to_string(req.solver) + " needs " + std::to_string(count) +
                                                 " order matrices, got " + std::to_string(req.orders.size()));
  };
  const auto need_forcing = [&]() -> const MatrixFunction& {
    if (!req.forcing) throw Error(ErrorKind::MalformedInput, to_string(req.solver) + " needs a forcing function");
    return *req.forcing;
  };
  if (req.orders.empty()) throw Error(ErrorKind::MalformedInput, "request has no order matrices");
  const Eigen::Index n = req.orders.front().rows();
  const Eigen::Index cols = req.forcing ? req.forcing->cols() : n;

  switch (req.solver) {
    case SolverKind::Single:
      need_orders(1);
      return solve_single(req.orders[0], need_forcing(), req.grid, req.cfg);
    case SolverKind::TwoTermNh: {
      need_orders(2);
      const auto c = default_coefficients(req.coefficients, 2, n);
      if (c.size() != 2) throw Error(ErrorKind::MalformedInput, "two_term_nh needs 2 coefficient matrices");
      return solve_two_term_nh(c[0], c[1], req.orders[0], req.orders[1], need_forcing(),
                               default_k(req.constant, n, false, cols), req.grid, req.cfg, req.route);
    }
    case SolverKind::NTermNh:
      return solve_n_term_nh(default_coefficients(req.coefficients, req.orders.size(), n), req.orders,
                             need_forcing(), default_k(req.constant, n, false, cols), req.grid, req.cfg, req.route);
    case SolverKind::Eigen:
      return solve_eigen(default_coefficients(req.coefficients, req.orders.size(), n), req.orders,
                         default_k(req.constant, n, true, n), req.grid, req.cfg, req.route);
    case SolverKind::Homogeneous:
      return solve_homogeneous(default_coefficients(req.coefficients, req.orders.size(), n), req.orders,
                               default_k(req.constant, n, true, n), req.grid, req.cfg, req.route);
    case SolverKind::Iterated:
      return solve_iterated(req.orders, need_forcing(), req.grid, req.cfg);
    case SolverKind::IteratedEigen:
      return solve_iterated_eigen(req.orders, default_k(req.constant, n, true, n), req.grid, req.cfg, req.route);
    case SolverKind::PdeSeparable: {
      if (req.orders.size() > 2) need_orders(2);
      const ComplexMatrix& m = req.orders[0];
      const ComplexMatrix& nn = req.orders.size() == 2 ? req.orders[1] : req.orders[0];
      return solve_pde_separable(m, nn, req.kappa.value_or(identity(n)), req.c_eta.value_or(identity(n)),
                                 req.c_tau.value_or(identity(n)), req.grid,
                                 req.grid_y.empty() ? req.grid : req.grid_y, req.cfg, req.route);
    }
    case SolverKind::System:
      need_orders(2);
      return solve_system(req.orders[0], req.orders[1], default_k(req.constant, n, true, n), req.grid, req.cfg,
                          req.route);
  }
  throw Error(ErrorKind::MalformedInput, "unknown solver");
}

}  // namespace mocalc

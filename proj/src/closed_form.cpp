// Literal evaluation of the published exponential G(t) formulas. The inner
// indefinite t-integrals treat x as a parameter and vanish at t = 0:
//   P_A(t; x) = int_0^t (x - s)^{A - I} ds = A^{-1} (x^A - (x - t)^A).
// These solutions do not satisfy their equations in general; the residuals
// say by how much.

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "mocalc/gammafn.hpp"
#include "solver_detail.hpp"

namespace mocalc::closed_form {

namespace {

using detail::finish;
using detail::part;

/// Sampling used for the nested quadratures of this route; each sample costs
/// a full outer integral, so the layout is coarser than the default.
SamplingSpec coarse(const SamplingSpec& s) {
  SamplingSpec c;
  c.geometric_panels = std::min(s.geometric_panels, 12);
  c.uniform_panels = std::min(s.uniform_panels, 2);
  c.nodes_per_panel = std::min(s.nodes_per_panel, 12);
  return c;
}

PanelLayoutPtr coarse_layout(double reach, const OperatorConfig& cfg) {
  return std::make_shared<const PanelLayout>(reach, coarse(cfg.sampling));
}

/// Gamma^{-1}(A) P_A(t; x) for A = V diag(a) V^{-1}.
ComplexMatrix weighted_pint(const JointEigenbasis& jb, const ComplexVector& a, double t, double x) {
  ComplexVector d(a.size());
  const double lx = std::log(x);
  const double lr = std::log(x - t);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const cplx p = t < x ? (std::exp(a(i) * lx) - std::exp(a(i) * lr)) / a(i) : std::exp(a(i) * lx) / a(i);
    d(i) = rgamma(a(i)) * p;
  }
  return jb.vectors * d.asDiagonal() * jb.vectors_inv;
}

nlohmann::json orientation(const char* g) {
  return {{"route_note", "literal published formula; K multiplies on the right"}, {"G", g}};
}

/// F(x) = J^{M}[t -> G(t; x)](x) sampled over the residual reach.
struct Recovered {
  MatrixFnPtr sampled;
  std::vector<ComplexMatrix> values;
};

Recovered recover(const ComplexMatrix& m, Eigen::Index rows, Eigen::Index cols,
                  const std::function<ComplexMatrix(double t, double x)>& g, const std::vector<double>& grid,
                  double reach, const OperatorConfig& cfg) {
  const OrderIntegral op(m);
  auto at = [&](double x) -> ComplexMatrix {
    const LambdaFn gx(rows, cols, [&](double t) { return g(t, x); });
    return op(gx, x, cfg.quad).value;
  };
  Recovered r;
  r.values.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) { r.values[static_cast<std::size_t>(i)] = at(grid[static_cast<std::size_t>(i)]); });
  r.sampled = sample(coarse_layout(reach, cfg), rows, cols, at);
  return r;
}

/// exp(E(t; x)) K for the separable families.
using Exponent = std::function<ComplexMatrix(double t, double x)>;

Solution separable(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
                   const std::vector<double>& grid, const OperatorConfig& cfg, SolverKind kind, bool eigen_rhs,
                   const char* formula) {
  cfg.validate();
  detail::validate_grid(grid, "grid");
  const JointEigenbasis jb = detail::check_n_term(c, m);
  const Eigen::Index n = m.front().rows();
  if (k.rows() != n) throw Error(ErrorKind::DimensionMismatch, "constant K has the wrong number of rows");
  const ComplexMatrix c1_inv = c.front().inverse();

  const Exponent e = [&](double t, double x) {
    ComplexMatrix acc = ComplexMatrix::Zero(n, n);
    for (std::size_t j = 1; j < m.size(); ++j)
      acc -= c[j] * weighted_pint(jb, jb.values[0] - jb.values[j], t, x);
    if (eigen_rhs) acc += weighted_pint(jb, jb.values[0], t, x);
    return ComplexMatrix(c1_inv * acc);
  };
  const double reach = stencil_reach(detail::max_of(grid), cfg);
  const Recovered f = recover(
      m.front(), n, k.cols(), [&](double t, double x) { return ComplexMatrix(e(t, x).exp() * k); }, grid, reach, cfg);
  auto res = residual::n_term(c, m, *f.sampled, eigen_rhs ? f.sampled.get() : nullptr, grid, cfg);
  return finish(kind, Route::ClosedForm, n, {part("F", grid, f.values, std::move(res))}, orientation(formula));
}

}  // namespace

Solution two_term_or_n_term(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                            const MatrixFunction& phi, const ComplexMatrix& k, const std::vector<double>& grid,
                            const OperatorConfig& cfg, SolverKind kind) {
  cfg.validate();
  detail::validate_grid(grid, "grid");
  const JointEigenbasis jb = detail::check_n_term(c, m);
  const Eigen::Index n = m.front().rows();
  if (phi.rows() != n) throw Error(ErrorKind::DimensionMismatch, "forcing rows do not match the orders");
  detail::require_forcing_vanishes(phi, cfg);
  if (k.rows() != n || k.cols() != phi.cols()) throw Error(ErrorKind::DimensionMismatch, "constant K has the wrong shape");
  const ComplexMatrix c1_inv = c.front().inverse();
  const MatrixFunction dphi = phi.diff();

  // Q(t; x) = C_1^{-1} sum_j C_j Gamma^{-1}(A_{j-1}) P_{A_{j-1}}(t; x)
  auto q = [&](double t, double x) {
    ComplexMatrix acc = ComplexMatrix::Zero(n, n);
    for (std::size_t j = 1; j < m.size(); ++j) acc += c[j] * weighted_pint(jb, jb.values[0] - jb.values[j], t, x);
    return ComplexMatrix(c1_inv * acc);
  };
  const GaussRule& gl = gauss_rule(24);
  // G(t; x) = exp(-Q(t)) [int_0^t exp(Q(s)) C_1^{-1} phi'(s) ds + K]
  auto g = [&](double t, double x) -> ComplexMatrix {
    ComplexMatrix inner = ComplexMatrix::Zero(n, phi.cols());
    const double half = 0.5 * t;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double s = half * (1.0 + gl.nodes[i]);
      inner += gl.weights[i] * half * (q(s, x).exp() * c1_inv * eval_matrix(dphi, s));
    }
    return q(t, x).exp().inverse() * (inner + k);
  };
  const double reach = stencil_reach(detail::max_of(grid), cfg);
  const Recovered f = recover(m.front(), n, phi.cols(), g, grid, reach, cfg);
  const ExprMatrixFn phi_fn(phi);
  auto res = residual::n_term(c, m, *f.sampled, &phi_fn, grid, cfg);
  return finish(kind, Route::ClosedForm, n, {part("F", grid, f.values, std::move(res))},
                orientation("exp(-Q(t)) [int_0^t exp(Q(s)) C_1^{-1} phi'(s) ds + K]"));
}

Solution eigen(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
               const std::vector<double>& grid, const OperatorConfig& cfg) {
  return separable(c, m, k, grid, cfg, SolverKind::Eigen, true,
                   "exp(C_1^{-1} [Gamma^{-1}(M_1) P_{M_1} - sum_j C_j Gamma^{-1}(A_{j-1}) P_{A_{j-1}}]) K");
}

Solution homogeneous(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                     const ComplexMatrix& k, const std::vector<double>& grid, const OperatorConfig& cfg) {
  return separable(c, m, k, grid, cfg, SolverKind::Homogeneous, false,
                   "exp(-C_1^{-1} sum_j C_j Gamma^{-1}(A_{j-1}) P_{A_{j-1}}) K");
}

Solution iterated_eigen(const std::vector<ComplexMatrix>& m, const ComplexMatrix& k, const std::vector<double>& grid,
                        const OperatorConfig& cfg) {
  cfg.validate();
  detail::validate_grid(grid, "grid");
  if (m.empty()) throw Error(ErrorKind::MalformedInput, "at least one order matrix is required");
  const Eigen::Index n = m.front().rows();
  detail::require_square_family(m, n, "order");
  detail::require_commuting(m, detail::labels("M", m.size()));
  if (k.rows() != n) throw Error(ErrorKind::DimensionMismatch, "constant K has the wrong number of rows");
  const JointEigenbasis jb = joint_diagonalize(m);
  ComplexVector lam = ComplexVector::Zero(n);
  for (const auto& v : jb.values) lam += v;
  require_integral_window(lam, "L");

  // Innermost G(v) = exp(Gamma^{-1}(L + I) v^L) K, then J^{M_n}, ..., J^{M_1}.
  const auto g = make_fn(n, k.cols(), [&](double v) -> ComplexMatrix {
    ComplexVector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d(i) = rgamma(lam(i) + 1.0) * std::exp(lam(i) * std::log(v));
    return ComplexMatrix(jb.vectors * d.asDiagonal() * jb.vectors_inv).exp() * k;
  });
  const double reach = residual::iterated_eigen_reach(m.size(), detail::max_of(grid), cfg);
  auto layout = coarse_layout(reach, cfg);
  MatrixFnPtr stage = g;
  for (std::size_t j = m.size(); j-- > 0;) stage = sample_integral(OrderIntegral(m[j]), *stage, layout, cfg.quad);
  auto res = residual::iterated_eigen(m, *stage, grid, cfg);
  return finish(SolverKind::IteratedEigen, Route::ClosedForm, n,
                {part("F", grid, detail::values_on(grid, *stage), std::move(res))},
                orientation("J^{M_1} ... J^{M_n} exp(Gamma^{-1}(L + I) v^L) K"));
}

Solution pde_separable(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& kappa,
                       const ComplexMatrix& c_eta, const ComplexMatrix& c_tau, const std::vector<double>& grid_x,
                       const std::vector<double>& grid_y, const OperatorConfig& cfg) {
  cfg.validate();
  detail::validate_grid(grid_x, "grid");
  detail::validate_grid(grid_y, "grid_y");
  const Eigen::Index dim = m.rows();
  detail::require_square_family({m, n, kappa, c_eta, c_tau}, dim, "matrix");
  detail::require_commuting({m, n, kappa}, {"M", "N", "kappa"});
  const JointEigenbasis jb = joint_diagonalize(std::vector<ComplexMatrix>{m, n, kappa});
  require_integral_window(jb.values[0], "M");
  require_integral_window(jb.values[1], "N");

  // eta(t; x) = exp(kappa Gamma^{-1}(M) P_M(t; x)) C_eta, Psi = kappa J^M eta.
  auto factor = [&](const ComplexMatrix& order, const ComplexVector& lam, const ComplexMatrix& c,
                    const std::vector<double>& grid) {
    const Recovered r = recover(
        order, dim, dim,
        [&](double t, double x) { return ComplexMatrix((kappa * weighted_pint(jb, lam, t, x)).exp() * c); }, grid,
        stencil_reach(detail::max_of(grid), cfg), cfg);
    return std::make_pair(left_multiply(kappa, r.sampled), r.values);
  };
  auto [psi_x, vx] = factor(m, jb.values[0], c_eta, grid_x);
  auto [psi_y, vy] = factor(n, jb.values[1], c_tau, grid_y);
  std::vector<ComplexMatrix> values;
  for (const auto& a : vx)
    for (const auto& b : vy) values.push_back(kappa * a * kappa * b);
  SampledSolution s = part("F", grid_x, std::move(values), residual::pde(m, n, *psi_x, *psi_y, grid_x, grid_y, cfg));
  s.grid_y = grid_y;
  return finish(SolverKind::PdeSeparable, Route::ClosedForm, dim, {std::move(s)},
                orientation("eta = exp(kappa Gamma^{-1}(M) P_M(t; x)) C_eta, zeta likewise with N, C_tau"));
}

Solution system(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& k,
                const std::vector<double>& grid, const OperatorConfig& cfg) {
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

  // H(t; x) = exp(-Gamma^{-1}(M + N) P_{M+N}(t; x)) K, G = J^M H, F = J^N G.
  const double reach = stencil_reach(detail::max_of(grid), cfg);
  const Recovered g = recover(
      m, dim, k.cols(), [&](double t, double x) { return ComplexMatrix((-weighted_pint(jb, lam_s, t, x)).exp() * k); },
      grid, reach, cfg);
  const OrderIntegral jn(n);
  const auto f_sampled = sample_integral(jn, *g.sampled, coarse_layout(reach, cfg), cfg.quad);
  std::vector<ComplexMatrix> f_values(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int i) {
    f_values[static_cast<std::size_t>(i)] = jn(*g.sampled, grid[static_cast<std::size_t>(i)], cfg.quad).value;
  });
  auto [res_f, res_g] = residual::system(m, n, *f_sampled, *g.sampled, grid, cfg);
  std::vector<ComplexMatrix> r_values;
  for (const auto& v : g.values) r_values.push_back(-v);
  std::vector<SampledSolution> parts;
  parts.push_back(part("F", grid, std::move(f_values), std::move(res_f)));
  parts.push_back(part("G", grid, g.values, std::move(res_g)));
  parts.push_back(part("R", grid, std::move(r_values), std::vector<std::optional<double>>(grid.size())));
  return finish(SolverKind::System, Route::ClosedForm, dim, std::move(parts),
                orientation("H = exp(-Gamma^{-1}(M + N) P_{M+N}(t; x)) K, G = J^M H, F = J^N G"));
}

}  // namespace mocalc::closed_form

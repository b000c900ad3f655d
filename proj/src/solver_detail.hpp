#pragma once

// Shared plumbing of the solver families (not installed).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mocalc/fracops.hpp"
#include "mocalc/power_terms.hpp"
#include "mocalc/solvers.hpp"
#include "mocalc/volterra.hpp"

namespace mocalc::detail {

/// Derivative residuals are skipped below this fraction of max(grid).
inline constexpr double kResidualCutoff = 0.125;

void validate_grid(const std::vector<double>& grid, const char* what);
/// Same size square matrices, pairwise commuting; names[i] labels mats[i].
void require_commuting(const std::vector<ComplexMatrix>& mats, const std::vector<std::string>& names);
void require_invertible(const ComplexMatrix& c, const std::string& name);
void require_forcing_vanishes(const MatrixFunction& phi, const OperatorConfig& cfg);
void require_square_family(const std::vector<ComplexMatrix>& mats, Eigen::Index n, const char* what);

std::vector<std::string> labels(const char* stem, std::size_t count);

/// x^{E - I} Gamma^{-1}(E) K in the original basis, E = V diag(e) V^{-1}.
MatrixFnPtr kernel_term_fn(const ComplexMatrix& v, const ComplexMatrix& v_inv, const ComplexVector& e,
                           const ComplexMatrix& k);

/// Sum of two functions of equal shape.
MatrixFnPtr sum_fn(MatrixFnPtr a, MatrixFnPtr b);

/// Evaluates `at` on the grid points at or above the residual cutoff, in
/// parallel. A stencil that leaves the domain yields an empty entry.
std::vector<std::optional<double>> residuals_on(const std::vector<double>& grid,
                                                const std::function<double(double)>& at);

/// Samples of f at the grid points.
std::vector<ComplexMatrix> values_on(const std::vector<double>& grid, const MatrixFn& f);

double max_of(const std::vector<double>& grid);

/// Shape, commutation, window and invertibility checks shared by the
/// n-term families. Returns the joint eigenbasis of the orders.
JointEigenbasis check_n_term(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m);

Solution finish(SolverKind kind, Route route, Eigen::Index dim, std::vector<SampledSolution> parts,
                nlohmann::json meta);
SampledSolution part(std::string name, const std::vector<double>& grid, std::vector<ComplexMatrix> values,
                     std::vector<std::optional<double>> residuals);

}  // namespace mocalc::detail

namespace mocalc::closed_form {

/// Literal evaluation of the published G(t) formulas (see the design ledger
/// of the repository README). Each returns a full Solution with residuals
/// computed exactly as on the default route.
Solution two_term_or_n_term(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                            const MatrixFunction& phi, const ComplexMatrix& k, const std::vector<double>& grid,
                            const OperatorConfig& cfg, SolverKind kind);
Solution eigen(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
               const std::vector<double>& grid, const OperatorConfig& cfg);
Solution homogeneous(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                     const ComplexMatrix& k, const std::vector<double>& grid, const OperatorConfig& cfg);
Solution iterated_eigen(const std::vector<ComplexMatrix>& m, const ComplexMatrix& k, const std::vector<double>& grid,
                        const OperatorConfig& cfg);
Solution pde_separable(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& kappa,
                       const ComplexMatrix& c_eta, const ComplexMatrix& c_tau, const std::vector<double>& grid_x,
                       const std::vector<double>& grid_y, const OperatorConfig& cfg);
Solution system(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& k,
                const std::vector<double>& grid, const OperatorConfig& cfg);

}  // namespace mocalc::closed_form

namespace mocalc::residual {

/// Residual builders shared by both routes. F (and G) must be defined up to
/// stencil_reach(max(grid)). Orders outside the derivative window give
/// empty entries throughout.

/// ||sum_j C_j D^{M_j} F - rhs|| (rhs null means 0).
std::vector<std::optional<double>> n_term(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                                          const MatrixFn& f, const MatrixFn* rhs,
                                          const std::vector<double>& grid, const OperatorConfig& cfg);
std::vector<std::optional<double>> iterated_eigen(const std::vector<ComplexMatrix>& m, const MatrixFn& f,
                                                  const std::vector<double>& grid, const OperatorConfig& cfg);
/// Range over which iterated_eigen needs F.
double iterated_eigen_reach(std::size_t depth, double x_max, const OperatorConfig& cfg);
std::vector<std::optional<double>> pde(const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& psi_x,
                                       const MatrixFn& psi_y, const std::vector<double>& grid_x,
                                       const std::vector<double>& grid_y, const OperatorConfig& cfg);
/// {||D^N F + G||, ||D^M G - F||}.
std::pair<std::vector<std::optional<double>>, std::vector<std::optional<double>>> system(
    const ComplexMatrix& m, const ComplexMatrix& n, const MatrixFn& f, const MatrixFn& g,
    const std::vector<double>& grid, const OperatorConfig& cfg);

}  // namespace mocalc::residual

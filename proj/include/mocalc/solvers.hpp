#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mocalc/exprfn.hpp"
#include "mocalc/fracops.hpp"

namespace mocalc {

enum class SolverKind { Single, TwoTermNh, NTermNh, Eigen, Homogeneous, Iterated, IteratedEigen, PdeSeparable, System };

/// `Volterra` solves the reduced second-kind equation for G numerically.
/// `ClosedForm` evaluates the published exponential formula for G; it is
/// kept for comparison and generally fails its residual tolerance.
enum class Route { Volterra, ClosedForm };

std::string to_string(SolverKind k);
std::string to_string(Route r);
SolverKind solver_kind_from_string(const std::string& s);
Route route_from_string(const std::string& s);

struct SolveRequest {
  SolverKind solver = SolverKind::Single;
  Route route = Route::Volterra;
  std::vector<ComplexMatrix> orders;
  std::vector<ComplexMatrix> coefficients;
  std::optional<MatrixFunction> forcing;
  std::optional<ComplexMatrix> constant;
  std::vector<double> grid;
  // Separable PDE only.
  std::vector<double> grid_y;
  std::optional<ComplexMatrix> kappa;
  std::optional<ComplexMatrix> c_eta;
  std::optional<ComplexMatrix> c_tau;
  OperatorConfig cfg;
};

/// Values and equation defects on a grid. For the separable PDE the grid is
/// the tensor product grid x grid_y, stored x-major.
struct SampledSolution {
  std::string name = "F";
  std::vector<double> grid;
  std::vector<double> grid_y;
  std::vector<ComplexMatrix> values;
  /// Empty where the defect cannot be computed (derivative window or
  /// stencil reach).
  std::vector<std::optional<double>> residuals;

  double max_residual() const;
  bool within(double tol) const;
};

struct Solution {
  SolverKind solver;
  Route route;
  double tolerance;
  std::vector<SampledSolution> parts;
  nlohmann::json meta = nlohmann::json::object();

  bool passed() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Default residual tolerance of each solver family.
double solver_tolerance(SolverKind k, Eigen::Index dim);

Solution solve(const SolveRequest& req);

Solution solve_single(const ComplexMatrix& m, const MatrixFunction& phi, const std::vector<double>& grid,
                      const OperatorConfig& cfg);
Solution solve_two_term_nh(const ComplexMatrix& c_m, const ComplexMatrix& c_n, const ComplexMatrix& m,
                           const ComplexMatrix& n, const MatrixFunction& phi, const ComplexMatrix& k,
                           const std::vector<double>& grid, const OperatorConfig& cfg,
                           Route route = Route::Volterra);
Solution solve_n_term_nh(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                         const MatrixFunction& phi, const ComplexMatrix& k, const std::vector<double>& grid,
                         const OperatorConfig& cfg, Route route = Route::Volterra);
Solution solve_eigen(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
                     const std::vector<double>& grid, const OperatorConfig& cfg, Route route = Route::Volterra);
Solution solve_homogeneous(const std::vector<ComplexMatrix>& c, const std::vector<ComplexMatrix>& m,
                           const ComplexMatrix& k, const std::vector<double>& grid, const OperatorConfig& cfg,
                           Route route = Route::Volterra);
Solution solve_iterated(const std::vector<ComplexMatrix>& m, const MatrixFunction& phi,
                        const std::vector<double>& grid, const OperatorConfig& cfg);
Solution solve_iterated_eigen(const std::vector<ComplexMatrix>& m, const ComplexMatrix& k,
                              const std::vector<double>& grid, const OperatorConfig& cfg,
                              Route route = Route::Volterra);
Solution solve_pde_separable(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& kappa,
                             const ComplexMatrix& c_eta, const ComplexMatrix& c_tau, const std::vector<double>& grid_x,
                             const std::vector<double>& grid_y, const OperatorConfig& cfg,
                             Route route = Route::Volterra);
/// parts: F, G and R = -G (R carries no residuals).
Solution solve_system(const ComplexMatrix& m, const ComplexMatrix& n, const ComplexMatrix& k,
                      const std::vector<double>& grid, const OperatorConfig& cfg, Route route = Route::Volterra);

/// Request documents: matrices in the matcore format (a bare number is a
/// 1x1 matrix), functions as expression strings, grid as
/// {"start", "stop", "count"} or an explicit list.
SolveRequest request_from_json(const nlohmann::json& doc);
nlohmann::json request_to_json(const SolveRequest& req);
std::vector<double> grid_from_json(const nlohmann::json& doc);

}  // namespace mocalc

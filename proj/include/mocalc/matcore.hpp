#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mocalc/error.hpp"

namespace mocalc {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Eigenvector conditioning beyond which a matrix counts as non-diagonalizable.
inline constexpr double kDiagonalizabilityCeiling = 1e8;
/// Relative reconstruction tolerance used when callers do not supply one.
inline constexpr double kReconstructionTol = 1e-8;

/// Entrywise maximum modulus. All tolerance checks in the library use it.
double max_norm(const ComplexMatrix& a);

ComplexMatrix identity(Eigen::Index n);

void require_square(const ComplexMatrix& a, const char* what);
void require_same_size(const ComplexMatrix& a, const ComplexMatrix& b, const char* what);

/// Diagonalization A = V diag(values) V^{-1}.
struct EigenSystem {
  ComplexMatrix vectors;
  ComplexVector values;
  ComplexMatrix vectors_inv;
  double cond_estimate = 1.0;

  Eigen::Index size() const { return values.size(); }
  ComplexMatrix reconstruct() const;
  /// V diag(f(values)) V^{-1}; throws PoleAtEigenvalue where f is not finite.
  ComplexMatrix apply(const std::function<cplx(cplx)>& f) const;
};

/// Eigenvalues come back sorted by real part, then imaginary part, with each
/// eigenvector scaled to unit norm and its largest entry made real positive.
EigenSystem eig_decompose(const ComplexMatrix& a, double tol = kReconstructionTol);

ComplexMatrix holomorphic_apply(const std::function<cplx(cplx)>& f, const ComplexMatrix& a);

/// s^A = exp(A ln s) for a strictly positive real base.
ComplexMatrix scalar_pow_matrix(double s, const ComplexMatrix& a);

/// ||AB - BA|| <= rel_tol ||A|| ||B|| in the max norm.
bool commute_check(const ComplexMatrix& a, const ComplexMatrix& b, double rel_tol);

/// A common eigenbasis for a family of pairwise commuting diagonalizable
/// matrices. values[k] holds the diagonal of vectors_inv * family[k] * vectors.
struct JointEigenbasis {
  ComplexMatrix vectors;
  ComplexMatrix vectors_inv;
  std::vector<ComplexVector> values;
  double cond_estimate = 1.0;

  ComplexMatrix to_basis(const ComplexMatrix& a) const { return vectors_inv * a; }
  ComplexMatrix from_basis(const ComplexMatrix& a) const { return vectors * a; }
  ComplexMatrix similar(const ComplexMatrix& a) const { return vectors_inv * a * vectors; }
};

JointEigenbasis joint_diagonalize(std::span<const ComplexMatrix> family,
                                  double tol = kReconstructionTol);

/// Matrix JSON document: {"n_rows": r, "n_cols": c, "data": [[re, im], ...]}
/// in row-major order. A bare number is accepted as a real entry.
ComplexMatrix matrix_from_json(const nlohmann::json& doc);
nlohmann::json matrix_to_json(const ComplexMatrix& a);

}  // namespace mocalc

#pragma once

#include "mocalc/matcore.hpp"

namespace mocalc {

/// Distance below which an eigenvalue counts as a gamma pole (0, -1, -2, ...).
inline constexpr double kGammaPoleTol = 1e-10;

bool is_gamma_pole(cplx z, double tol = kGammaPoleTol);

/// Scalar gamma (Lanczos, g = 7, with reflection for Re z < 1/2).
/// Returns complex infinity at poles.
cplx gamma(cplx z);

/// Reciprocal gamma. Entire; exactly zero at the poles of gamma.
cplx rgamma(cplx z);

/// A square matrix together with its cached eigendecomposition.
class GammaArgument {
 public:
  explicit GammaArgument(ComplexMatrix m) : matrix_(std::move(m)), eigen_(eig_decompose(matrix_)) {}
  GammaArgument(ComplexMatrix m, EigenSystem es) : matrix_(std::move(m)), eigen_(std::move(es)) {}

  const ComplexMatrix& matrix() const { return matrix_; }
  const EigenSystem& eigen() const { return eigen_; }

 private:
  ComplexMatrix matrix_;
  EigenSystem eigen_;
};

ComplexMatrix mat_gamma(const GammaArgument& a);
ComplexMatrix mat_gamma(const ComplexMatrix& a);

ComplexMatrix mat_gamma_inv(const EigenSystem& a);
ComplexMatrix mat_gamma_inv(const ComplexMatrix& a);

/// Test oracle: the defining integral over [0, upper_cut], channel-wise in
/// the eigenbasis, with truncation and quadrature error held below `tol`
/// (relative to max(1, |Gamma(lambda)|)).
ComplexMatrix mat_gamma_integral_oracle(const ComplexMatrix& a, double upper_cut, double tol);

/// B(M, N) = Gamma(M) Gamma(N) Gamma^{-1}(M + N) for commuting M, N.
ComplexMatrix mat_beta(const ComplexMatrix& m, const ComplexMatrix& n);

/// Test oracle: the integral of (1 - y)^{M - I} y^{N - I} over [0, 1],
/// channel-wise in a joint eigenbasis of M and N.
ComplexMatrix mat_beta_integral_oracle(const ComplexMatrix& m, const ComplexMatrix& n, double tol);

/// Commutation tolerance shared by every identity checker.
inline constexpr double kCommuteTol = 1e-10;

}  // namespace mocalc

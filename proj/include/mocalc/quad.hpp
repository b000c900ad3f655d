#pragma once

#include <functional>
#include <span>

#include "mocalc/function.hpp"
#include "mocalc/matcore.hpp"

namespace mocalc {

struct QuadSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_refinements = 20;

  /// Throws PreconditionViolated when a field is out of range.
  void validate() const;
  QuadSpec tightened(double factor) const;
};

struct QuadResult {
  ComplexMatrix value;
  double err_estimate = 0.0;
  long long evaluations = 0;
};

struct ScalarQuadResult {
  cplx value;
  double err_estimate = 0.0;
  long long evaluations = 0;
};

/// Abscissa together with its exact distances to both ends of the piece, so
/// endpoint-singular factors never suffer from cancellation.
struct QuadNode {
  double t;
  double from_lo;
  double to_hi;
};

using PieceIntegrand = std::function<ComplexMatrix(const QuadNode&)>;

/// Double-exponential (tanh-sinh) rule on [lo, hi], refined by step halving
/// until successive levels agree to the requested tolerance.
QuadResult tanh_sinh(double lo, double hi, const PieceIntegrand& f, const QuadSpec& spec);

/// Gauss-Legendre with `n` nodes; the error estimate compares against a rule
/// with two thirds as many nodes.
QuadResult gauss_legendre(double lo, double hi, const PieceIntegrand& f, int n = 24);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_rule(int n);

/// Integral over [0, x] of diag((x - t)^{omega_i}) g(t) dt, where the rows of
/// g(t) are the channels. `breaks` split the range into pieces: the piece
/// ending at x and pieces starting at 0 use tanh-sinh, distant pieces use
/// Gauss-Legendre.
QuadResult channel_convolution(const ComplexVector& omega, const std::function<ComplexMatrix(double)>& g,
                               std::span<const double> breaks, double x, const QuadSpec& spec);

/// Integral over [0, x] of (x - t)^{A - I} F(t) dt, computed channel-wise in
/// the eigenbasis of A. Requires Re(lambda) > 0 for every eigenvalue of A.
QuadResult singular_convolution(const ComplexMatrix& a, const MatrixFn& f, double x, const QuadSpec& spec);

/// Same, reusing a decomposition of A.
QuadResult singular_convolution(const EigenSystem& a, const MatrixFn& f, double x, const QuadSpec& spec);

/// Integral over [0, upper_cut] of t^{lambda - 1} e^{-t} dt.
ScalarQuadResult gamma_tail_quadrature(cplx lambda, double upper_cut, const QuadSpec& spec);

/// Integral over [0, 1] of (1 - y)^{a - 1} y^{b - 1} dy.
ScalarQuadResult beta_quadrature(cplx a, cplx b, const QuadSpec& spec);

}  // namespace mocalc

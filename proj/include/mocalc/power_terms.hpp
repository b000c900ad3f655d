#pragma once

#include <utility>
#include <vector>

#include "mocalc/matcore.hpp"

namespace mocalc {

/// coef * x^exponent placed in one row (channel) of a matrix-valued function.
struct PowerTerm {
  Eigen::Index row;
  cplx exponent;
  Eigen::RowVectorXcd coef;
};

/// Finite sum of channel-wise power terms, expressed in an eigenbasis where
/// every Riemann-Liouville integral acts row by row:
///   J^a x^p = Gamma(p + 1) / Gamma(p + a + 1) x^{p + a}.
class PowerSeries {
 public:
  PowerSeries(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols) {}

  /// Rows i of x^{E - I} Gamma^{-1}(E) K for diagonal E = diag(e).
  static PowerSeries kernel_term(const ComplexVector& e, const ComplexMatrix& k);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<PowerTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Adds a term, merging it with an existing one of equal exponent.
  void add(Eigen::Index row, cplx exponent, const Eigen::RowVectorXcd& coef);
  void add(const PowerSeries& other, cplx scale = 1.0);

  /// Row i integrated with order a(i). Needs Re(p) > -1 for every term.
  PowerSeries integrate(const ComplexVector& a) const;
  PowerSeries left_multiply(const ComplexMatrix& c) const;

  /// (terms with Re(exponent) < threshold, the rest)
  std::pair<PowerSeries, PowerSeries> split(double threshold) const;
  double min_real_exponent() const;

  ComplexMatrix operator()(double x) const;

 private:
  Eigen::Index rows_, cols_;
  std::vector<PowerTerm> terms_;
};

}  // namespace mocalc

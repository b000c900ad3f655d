#include "mocalc/power_terms.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mocalc/gammafn.hpp"

namespace mocalc {

namespace {
constexpr double kSameExponent = 1e-12;
}

PowerSeries PowerSeries::kernel_term(const ComplexVector& e, const ComplexMatrix& k) {
  PowerSeries s(k.rows(), k.cols());
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const cplx r = rgamma(e(i));
    if (r != 0.0) s.add(i, e(i) - 1.0, r * k.row(i));
  }
  return s;
}

void PowerSeries::add(Eigen::Index row, cplx exponent, const Eigen::RowVectorXcd& coef) {
  if (coef.isZero(0.0)) return;
  for (PowerTerm& t : terms_) {
    if (t.row == row && std::abs(t.exponent - exponent) <= kSameExponent * std::max(1.0, std::abs(exponent))) {
      t.coef += coef;
      return;
    }
  }
  terms_.push_back({row, exponent, coef});
}

void PowerSeries::add(const PowerSeries& other, cplx scale) {
  for (const PowerTerm& t : other.terms_) add(t.row, t.exponent, scale * t.coef);
}

PowerSeries PowerSeries::integrate(const ComplexVector& a) const {
  PowerSeries out(rows_, cols_);
  for (const PowerTerm& t : terms_) {
    if (!(t.exponent.real() > -1.0))
      throw Error(ErrorKind::EigenvalueOutOfDomain,
                  "power term x^p with Re(p) = " + std::to_string(t.exponent.real()) + " is not integrable at 0");
    const cplx p1 = t.exponent + 1.0;
    const cplx factor = gamma(p1) * rgamma(p1 + a(t.row));
    out.add(t.row, t.exponent + a(t.row), factor * t.coef);
  }
  return out;
}

PowerSeries PowerSeries::left_multiply(const ComplexMatrix& c) const {
  PowerSeries out(c.rows(), cols_);
  for (const PowerTerm& t : terms_)
    for (Eigen::Index r = 0; r < c.rows(); ++r)
      if (c(r, t.row) != 0.0) out.add(r, t.exponent, c(r, t.row) * t.coef);
  return out;
}

std::pair<PowerSeries, PowerSeries> PowerSeries::split(double threshold) const {
  PowerSeries below(rows_, cols_), rest(rows_, cols_);
  for (const PowerTerm& t : terms_) (t.exponent.real() < threshold ? below : rest).terms_.push_back(t);
  return {below, rest};
}

double PowerSeries::min_real_exponent() const {
  double m = std::numeric_limits<double>::infinity();
  for (const PowerTerm& t : terms_) m = std::min(m, t.exponent.real());
  return m;
}

ComplexMatrix PowerSeries::operator()(double x) const {
  ComplexMatrix out = ComplexMatrix::Zero(rows_, cols_);
  if (terms_.empty()) return out;
  const double lx = std::log(x);
  for (const PowerTerm& t : terms_) out.row(t.row) += std::exp(t.exponent * lx) * t.coef;
  return out;
}

}  // namespace mocalc

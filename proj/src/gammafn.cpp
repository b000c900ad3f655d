#include "mocalc/gammafn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mocalc/quad.hpp"

namespace mocalc {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};

// sin(pi z) with the real part reduced first, so zeros at integers are exact.
cplx sin_pi(cplx z) {
  const double n = std::round(z.real());
  const double f = z.real() - n;
  const cplx s = std::sin(std::numbers::pi * cplx(f, z.imag()));
  return std::fmod(n, 2.0) == 0.0 ? s : -s;
}

// Lanczos series for Re z >= 1/2, in log form to avoid early overflow.
cplx gamma_right(cplx z) {
  z -= 1.0;
  cplx sum = kLanczos[0];
  for (std::size_t k = 1; k < kLanczos.size(); ++k) sum += kLanczos[k] / (z + static_cast<double>(k));
  const cplx t = z + kLanczosG + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::exp((z + 0.5) * std::log(t) - t) * sum;
}

std::string str(cplx z) { return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")"; }

}  // namespace

bool is_gamma_pole(cplx z, double tol) {
  const double n = std::round(z.real());
  return n <= 0.0 && std::abs(z - n) <= tol;
}

cplx gamma(cplx z) {
  if (is_gamma_pole(z, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  // libm is exact at small integers and tighter on the real line.
  if (z.imag() == 0.0) return std::tgamma(z.real());
  if (z.real() < 0.5) return std::numbers::pi / (sin_pi(z) * gamma_right(1.0 - z));
  return gamma_right(z);
}

cplx rgamma(cplx z) {
  if (is_gamma_pole(z)) return 0.0;
  if (z.imag() == 0.0) return 1.0 / std::tgamma(z.real());
  if (z.real() < 0.5) return sin_pi(z) * gamma_right(1.0 - z) / std::numbers::pi;
  return 1.0 / gamma_right(z);
}

ComplexMatrix mat_gamma(const GammaArgument& a) {
  const auto& es = a.eigen();
  for (Eigen::Index i = 0; i < es.size(); ++i)
    if (is_gamma_pole(es.values(i)))
      throw Error(ErrorKind::PoleAtEigenvalue, "gamma pole at eigenvalue " + str(es.values(i)));
  return es.apply([](cplx z) { return gamma(z); });
}

ComplexMatrix mat_gamma(const ComplexMatrix& a) { return mat_gamma(GammaArgument(a)); }

ComplexMatrix mat_gamma_inv(const EigenSystem& a) {
  return a.apply([](cplx z) { return rgamma(z); });
}

ComplexMatrix mat_gamma_inv(const ComplexMatrix& a) { return mat_gamma_inv(eig_decompose(a)); }

ComplexMatrix mat_gamma_integral_oracle(const ComplexMatrix& a, double upper_cut, double tol) {
  if (!(upper_cut >= 30.0)) throw Error(ErrorKind::PreconditionViolated, "upper_cut must be at least 30");
  if (!(tol > 0.0)) throw Error(ErrorKind::PreconditionViolated, "tolerance must be positive");
  const EigenSystem es = eig_decompose(a);
  QuadSpec spec;
  spec.rel_tol = std::max(tol * 0.1, 1e-14);
  spec.abs_tol = 1e-300;
  return es.apply([&](cplx lambda) {
    if (!(lambda.real() > 0.0))
      throw Error(ErrorKind::EigenvalueOutOfDomain, "gamma integral diverges for eigenvalue " + str(lambda));
    const ScalarQuadResult q = gamma_tail_quadrature(lambda, upper_cut, spec);
    // Tail beyond the cut: t^{p} e^{-t} integrated from the cut, p = Re(lambda) - 1.
    const double p = lambda.real() - 1.0;
    double tail = std::exp(p * std::log(upper_cut) - upper_cut);
    if (p > 0.0) tail /= std::max(1e-3, 1.0 - p / upper_cut);
    const double scale = std::max(1.0, std::abs(q.value));
    if (q.err_estimate + tail > tol * scale)
      throw Error(ErrorKind::ToleranceUnmet, "gamma integral error " + std::to_string(q.err_estimate + tail) +
                                                 " exceeds tolerance for eigenvalue " + str(lambda));
    return q.value;
  });
}

namespace {

void check_beta_pair(const ComplexMatrix& m, const ComplexMatrix& n) {
  require_square(m, "beta argument M");
  require_same_size(m, n, "beta arguments");
  if (!commute_check(m, n, kCommuteTol)) throw Error(ErrorKind::NotCommuting, "beta arguments M and N do not commute");
}

void check_positive(const ComplexVector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!(v(i).real() > 0.0))
      throw Error(ErrorKind::EigenvalueOutOfDomain, std::string(what) + " has eigenvalue " + str(v(i)) +
                                                        " with non-positive real part");
}

}  // namespace

ComplexMatrix mat_beta(const ComplexMatrix& m, const ComplexMatrix& n) {
  check_beta_pair(m, n);
  const EigenSystem em = eig_decompose(m);
  const EigenSystem en = eig_decompose(n);
  check_positive(em.values, "M");
  check_positive(en.values, "N");
  return mat_gamma(GammaArgument(m, em)) * mat_gamma(GammaArgument(n, en)) * mat_gamma_inv(ComplexMatrix(m + n));
}

ComplexMatrix mat_beta_integral_oracle(const ComplexMatrix& m, const ComplexMatrix& n, double tol) {
  check_beta_pair(m, n);
  if (!(tol > 0.0)) throw Error(ErrorKind::PreconditionViolated, "tolerance must be positive");
  const std::array<ComplexMatrix, 2> family{m, n};
  const JointEigenbasis jb = joint_diagonalize(family);
  check_positive(jb.values[0], "M");
  check_positive(jb.values[1], "N");
  QuadSpec spec;
  spec.rel_tol = std::max(tol * 0.1, 1e-14);
  spec.abs_tol = 1e-300;
  ComplexVector b(m.rows());
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    const ScalarQuadResult q = beta_quadrature(jb.values[0](i), jb.values[1](i), spec);
    if (q.err_estimate > tol * std::max(1.0, std::abs(q.value)))
      throw Error(ErrorKind::ToleranceUnmet, "beta integral did not reach tolerance");
    b(i) = q.value;
  }
  return jb.vectors * b.asDiagonal() * jb.vectors_inv;
}

}  // namespace mocalc

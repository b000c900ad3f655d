#include "mocalc/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mocalc {

namespace {

std::string describe(cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

double condition_number(const ComplexMatrix& v) {
  Eigen::JacobiSVD<ComplexMatrix> svd(v);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

// Unit norm, largest-modulus entry real positive. Makes eigenvectors unique
// up to degenerate eigenspaces so repeated runs agree bit for bit.
void normalize_columns(ComplexMatrix& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    auto col = v.col(j);
    const double nrm = col.norm();
    if (nrm > 0.0) col /= nrm;
    Eigen::Index imax = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      // first entry wins ties so the choice is reproducible
      if (std::abs(col(i)) > best * (1.0 + 1e-12)) {
        best = std::abs(col(i));
        imax = i;
      }
    }
    if (best > 0.0) col *= std::conj(col(imax)) / best;
  }
}

}  // namespace

double max_norm(const ComplexMatrix& a) {
  double m = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) m = std::max(m, std::abs(a(i, j)));
  return m;
}

ComplexMatrix identity(Eigen::Index n) { return ComplexMatrix::Identity(n, n); }

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorKind::NonSquare, std::string(what) + " must be a non-empty square matrix, got " +
                                          std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void require_same_size(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::DimensionMismatch, std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                                  "x" + std::to_string(b.cols()));
}

ComplexMatrix EigenSystem::reconstruct() const { return vectors * values.asDiagonal() * vectors_inv; }

ComplexMatrix EigenSystem::apply(const std::function<cplx(cplx)>& f) const {
  ComplexVector fv(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const cplx v = f(values(i));
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw Error(ErrorKind::PoleAtEigenvalue, "function undefined at eigenvalue " + describe(values(i)));
    fv(i) = v;
  }
  return vectors * fv.asDiagonal() * vectors_inv;
}

EigenSystem eig_decompose(const ComplexMatrix& a, double tol) {
  require_square(a, "eig_decompose argument");
  const Eigen::Index n = a.rows();
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, true);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NonDiagonalizable, "eigensolver did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const ComplexVector& raw = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
    if (raw(l).real() != raw(r).real()) return raw(l).real() < raw(r).real();
    return raw(l).imag() < raw(r).imag();
  });

  EigenSystem es;
  es.values.resize(n);
  es.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    es.values(k) = raw(order[static_cast<std::size_t>(k)]);
    es.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  normalize_columns(es.vectors);

  es.cond_estimate = condition_number(es.vectors);
  if (!(es.cond_estimate <= kDiagonalizabilityCeiling))
    throw Error(ErrorKind::NonDiagonalizable,
                "eigenvector condition number " + std::to_string(es.cond_estimate) + " exceeds ceiling");
  es.vectors_inv = es.vectors.partialPivLu().inverse();

  const double scale = max_norm(a);
  if (max_norm(es.reconstruct() - a) > tol * scale ||
      max_norm(es.vectors * es.vectors_inv - identity(n)) > tol * std::max(1.0, es.cond_estimate))
    throw Error(ErrorKind::NonDiagonalizable, "eigendecomposition does not reconstruct the matrix");
  return es;
}

ComplexMatrix holomorphic_apply(const std::function<cplx(cplx)>& f, const ComplexMatrix& a) {
  return eig_decompose(a).apply(f);
}

ComplexMatrix scalar_pow_matrix(double s, const ComplexMatrix& a) {
  if (!(s > 0.0)) throw Error(ErrorKind::NonPositiveBase, "base must be strictly positive, got " + std::to_string(s));
  require_square(a, "exponent");
  if (s == 1.0) return identity(a.rows());
  const double ln_s = std::log(s);
  return eig_decompose(a).apply([ln_s](cplx z) { return std::exp(z * ln_s); });
}

bool commute_check(const ComplexMatrix& a, const ComplexMatrix& b, double rel_tol) {
  require_square(a, "commute_check lhs");
  require_same_size(a, b, "commute_check");
  const double comm = max_norm(a * b - b * a);
  if (comm == 0.0) return true;
  return comm <= rel_tol * max_norm(a) * max_norm(b);
}

JointEigenbasis joint_diagonalize(std::span<const ComplexMatrix> family, double tol) {
  if (family.empty()) throw Error(ErrorKind::DimensionMismatch, "joint_diagonalize needs at least one matrix");
  const Eigen::Index n = family.front().rows();
  for (const auto& m : family) {
    require_square(m, "joint_diagonalize member");
    require_same_size(family.front(), m, "joint_diagonalize");
  }
  // A generic combination separates every joint eigenspace; the weights are
  // fixed so the basis is reproducible.
  ComplexMatrix mix = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 0; k < family.size(); ++k) {
    const double s = max_norm(family[k]);
    if (s == 0.0) continue;
    const double w = 1.3 + std::cos(1.0 + 0.7 * static_cast<double>(k));
    mix += (w / s) * family[k];
  }
  const EigenSystem es = eig_decompose(mix, tol);

  JointEigenbasis jb;
  jb.vectors = es.vectors;
  jb.vectors_inv = es.vectors_inv;
  jb.cond_estimate = es.cond_estimate;
  for (const auto& m : family) {
    const ComplexMatrix d = jb.vectors_inv * m * jb.vectors;
    ComplexMatrix off = d;
    off.diagonal().setZero();
    if (max_norm(off) > tol * std::max(1.0, jb.cond_estimate) * std::max(max_norm(m), 1e-300))
      throw Error(ErrorKind::NonDiagonalizable, "matrices are not simultaneously diagonalizable");
    jb.values.push_back(d.diagonal());
  }
  return jb;
}

ComplexMatrix matrix_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::MalformedInput, "matrix document must be a JSON object");
  for (const char* key : {"n_rows", "n_cols", "data"})
    if (!doc.contains(key)) throw Error(ErrorKind::MalformedInput, std::string("matrix document lacks \"") + key + "\"");
  const auto& jr = doc.at("n_rows");
  const auto& jc = doc.at("n_cols");
  if (!jr.is_number_integer() || !jc.is_number_integer() || jr.get<long long>() <= 0 || jc.get<long long>() <= 0)
    throw Error(ErrorKind::MalformedInput, "n_rows and n_cols must be positive integers");
  const auto rows = jr.get<Eigen::Index>();
  const auto cols = jc.get<Eigen::Index>();
  const auto& data = doc.at("data");
  if (!data.is_array() || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw Error(ErrorKind::MalformedInput, "data must be an array of n_rows*n_cols = " + std::to_string(rows * cols) +
                                               " entries");
  ComplexMatrix a(rows, cols);
  for (Eigen::Index k = 0; k < rows * cols; ++k) {
    const auto& e = data[static_cast<std::size_t>(k)];
    cplx v;
    if (e.is_number()) {
      v = cplx(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      v = cplx(e[0].get<double>(), e[1].get<double>());
    } else {
      throw Error(ErrorKind::MalformedInput, "entry " + std::to_string(k) + " must be [re, im]");
    }
    a(k / cols, k % cols) = v;
  }
  return a;
}

nlohmann::json matrix_to_json(const ComplexMatrix& a) {
  nlohmann::json data = nlohmann::json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) data.push_back({a(i, j).real(), a(i, j).imag()});
  return {{"n_rows", a.rows()}, {"n_cols", a.cols()}, {"data", data}};
}

}  // namespace mocalc

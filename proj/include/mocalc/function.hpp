#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "mocalc/matcore.hpp"

namespace mocalc {

/// A matrix-valued function of one real variable t >= 0. Operators consume
/// this interface so expression input, sampled interpolants and solver
/// outputs can be nested freely.
class MatrixFn {
 public:
  virtual ~MatrixFn() = default;
  virtual Eigen::Index rows() const = 0;
  virtual Eigen::Index cols() const = 0;
  virtual ComplexMatrix operator()(double t) const = 0;
  /// Interior points where the function is only piecewise smooth (sorted).
  virtual std::span<const double> breakpoints() const { return {}; }
  /// True only when the function is known to vanish identically.
  virtual bool is_zero() const { return false; }
};

using MatrixFnPtr = std::shared_ptr<const MatrixFn>;

class LambdaFn final : public MatrixFn {
 public:
  LambdaFn(Eigen::Index rows, Eigen::Index cols, std::function<ComplexMatrix(double)> f,
           std::vector<double> breaks = {})
      : rows_(rows), cols_(cols), f_(std::move(f)), breaks_(std::move(breaks)) {}

  Eigen::Index rows() const override { return rows_; }
  Eigen::Index cols() const override { return cols_; }
  ComplexMatrix operator()(double t) const override { return f_(t); }
  std::span<const double> breakpoints() const override { return breaks_; }

 private:
  Eigen::Index rows_, cols_;
  std::function<ComplexMatrix(double)> f_;
  std::vector<double> breaks_;
};

inline MatrixFnPtr make_fn(Eigen::Index rows, Eigen::Index cols, std::function<ComplexMatrix(double)> f,
                           std::vector<double> breaks = {}) {
  return std::make_shared<LambdaFn>(rows, cols, std::move(f), std::move(breaks));
}

/// t -> L * F(t).
inline MatrixFnPtr left_multiply(const ComplexMatrix& l, MatrixFnPtr f) {
  std::vector<double> br(f->breakpoints().begin(), f->breakpoints().end());
  const auto cols = f->cols();
  return make_fn(l.rows(), cols, [l, f](double t) -> ComplexMatrix { return l * (*f)(t); }, std::move(br));
}

}  // namespace mocalc

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mocalc/function.hpp"
#include "mocalc/matcore.hpp"

namespace mocalc {

/// Raised by parse(); carries the byte offset and the tokens that would have
/// been accepted there.
class ExprSyntaxError : public Error {
 public:
  ExprSyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail);
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

enum class ExprOp { Const, Var, Neg, Sin, Cos, Exp, Ln, Sqrt, Add, Sub, Mul, Div, Pow };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprOp op;
  cplx value{};     // Const, and the exponent of Pow
  ExprNodePtr lhs;  // operand of unary ops, left operand of binary ops
  ExprNodePtr rhs;
};

struct EvalOptions {
  /// Allow ln/sqrt/non-integer powers of non-positive reals (principal branch).
  bool complex_mode = false;
};

/// Immutable expression in the single variable t.
class FunctionExpr {
 public:
  FunctionExpr();  // the constant 0
  explicit FunctionExpr(ExprNodePtr root) : root_(std::move(root)) {}

  static FunctionExpr constant(cplx c);
  static FunctionExpr variable();

  /// Throws DomainError naming the node (pre-order index) and t.
  cplx eval(cplx t, const EvalOptions& opts = {}) const;
  FunctionExpr diff() const;
  /// Canonical, fully parenthesized form; parse(print()) rebuilds the tree.
  std::string print() const;

  bool is_constant() const;
  bool is_zero() const;
  const ExprNodePtr& root() const { return root_; }

  friend bool operator==(const FunctionExpr& a, const FunctionExpr& b);

 private:
  ExprNodePtr root_;
};

FunctionExpr parse(std::string_view src);

FunctionExpr operator+(const FunctionExpr& a, const FunctionExpr& b);
FunctionExpr operator-(const FunctionExpr& a, const FunctionExpr& b);
FunctionExpr operator*(const FunctionExpr& a, const FunctionExpr& b);
FunctionExpr operator/(const FunctionExpr& a, const FunctionExpr& b);

/// Rectangular array of expressions (row-major).
class MatrixFunction {
 public:
  MatrixFunction(Eigen::Index rows, Eigen::Index cols, std::vector<FunctionExpr> entries);
  static MatrixFunction zero(Eigen::Index rows, Eigen::Index cols);
  /// Single expression repeated in every entry.
  static MatrixFunction broadcast(const FunctionExpr& e, Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const FunctionExpr& at(Eigen::Index i, Eigen::Index j) const {
    return entries_[static_cast<std::size_t>(i * cols_ + j)];
  }
  const std::vector<FunctionExpr>& entries() const { return entries_; }

  bool is_zero() const;
  MatrixFunction diff() const;

 private:
  Eigen::Index rows_, cols_;
  std::vector<FunctionExpr> entries_;
};

/// Entrywise evaluation; DomainError names the offending (row, col).
ComplexMatrix eval_matrix(const MatrixFunction& f, cplx t, const EvalOptions& opts = {});

/// JSON: a string (1x1), an array of strings (column) or
/// {"n_rows": r, "n_cols": c, "entries": [...]}.
MatrixFunction matrix_function_from_json(const nlohmann::json& doc);
nlohmann::json matrix_function_to_json(const MatrixFunction& f);

/// Adapter so expression matrices feed the operators.
class ExprMatrixFn final : public MatrixFn {
 public:
  explicit ExprMatrixFn(MatrixFunction f, EvalOptions opts = {}) : f_(std::move(f)), opts_(opts) {}
  Eigen::Index rows() const override { return f_.rows(); }
  Eigen::Index cols() const override { return f_.cols(); }
  ComplexMatrix operator()(double t) const override { return eval_matrix(f_, t, opts_); }
  bool is_zero() const override { return f_.is_zero(); }
  const MatrixFunction& expr() const { return f_; }

 private:
  MatrixFunction f_;
  EvalOptions opts_;
};

inline MatrixFnPtr make_expr_fn(MatrixFunction f) { return std::make_shared<ExprMatrixFn>(std::move(f)); }

}  // namespace mocalc

#include "mocalc/exprfn.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>

namespace mocalc {

namespace {

constexpr double kTinyDenominator = 1e-300;
constexpr int kMaxNesting = 256;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

// Raised inside evaluation; eval() turns it into a DomainError with the
// pre-order index of the node.
struct NodeFailure {
  const ExprNode* node;
  std::string why;
};

bool is_real_nonpositive(cplx z) { return z.imag() == 0.0 && z.real() <= 0.0; }

std::optional<long long> as_small_integer(cplx c) {
  if (c.imag() != 0.0 || std::abs(c.real()) > 1024.0 || c.real() != std::trunc(c.real())) return std::nullopt;
  return static_cast<long long>(c.real());
}

cplx int_pow(cplx base, long long n) {
  cplx result = 1.0;
  cplx b = base;
  for (long long k = n < 0 ? -n : n; k > 0; k >>= 1) {
    if (k & 1) result *= b;
    b *= b;
  }
  return result;
}

cplx eval_node(const ExprNode& n, cplx t, const EvalOptions& opts) {
  auto fail = [&](std::string why) { throw NodeFailure{&n, std::move(why)}; };
  switch (n.op) {
    case ExprOp::Const:
      return n.value;
    case ExprOp::Var:
      return t;
    case ExprOp::Neg:
      return -eval_node(*n.lhs, t, opts);
    case ExprOp::Sin:
      return std::sin(eval_node(*n.lhs, t, opts));
    case ExprOp::Cos:
      return std::cos(eval_node(*n.lhs, t, opts));
    case ExprOp::Exp:
      return std::exp(eval_node(*n.lhs, t, opts));
    case ExprOp::Ln: {
      const cplx a = eval_node(*n.lhs, t, opts);
      if (a == 0.0) fail("ln of zero");
      if (!opts.complex_mode && is_real_nonpositive(a)) fail("ln of a non-positive real");
      return std::log(a);
    }
    case ExprOp::Sqrt: {
      const cplx a = eval_node(*n.lhs, t, opts);
      if (!opts.complex_mode && a.imag() == 0.0 && a.real() < 0.0) fail("sqrt of a negative real");
      return std::sqrt(a);
    }
    case ExprOp::Add:
      return eval_node(*n.lhs, t, opts) + eval_node(*n.rhs, t, opts);
    case ExprOp::Sub:
      return eval_node(*n.lhs, t, opts) - eval_node(*n.rhs, t, opts);
    case ExprOp::Mul:
      return eval_node(*n.lhs, t, opts) * eval_node(*n.rhs, t, opts);
    case ExprOp::Div: {
      const cplx num = eval_node(*n.lhs, t, opts);
      const cplx den = eval_node(*n.rhs, t, opts);
      if (std::abs(den) < kTinyDenominator) fail("division by a value of magnitude below 1e-300");
      return num / den;
    }
    case ExprOp::Pow: {
      const cplx b = eval_node(*n.lhs, t, opts);
      const cplx c = n.value;
      if (auto k = as_small_integer(c)) {
        if (*k >= 0) return int_pow(b, *k);
        if (std::abs(b) < kTinyDenominator) fail("negative power of zero");
        return 1.0 / int_pow(b, *k);
      }
      if (b == 0.0) {
        if (c.real() > 0.0) return 0.0;
        fail("non-positive power of zero");
      }
      if (!opts.complex_mode && is_real_nonpositive(b)) fail("non-integer power of a negative real");
      return std::exp(c * std::log(b));
    }
  }
  return 0.0;
}

// Pre-order position of `target` below `n`, counting from `next`.
bool find_index(const ExprNode* n, const ExprNode* target, int& next) {
  if (!n) return false;
  if (n == target) return true;
  ++next;
  return find_index(n->lhs.get(), target, next) || find_index(n->rhs.get(), target, next);
}

ExprNodePtr node(ExprOp op, ExprNodePtr lhs = nullptr, ExprNodePtr rhs = nullptr, cplx value = 0.0) {
  return std::make_shared<const ExprNode>(ExprNode{op, value, std::move(lhs), std::move(rhs)});
}

ExprNodePtr constant_node(cplx c) { return node(ExprOp::Const, nullptr, nullptr, c); }

bool is_const(const ExprNodePtr& n) { return n->op == ExprOp::Const; }
bool is_const(const ExprNodePtr& n, double v) { return n->op == ExprOp::Const && n->value == v; }

// Builders fold constant subtrees when the folded value is finite and strict
// evaluation succeeds; otherwise the tree is kept and the error surfaces at
// evaluation time. Parser and diff share them, so printing is stable.
ExprNodePtr fold(ExprNodePtr n) {
  try {
    const cplx v = eval_node(*n, 0.0, {});
    if (std::isfinite(v.real()) && std::isfinite(v.imag())) return constant_node(v);
  } catch (const NodeFailure&) {
  }
  return n;
}

ExprNodePtr make_unary(ExprOp op, ExprNodePtr a) {
  if (op == ExprOp::Neg && a->op == ExprOp::Neg) return a->lhs;
  ExprNodePtr n = node(op, std::move(a));
  return is_const(n->lhs) ? fold(n) : n;
}

ExprNodePtr make_binary(ExprOp op, ExprNodePtr a, ExprNodePtr b) {
  switch (op) {
    case ExprOp::Add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case ExprOp::Sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make_unary(ExprOp::Neg, b);
      break;
    case ExprOp::Mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return constant_node(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case ExprOp::Div:
      if (is_const(b, 1.0)) return a;
      break;
    default:
      break;
  }
  ExprNodePtr n = node(op, std::move(a), std::move(b));
  return is_const(n->lhs) && is_const(n->rhs) ? fold(n) : n;
}

ExprNodePtr make_pow(ExprNodePtr base, cplx c) {
  if (c == 0.0) return constant_node(1.0);
  if (c == 1.0) return base;
  ExprNodePtr n = node(ExprOp::Pow, std::move(base), nullptr, c);
  return is_const(n->lhs) ? fold(n) : n;
}

ExprNodePtr diff_node(const ExprNodePtr& n) {
  const ExprNodePtr& u = n->lhs;
  auto du = [&] { return diff_node(u); };
  switch (n->op) {
    case ExprOp::Const:
      return constant_node(0.0);
    case ExprOp::Var:
      return constant_node(1.0);
    case ExprOp::Neg:
      return make_unary(ExprOp::Neg, du());
    case ExprOp::Sin:
      return make_binary(ExprOp::Mul, make_unary(ExprOp::Cos, u), du());
    case ExprOp::Cos:
      return make_unary(ExprOp::Neg, make_binary(ExprOp::Mul, make_unary(ExprOp::Sin, u), du()));
    case ExprOp::Exp:
      return make_binary(ExprOp::Mul, n, du());
    case ExprOp::Ln:
      return make_binary(ExprOp::Div, du(), u);
    case ExprOp::Sqrt:
      return make_binary(ExprOp::Div, du(), make_binary(ExprOp::Mul, constant_node(2.0), n));
    case ExprOp::Add:
      return make_binary(ExprOp::Add, du(), diff_node(n->rhs));
    case ExprOp::Sub:
      return make_binary(ExprOp::Sub, du(), diff_node(n->rhs));
    case ExprOp::Mul:
      return make_binary(ExprOp::Add, make_binary(ExprOp::Mul, du(), n->rhs),
                         make_binary(ExprOp::Mul, u, diff_node(n->rhs)));
    case ExprOp::Div: {
      // (u/v)' = u'/v - u v' / v^2
      const ExprNodePtr& v = n->rhs;
      return make_binary(ExprOp::Sub, make_binary(ExprOp::Div, du(), v),
                         make_binary(ExprOp::Div, make_binary(ExprOp::Mul, u, diff_node(v)), make_pow(v, 2.0)));
    }
    case ExprOp::Pow:
      return make_binary(ExprOp::Mul, make_binary(ExprOp::Mul, constant_node(n->value), make_pow(u, n->value - 1.0)),
                         du());
  }
  return constant_node(0.0);
}

std::string print_const(cplx c) {
  if (c.imag() == 0.0) return c.real() < 0.0 ? "(" + fmt17(c.real()) + ")" : fmt17(c.real());
  return "(" + fmt17(c.real()) + " + " + fmt17(c.imag()) + "*i)";
}

void print_node(const ExprNode& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    print_node(*n.lhs, out);
    out += op;
    print_node(*n.rhs, out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    print_node(*n.lhs, out);
    out += ')';
  };
  switch (n.op) {
    case ExprOp::Const: out += print_const(n.value); break;
    case ExprOp::Var: out += 't'; break;
    case ExprOp::Neg:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      break;
    case ExprOp::Sin: call("sin"); break;
    case ExprOp::Cos: call("cos"); break;
    case ExprOp::Exp: call("exp"); break;
    case ExprOp::Ln: call("ln"); break;
    case ExprOp::Sqrt: call("sqrt"); break;
    case ExprOp::Add: binary(" + "); break;
    case ExprOp::Sub: binary(" - "); break;
    case ExprOp::Mul: binary(" * "); break;
    case ExprOp::Div: binary(" / "); break;
    case ExprOp::Pow:
      out += '(';
      print_node(*n.lhs, out);
      out += " ^ " + print_const(n.value) + ")";
      break;
  }
}

bool same_tree(const ExprNode* a, const ExprNode* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->op == b->op && a->value == b->value && same_tree(a->lhs.get(), b->lhs.get()) &&
         same_tree(a->rhs.get(), b->rhs.get());
}

bool has_var(const ExprNode* n) {
  return n && (n->op == ExprOp::Var || has_var(n->lhs.get()) || has_var(n->rhs.get()));
}

// expr    := term (('+' | '-') term)*
// term    := unary (('*' | '/') unary)*
// unary   := ('-' | '+') unary | power
// power   := primary ('^' unary)?
// primary := number | 't' | 'pi' | 'e' | 'i' | name '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view src) : s_(src) {}

  ExprNodePtr run() {
    skip_ws();
    if (pos_ == s_.size()) fail(pos_, operand_tokens(), "empty expression");
    ExprNodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail(pos_, {"operator", "end of input"}, "unexpected character");
    return e;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int depth_ = 0;

  [[noreturn]] static void fail(std::size_t at, std::vector<std::string> expected, const std::string& what) {
    throw ExprSyntaxError(at, std::move(expected), what);
  }

  static std::vector<std::string> operand_tokens() { return {"number", "'t'", "function", "'('", "'-'"}; }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxNesting) fail(p.pos_, {}, "expression nested too deeply");
    }
    ~DepthGuard() { --p.depth_; }
  };

  ExprNodePtr expr() {
    DepthGuard guard(*this);
    ExprNodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_binary(ExprOp::Add, lhs, term());
      else if (accept('-')) lhs = make_binary(ExprOp::Sub, lhs, term());
      else return lhs;
    }
  }

  ExprNodePtr term() {
    ExprNodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make_binary(ExprOp::Mul, lhs, unary());
      else if (accept('/')) lhs = make_binary(ExprOp::Div, lhs, unary());
      else return lhs;
    }
  }

  ExprNodePtr unary() {
    DepthGuard guard(*this);
    if (accept('-')) return make_unary(ExprOp::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  ExprNodePtr power() {
    ExprNodePtr base = primary();
    if (!accept('^')) return base;
    skip_ws();
    const std::size_t exp_at = pos_;
    ExprNodePtr exponent = unary();
    if (!is_const(exponent))
      fail(exp_at, {"constant exponent"}, "exponent must be a constant");
    return make_pow(base, exponent->value);
  }

  ExprNodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail(pos_, operand_tokens(), "unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprNodePtr inner = expr();
      if (!accept(')')) fail(pos_, {"operator", "')'"}, "unbalanced parenthesis");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return name();
    fail(pos_, operand_tokens(), std::string("unexpected character '") + c + "'");
  }

  ExprNodePtr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t count = digits();
    if (pos_ < s_.size() && s_[pos_] == '.') {
      ++pos_;
      count += digits();
    }
    if (count == 0) fail(start, {"digit"}, "malformed number");
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < s_.size() && (s_[look] == '+' || s_[look] == '-')) ++look;
      if (look < s_.size() && std::isdigit(static_cast<unsigned char>(s_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec == std::errc::result_out_of_range) fail(start, {"finite number"}, "number out of range");
    if (ec != std::errc() || ptr != s_.data() + pos_) fail(start, {"number"}, "malformed number");
    return constant_node(v);
  }

  ExprNodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const std::string_view id = s_.substr(start, pos_ - start);
    if (id == "t") return node(ExprOp::Var);
    if (id == "pi") return constant_node(std::numbers::pi);
    if (id == "e") return constant_node(std::numbers::e);
    if (id == "i") return constant_node(cplx(0.0, 1.0));
    ExprOp op;
    if (id == "sin") op = ExprOp::Sin;
    else if (id == "cos") op = ExprOp::Cos;
    else if (id == "exp") op = ExprOp::Exp;
    else if (id == "ln") op = ExprOp::Ln;
    else if (id == "sqrt") op = ExprOp::Sqrt;
    else fail(start, {"'t'", "sin", "cos", "exp", "ln", "sqrt", "pi", "e", "i"}, "unknown name '" + std::string(id) + "'");
    if (!accept('(')) fail(pos_, {"'('"}, "function call needs parentheses");
    ExprNodePtr arg = expr();
    if (!accept(')')) fail(pos_, {"operator", "')'"}, "unbalanced parenthesis");
    return make_unary(op, arg);
  }
};

}  // namespace

ExprSyntaxError::ExprSyntaxError(std::size_t offset, std::vector<std::string> expected, const std::string& detail)
    : Error(ErrorKind::SyntaxError, detail + " at offset " + std::to_string(offset) +
                                        (expected.empty() ? std::string() : "; expected one of: " + join(expected))),
      offset_(offset),
      expected_(std::move(expected)) {}

FunctionExpr::FunctionExpr() : root_(constant_node(0.0)) {}

FunctionExpr FunctionExpr::constant(cplx c) { return FunctionExpr(constant_node(c)); }
FunctionExpr FunctionExpr::variable() { return FunctionExpr(node(ExprOp::Var)); }

cplx FunctionExpr::eval(cplx t, const EvalOptions& opts) const {
  try {
    return eval_node(*root_, t, opts);
  } catch (const NodeFailure& f) {
    int index = 0;
    find_index(root_.get(), f.node, index);
    throw Error(ErrorKind::DomainError, f.why + " at node " + std::to_string(index) + " of " + print() +
                                            ", t = " + print_const(t));
  }
}

FunctionExpr FunctionExpr::diff() const { return FunctionExpr(diff_node(root_)); }

std::string FunctionExpr::print() const {
  std::string out;
  print_node(*root_, out);
  return out;
}

bool FunctionExpr::is_constant() const { return !has_var(root_.get()); }
bool FunctionExpr::is_zero() const { return is_const(root_, 0.0); }

bool operator==(const FunctionExpr& a, const FunctionExpr& b) { return same_tree(a.root_.get(), b.root_.get()); }

FunctionExpr parse(std::string_view src) { return FunctionExpr(Parser(src).run()); }

FunctionExpr operator+(const FunctionExpr& a, const FunctionExpr& b) {
  return FunctionExpr(make_binary(ExprOp::Add, a.root(), b.root()));
}
FunctionExpr operator-(const FunctionExpr& a, const FunctionExpr& b) {
  return FunctionExpr(make_binary(ExprOp::Sub, a.root(), b.root()));
}
FunctionExpr operator*(const FunctionExpr& a, const FunctionExpr& b) {
  return FunctionExpr(make_binary(ExprOp::Mul, a.root(), b.root()));
}
FunctionExpr operator/(const FunctionExpr& a, const FunctionExpr& b) {
  return FunctionExpr(make_binary(ExprOp::Div, a.root(), b.root()));
}

MatrixFunction::MatrixFunction(Eigen::Index rows, Eigen::Index cols, std::vector<FunctionExpr> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (rows < 1 || cols < 1) throw Error(ErrorKind::MalformedInput, "matrix function needs positive dimensions");
  if (static_cast<Eigen::Index>(entries_.size()) != rows * cols)
    throw Error(ErrorKind::MalformedInput, "matrix function has " + std::to_string(entries_.size()) +
                                               " entries, expected " + std::to_string(rows * cols));
}

MatrixFunction MatrixFunction::zero(Eigen::Index rows, Eigen::Index cols) {
  return broadcast(FunctionExpr(), rows, cols);
}

MatrixFunction MatrixFunction::broadcast(const FunctionExpr& e, Eigen::Index rows, Eigen::Index cols) {
  return MatrixFunction(rows, cols, std::vector<FunctionExpr>(static_cast<std::size_t>(rows * cols), e));
}

bool MatrixFunction::is_zero() const {
  for (const auto& e : entries_)
    if (!e.is_zero()) return false;
  return true;
}

MatrixFunction MatrixFunction::diff() const {
  std::vector<FunctionExpr> d;
  d.reserve(entries_.size());
  for (const auto& e : entries_) d.push_back(e.diff());
  return MatrixFunction(rows_, cols_, std::move(d));
}

ComplexMatrix eval_matrix(const MatrixFunction& f, cplx t, const EvalOptions& opts) {
  ComplexMatrix out(f.rows(), f.cols());
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
      try {
        out(i, j) = f.at(i, j).eval(t, opts);
      } catch (const Error& e) {
        throw Error(ErrorKind::DomainError, "entry (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
      }
    }
  return out;
}

MatrixFunction matrix_function_from_json(const nlohmann::json& doc) {
  auto entry = [](const nlohmann::json& v) {
    if (v.is_string()) return parse(v.get<std::string>());
    if (v.is_number()) return FunctionExpr::constant(v.get<double>());
    throw Error(ErrorKind::MalformedInput, "function entries must be strings or numbers");
  };
  if (doc.is_string() || doc.is_number()) return MatrixFunction(1, 1, {entry(doc)});
  if (doc.is_array()) {
    std::vector<FunctionExpr> col;
    for (const auto& v : doc) col.push_back(entry(v));
    const auto n = static_cast<Eigen::Index>(col.size());
    return MatrixFunction(n, 1, std::move(col));
  }
  if (!doc.is_object() || !doc.contains("entries"))
    throw Error(ErrorKind::MalformedInput, "matrix function must be a string, an array or an object with entries");
  const auto& raw = doc.at("entries");
  if (!raw.is_array()) throw Error(ErrorKind::MalformedInput, "entries must be an array");
  const auto rows = doc.value("n_rows", static_cast<long long>(raw.size()));
  const auto cols = doc.value("n_cols", 1LL);
  std::vector<FunctionExpr> entries;
  for (const auto& v : raw) entries.push_back(entry(v));
  return MatrixFunction(rows, cols, std::move(entries));
}

nlohmann::json matrix_function_to_json(const MatrixFunction& f) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : f.entries()) entries.push_back(e.print());
  return {{"n_rows", f.rows()}, {"n_cols", f.cols()}, {"entries", entries}};
}

}  // namespace mocalc

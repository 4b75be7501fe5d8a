#ifndef MINT_EXPR_HPP
#define MINT_EXPR_HPP

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mint {

// Syntax error carrying the byte offset of the offending token.
struct parse_error : std::runtime_error {
  std::size_t offset;
  parse_error(const std::string& msg, std::size_t off)
      : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

// Domain error raised during evaluation (division by zero, non-finite result).
struct eval_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
struct ExprNode;
}

/**
 * Immutable scalar expression over named real variables.
 *
 * Grammar: variables, literals, + - * /, unary -, integer powers with '^',
 * sin, cos, exp and the constant pi. Expressions are kept in an
 * associative-commutative normal form (flattened ordered sums/products,
 * folded constants, merged like terms), which makes symbolic identities
 * such as d(d(w)) = 0 cancel to the literal zero expression.
 */
class Expr {
 public:
  Expr();  // zero
  static Expr constant(double c);
  static Expr var(const std::string& name);
  static Expr pi();

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr pow(int n) const;

  static Expr sin(const Expr& a);
  static Expr cos(const Expr& a);
  static Expr exp(const Expr& a);

  bool is_zero() const;
  bool is_constant() const;          // literal constant after normalization
  double constant_value() const;     // valid when is_constant()

  // Exact structural equality of normal forms.
  bool same_as(const Expr& other) const;

  // Exact symbolic partial derivative.
  Expr diff(const std::string& var) const;

  // Capture-free substitution of variables by expressions.
  Expr subst(const std::vector<std::pair<std::string, Expr>>& bindings) const;

  // Names of the variables occurring in the expression, sorted.
  std::vector<std::string> variables() const;

  std::string str() const;

  // Slow-path evaluation by tree walk; bindings are (name, value) pairs.
  double eval(std::span<const std::pair<std::string, double>> bindings) const;

  std::shared_ptr<const detail::ExprNode> node() const { return node_; }
  explicit Expr(std::shared_ptr<const detail::ExprNode> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const detail::ExprNode> node_;
};

/**
 * Parse `text` into an Expr. Identifiers must be one of `vars`
 * (plus the builtin functions and pi); anything else is a parse_error
 * with the byte offset.
 */
Expr parse_expr(std::string_view text, std::span<const std::string> vars);

/**
 * Expression compiled to a flat tape against a fixed variable chart.
 * Evaluation is pure and safe to run concurrently.
 */
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const Expr& e, std::span<const std::string> chart);

  double operator()(std::span<const double> values) const;

  bool is_constant() const { return ops_.size() == 1 && ops_[0].k == OpKind::Const; }

 private:
  enum class OpKind : unsigned char { Const, Var, Add, Mul, PowI, Sin, Cos, Exp };
  struct Op {
    OpKind k;
    int a = -1, b = -1;  // operand slots
    int n = 0;           // power exponent / variable index
    double c = 0.0;      // constant payload
  };
  std::vector<Op> ops_;  // ops_[i] writes slot i; result is last slot
};

}  // namespace mint

#endif

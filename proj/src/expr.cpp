#include "mint/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace mint {
namespace detail {

enum class Kind : unsigned char { Const, Var, Sum, Prod, Pow, Sin, Cos, Exp };

struct ExprNode {
  Kind kind;
  double value = 0.0;                                    // Const
  std::string name;                                      // Var
  std::vector<std::shared_ptr<const ExprNode>> children; // Sum, Prod
  std::shared_ptr<const ExprNode> arg;                   // Pow base, function arg
  int expo = 0;                                          // Pow exponent
};

using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make_const(double c) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Const;
  n->value = c;
  return n;
}

NodePtr make_var(const std::string& name) {
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Var;
  n->name = name;
  return n;
}

const NodePtr& zero_node() {
  static const NodePtr z = make_const(0.0);
  return z;
}
const NodePtr& one_node() {
  static const NodePtr o = make_const(1.0);
  return o;
}

// Total order on normal forms; equal normal forms compare 0.
int cmp(const NodePtr& a, const NodePtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case Kind::Const:
      if (a->value < b->value) return -1;
      if (a->value > b->value) return 1;
      return 0;
    case Kind::Var:
      return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
    case Kind::Sum:
    case Kind::Prod: {
      std::size_t n = std::min(a->children.size(), b->children.size());
      for (std::size_t i = 0; i < n; ++i)
        if (int c = cmp(a->children[i], b->children[i])) return c;
      if (a->children.size() != b->children.size())
        return a->children.size() < b->children.size() ? -1 : 1;
      return 0;
    }
    case Kind::Pow: {
      if (int c = cmp(a->arg, b->arg)) return c;
      return a->expo < b->expo ? -1 : (a->expo == b->expo ? 0 : 1);
    }
    default:
      return cmp(a->arg, b->arg);
  }
}

NodePtr n_sum(std::vector<NodePtr> children);
NodePtr n_prod(std::vector<NodePtr> children);
NodePtr n_pow(const NodePtr& base, int e);

// Split a normalized term into (coefficient, coefficient-free core).
std::pair<double, NodePtr> coef_core(const NodePtr& t) {
  if (t->kind == Kind::Const) return {t->value, one_node()};
  if (t->kind == Kind::Prod && t->children.front()->kind == Kind::Const) {
    double c = t->children.front()->value;
    std::vector<NodePtr> rest(t->children.begin() + 1, t->children.end());
    if (rest.size() == 1) return {c, rest[0]};
    auto n = std::make_shared<ExprNode>();
    n->kind = Kind::Prod;
    n->children = std::move(rest);
    return {c, n};
  }
  return {1.0, t};
}

NodePtr scale(const NodePtr& t, double c) {
  if (c == 0.0) return zero_node();
  if (c == 1.0) return t;
  return n_prod({make_const(c), t});
}

NodePtr n_sum(std::vector<NodePtr> children) {
  std::vector<NodePtr> flat;
  for (auto& ch : children) {
    if (ch->kind == Kind::Sum)
      flat.insert(flat.end(), ch->children.begin(), ch->children.end());
    else
      flat.push_back(ch);
  }
  // merge like cores
  std::vector<std::pair<NodePtr, double>> terms;  // core -> coef
  double cst = 0.0;
  for (auto& ch : flat) {
    auto [c, core] = coef_core(ch);
    if (core->kind == Kind::Const) {
      cst += c * core->value;
      continue;
    }
    bool found = false;
    for (auto& [k, v] : terms)
      if (cmp(k, core) == 0) {
        v += c;
        found = true;
        break;
      }
    if (!found) terms.emplace_back(core, c);
  }
  std::vector<NodePtr> out;
  if (cst != 0.0) out.push_back(make_const(cst));
  std::vector<NodePtr> scaled;
  for (auto& [core, c] : terms)
    if (c != 0.0) scaled.push_back(scale(core, c));
  std::sort(scaled.begin(), scaled.end(), [](const NodePtr& x, const NodePtr& y) { return cmp(x, y) < 0; });
  out.insert(out.end(), scaled.begin(), scaled.end());
  if (out.empty()) return zero_node();
  if (out.size() == 1) return out[0];
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Sum;
  n->children = std::move(out);
  return n;
}

std::pair<NodePtr, int> base_expo(const NodePtr& f) {
  if (f->kind == Kind::Pow) return {f->arg, f->expo};
  return {f, 1};
}

NodePtr n_prod(std::vector<NodePtr> children) {
  std::vector<NodePtr> flat;
  for (auto& ch : children) {
    if (ch->kind == Kind::Prod)
      flat.insert(flat.end(), ch->children.begin(), ch->children.end());
    else
      flat.push_back(ch);
  }
  double cst = 1.0;
  std::vector<std::pair<NodePtr, int>> factors;
  bool pending_sumdist = false;
  for (auto& ch : flat) {
    if (ch->kind == Kind::Const) {
      cst *= ch->value;
      continue;
    }
    auto [b, e] = base_expo(ch);
    bool found = false;
    for (auto& [k, v] : factors)
      if (cmp(k, b) == 0) {
        v += e;
        found = true;
        break;
      }
    if (!found) factors.emplace_back(b, e);
  }
  (void)pending_sumdist;
  if (cst == 0.0) return zero_node();
  std::vector<NodePtr> out;
  for (auto& [b, e] : factors) {
    if (e == 0) continue;
    out.push_back(n_pow(b, e));
  }
  std::sort(out.begin(), out.end(), [](const NodePtr& x, const NodePtr& y) { return cmp(x, y) < 0; });
  if (out.empty()) return make_const(cst);
  // constants distribute over a lone sum so that c*(a+b) and c*a + c*b
  // share a normal form
  if (cst != 1.0 && out.size() == 1 && out[0]->kind == Kind::Sum) {
    std::vector<NodePtr> parts;
    parts.reserve(out[0]->children.size());
    for (auto& ch : out[0]->children) parts.push_back(n_prod({make_const(cst), ch}));
    return n_sum(std::move(parts));
  }
  if (cst != 1.0) out.insert(out.begin(), make_const(cst));
  if (out.size() == 1) return out[0];
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Prod;
  n->children = std::move(out);
  return n;
}

NodePtr n_pow(const NodePtr& base, int e) {
  if (e == 0) return one_node();
  if (e == 1) return base;
  if (base->kind == Kind::Const) return make_const(std::pow(base->value, e));
  if (base->kind == Kind::Pow) return n_pow(base->arg, base->expo * e);
  if (base->kind == Kind::Prod) {
    std::vector<NodePtr> parts;
    parts.reserve(base->children.size());
    for (auto& ch : base->children) parts.push_back(n_pow(ch, e));
    return n_prod(std::move(parts));
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = Kind::Pow;
  n->arg = base;
  n->expo = e;
  return n;
}

NodePtr n_fun(Kind k, const NodePtr& arg) {
  if (arg->kind == Kind::Const) {
    double v = arg->value;
    switch (k) {
      case Kind::Sin: return make_const(std::sin(v));
      case Kind::Cos: return make_const(std::cos(v));
      default: return make_const(std::exp(v));
    }
  }
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->arg = arg;
  return n;
}

NodePtr n_diff(const NodePtr& e, const std::string& v) {
  switch (e->kind) {
    case Kind::Const: return zero_node();
    case Kind::Var: return e->name == v ? one_node() : zero_node();
    case Kind::Sum: {
      std::vector<NodePtr> parts;
      for (auto& ch : e->children) parts.push_back(n_diff(ch, v));
      return n_sum(std::move(parts));
    }
    case Kind::Prod: {
      std::vector<NodePtr> parts;
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        std::vector<NodePtr> factors;
        for (std::size_t j = 0; j < e->children.size(); ++j)
          factors.push_back(i == j ? n_diff(e->children[j], v) : e->children[j]);
        parts.push_back(n_prod(std::move(factors)));
      }
      return n_sum(std::move(parts));
    }
    case Kind::Pow:
      return n_prod({make_const(double(e->expo)), n_pow(e->arg, e->expo - 1), n_diff(e->arg, v)});
    case Kind::Sin: return n_prod({n_fun(Kind::Cos, e->arg), n_diff(e->arg, v)});
    case Kind::Cos: return n_prod({make_const(-1.0), n_fun(Kind::Sin, e->arg), n_diff(e->arg, v)});
    default: return n_prod({n_fun(Kind::Exp, e->arg), n_diff(e->arg, v)});
  }
}

NodePtr n_subst(const NodePtr& e, const std::vector<std::pair<std::string, NodePtr>>& b) {
  switch (e->kind) {
    case Kind::Const: return e;
    case Kind::Var:
      for (auto& [name, repl] : b)
        if (name == e->name) return repl;
      return e;
    case Kind::Sum:
    case Kind::Prod: {
      std::vector<NodePtr> parts;
      for (auto& ch : e->children) parts.push_back(n_subst(ch, b));
      return e->kind == Kind::Sum ? n_sum(std::move(parts)) : n_prod(std::move(parts));
    }
    case Kind::Pow: return n_pow(n_subst(e->arg, b), e->expo);
    default: return n_fun(e->kind, n_subst(e->arg, b));
  }
}

void collect_vars(const NodePtr& e, std::vector<std::string>& out) {
  switch (e->kind) {
    case Kind::Const: return;
    case Kind::Var:
      if (std::find(out.begin(), out.end(), e->name) == out.end()) out.push_back(e->name);
      return;
    case Kind::Sum:
    case Kind::Prod:
      for (auto& ch : e->children) collect_vars(ch, out);
      return;
    default: collect_vars(e->arg, out);
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Canonical printer; output re-parses to the same normal form.
void print_node(const NodePtr& e, std::string& out, int parent_prec);

void print_sum(const NodePtr& e, std::string& out) {
  for (std::size_t i = 0; i < e->children.size(); ++i) {
    auto [c, core] = coef_core(e->children[i]);
    if (i == 0) {
      print_node(e->children[i], out, 0);
    } else if (c < 0) {
      out += " - ";
      NodePtr pos = scale(core, -c);
      print_node(pos, out, 1);
    } else {
      out += " + ";
      print_node(e->children[i], out, 1);
    }
  }
}

// precedence: 0 sum, 1 product, 2 power/unary
void print_node(const NodePtr& e, std::string& out, int parent_prec) {
  switch (e->kind) {
    case Kind::Const: {
      bool neg = e->value < 0;
      if (neg && parent_prec > 0) out += "(";
      out += fmt_double(e->value);
      if (neg && parent_prec > 0) out += ")";
      return;
    }
    case Kind::Var: out += e->name; return;
    case Kind::Sum: {
      bool par = parent_prec > 0;
      if (par) out += "(";
      print_sum(e, out);
      if (par) out += ")";
      return;
    }
    case Kind::Prod: {
      bool par = parent_prec > 1;
      if (par) out += "(";
      for (std::size_t i = 0; i < e->children.size(); ++i) {
        if (i) out += "*";
        print_node(e->children[i], out, 2);
      }
      if (par) out += ")";
      return;
    }
    case Kind::Pow: {
      print_node(e->arg, out, 2);
      out += "^";
      out += std::to_string(e->expo);
      return;
    }
    case Kind::Sin: out += "sin("; print_node(e->arg, out, 0); out += ")"; return;
    case Kind::Cos: out += "cos("; print_node(e->arg, out, 0); out += ")"; return;
    default: out += "exp("; print_node(e->arg, out, 0); out += ")"; return;
  }
}

double n_eval(const NodePtr& e, std::span<const std::pair<std::string, double>> b) {
  switch (e->kind) {
    case Kind::Const: return e->value;
    case Kind::Var:
      for (auto& [name, val] : b)
        if (name == e->name) return val;
      throw eval_error("unbound variable: " + e->name);
    case Kind::Sum: {
      double s = 0;
      for (auto& ch : e->children) s += n_eval(ch, b);
      return s;
    }
    case Kind::Prod: {
      double p = 1;
      for (auto& ch : e->children) p *= n_eval(ch, b);
      return p;
    }
    case Kind::Pow: {
      double base = n_eval(e->arg, b);
      if (base == 0.0 && e->expo < 0) throw eval_error("division by zero");
      return std::pow(base, e->expo);
    }
    case Kind::Sin: return std::sin(n_eval(e->arg, b));
    case Kind::Cos: return std::cos(n_eval(e->arg, b));
    default: return std::exp(n_eval(e->arg, b));
  }
}

}  // namespace
}  // namespace detail

using detail::ExprNode;
using detail::Kind;
using detail::NodePtr;

Expr::Expr() : node_(detail::zero_node()) {}
Expr Expr::constant(double c) { return Expr(detail::make_const(c)); }
Expr Expr::var(const std::string& name) { return Expr(detail::make_var(name)); }
Expr Expr::pi() { return Expr(detail::make_const(M_PI)); }

Expr operator+(const Expr& a, const Expr& b) { return Expr(detail::n_sum({a.node(), b.node()})); }
Expr operator-(const Expr& a, const Expr& b) {
  return Expr(detail::n_sum({a.node(), detail::scale(b.node(), -1.0)}));
}
Expr operator*(const Expr& a, const Expr& b) { return Expr(detail::n_prod({a.node(), b.node()})); }
Expr operator/(const Expr& a, const Expr& b) {
  return Expr(detail::n_prod({a.node(), detail::n_pow(b.node(), -1)}));
}
Expr operator-(const Expr& a) { return Expr(detail::scale(a.node(), -1.0)); }
Expr Expr::pow(int n) const { return Expr(detail::n_pow(node_, n)); }
Expr Expr::sin(const Expr& a) { return Expr(detail::n_fun(Kind::Sin, a.node())); }
Expr Expr::cos(const Expr& a) { return Expr(detail::n_fun(Kind::Cos, a.node())); }
Expr Expr::exp(const Expr& a) { return Expr(detail::n_fun(Kind::Exp, a.node())); }

bool Expr::is_zero() const { return node_->kind == Kind::Const && node_->value == 0.0; }
bool Expr::is_constant() const { return node_->kind == Kind::Const; }
double Expr::constant_value() const { return node_->value; }
bool Expr::same_as(const Expr& other) const { return detail::cmp(node_, other.node_) == 0; }

Expr Expr::diff(const std::string& var) const { return Expr(detail::n_diff(node_, var)); }

Expr Expr::subst(const std::vector<std::pair<std::string, Expr>>& bindings) const {
  std::vector<std::pair<std::string, NodePtr>> b;
  b.reserve(bindings.size());
  for (auto& [name, e] : bindings) b.emplace_back(name, e.node());
  return Expr(detail::n_subst(node_, b));
}

std::vector<std::string> Expr::variables() const {
  std::vector<std::string> out;
  detail::collect_vars(node_, out);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Expr::str() const {
  std::string out;
  detail::print_node(node_, out, 0);
  return out;
}

double Expr::eval(std::span<const std::pair<std::string, double>> bindings) const {
  double v = detail::n_eval(node_, bindings);
  if (!std::isfinite(v)) throw eval_error("non-finite evaluation of: " + str());
  return v;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  std::span<const std::string> vars;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool eof() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw parse_error(std::string("expected '") + c + "'", pos);
  }

  Expr parse_full() {
    Expr e = parse_sum();
    if (!eof()) throw parse_error("unexpected trailing input", pos);
    return e;
  }

  Expr parse_sum() {
    Expr e = parse_term();
    while (true) {
      if (accept('+'))
        e = e + parse_term();
      else if (accept('-'))
        e = e - parse_term();
      else
        return e;
    }
  }

  Expr parse_term() {
    Expr e = parse_unary();
    while (true) {
      if (accept('*'))
        e = e * parse_unary();
      else if (accept('/'))
        e = e / parse_unary();
      else
        return e;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) {
      skip_ws();
      bool neg = accept('-');
      skip_ws();
      std::size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos == start) throw parse_error("expected integer exponent", pos);
      int e = std::atoi(std::string(text.substr(start, pos - start)).c_str());
      base = base.pow(neg ? -e : e);
    }
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos >= text.size()) throw parse_error("unexpected end of input", pos);
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text.data() + pos;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw parse_error("malformed number", pos);
      pos += static_cast<std::size_t>(end - begin);
      return Expr::constant(v);
    }
    if (c == '(') {
      ++pos;
      Expr e = parse_sum();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
        ++pos;
      std::string id(text.substr(start, pos - start));
      if (id == "pi") return Expr::pi();
      if (id == "sin" || id == "cos" || id == "exp") {
        expect('(');
        Expr arg = parse_sum();
        expect(')');
        if (id == "sin") return Expr::sin(arg);
        if (id == "cos") return Expr::cos(arg);
        return Expr::exp(arg);
      }
      for (const auto& v : vars)
        if (v == id) return Expr::var(id);
      throw parse_error("unknown identifier '" + id + "'", start);
    }
    throw parse_error(std::string("unexpected character '") + c + "'", pos);
  }
};

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> vars) {
  if (text.empty()) throw parse_error("empty expression", 0);
  Parser p{text, 0, vars};
  return p.parse_full();
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const Expr& e, std::span<const std::string> chart) {
  struct Builder {
    std::vector<Op>& ops;
    std::span<const std::string> chart;

    int emit(Op op) {
      ops.push_back(op);
      return static_cast<int>(ops.size()) - 1;
    }

    int build(const NodePtr& n) {
      switch (n->kind) {
        case Kind::Const: return emit({OpKind::Const, -1, -1, 0, n->value});
        case Kind::Var: {
          for (std::size_t i = 0; i < chart.size(); ++i)
            if (chart[i] == n->name)
              return emit({OpKind::Var, -1, -1, static_cast<int>(i), 0.0});
          throw eval_error("variable '" + n->name + "' not in chart");
        }
        case Kind::Sum:
        case Kind::Prod: {
          OpKind k = n->kind == Kind::Sum ? OpKind::Add : OpKind::Mul;
          int acc = build(n->children[0]);
          for (std::size_t i = 1; i < n->children.size(); ++i) {
            int rhs = build(n->children[i]);
            acc = emit({k, acc, rhs, 0, 0.0});
          }
          return acc;
        }
        case Kind::Pow: {
          int a = build(n->arg);
          return emit({OpKind::PowI, a, -1, n->expo, 0.0});
        }
        case Kind::Sin: {
          int a = build(n->arg);
          return emit({OpKind::Sin, a, -1, 0, 0.0});
        }
        case Kind::Cos: {
          int a = build(n->arg);
          return emit({OpKind::Cos, a, -1, 0, 0.0});
        }
        default: {
          int a = build(n->arg);
          return emit({OpKind::Exp, a, -1, 0, 0.0});
        }
      }
    }
  };
  Builder b{ops_, chart};
  b.build(e.node());
}

double CompiledExpr::operator()(std::span<const double> values) const {
  double small[64];
  std::vector<double> big;
  double* slots = small;
  if (ops_.size() > 64) {
    big.resize(ops_.size());
    slots = big.data();
  }
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    switch (op.k) {
      case OpKind::Const: slots[i] = op.c; break;
      case OpKind::Var: slots[i] = values[static_cast<std::size_t>(op.n)]; break;
      case OpKind::Add: slots[i] = slots[op.a] + slots[op.b]; break;
      case OpKind::Mul: slots[i] = slots[op.a] * slots[op.b]; break;
      case OpKind::PowI: {
        double base = slots[op.a];
        if (base == 0.0 && op.n < 0) throw eval_error("division by zero");
        slots[i] = std::pow(base, op.n);
        break;
      }
      case OpKind::Sin: slots[i] = std::sin(slots[op.a]); break;
      case OpKind::Cos: slots[i] = std::cos(slots[op.a]); break;
      case OpKind::Exp: slots[i] = std::exp(slots[op.a]); break;
    }
  }
  double v = slots[ops_.size() - 1];
  if (!std::isfinite(v)) throw eval_error("non-finite evaluation");
  return v;
}

}  // namespace mint

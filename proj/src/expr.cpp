#include "fracvar/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace fracvar {

namespace {

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr make_const(Complex v) {
  Expr e;
  e.kind = NodeKind::Const;
  e.value = v;
  return node(std::move(e));
}

ExprPtr make_param(std::string name) {
  Expr e;
  e.kind = NodeKind::Param;
  e.name = std::move(name);
  return node(std::move(e));
}

ExprPtr make_time() {
  Expr e;
  e.kind = NodeKind::Time;
  return node(std::move(e));
}

ExprPtr make_coord(int index) {
  Expr e;
  e.kind = NodeKind::Coord;
  e.index = index;
  return node(std::move(e));
}

ExprPtr make_coord_order(double order) {
  Expr e;
  e.kind = NodeKind::CoordOrder;
  e.order = order;
  return node(std::move(e));
}

ExprPtr make_mom(int index) {
  Expr e;
  e.kind = NodeKind::Mom;
  e.index = index;
  return node(std::move(e));
}

ExprPtr make_unary(NodeKind k, ExprPtr child) {
  Expr e;
  e.kind = k;
  e.lhs = std::move(child);
  return node(std::move(e));
}

ExprPtr make_binary(NodeKind k, ExprPtr lhs, ExprPtr rhs) {
  Expr e;
  e.kind = k;
  e.lhs = std::move(lhs);
  e.rhs = std::move(rhs);
  return node(std::move(e));
}

ExprPtr make_pow(ExprPtr base, int exponent) {
  if (exponent < 0)
    throw std::invalid_argument("make_pow: exponent must be >= 0");
  Expr e;
  e.kind = NodeKind::Pow;
  e.lhs = std::move(base);
  e.exponent = exponent;
  return node(std::move(e));
}

ExprPtr make_rderiv(double order, ExprPtr child) {
  if (order < 0.0)
    throw std::invalid_argument("make_rderiv: order must be >= 0");
  Expr e;
  e.kind = NodeKind::RDeriv;
  e.order = order;
  e.lhs = std::move(child);
  return node(std::move(e));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  Parser(const std::string& text, const ParseOptions& opts)
      : s_(text), opts_(opts) {}

  ExprPtr run() {
    ExprPtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  ParseOptions opts_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg + " at position " + std::to_string(pos_), pos_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool peek_char(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool accept(char c) {
    if (peek_char(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  ExprPtr expr() {
    ExprPtr e = term();
    for (;;) {
      if (accept('+'))
        e = make_binary(NodeKind::Add, e, term());
      else if (accept('-'))
        e = make_binary(NodeKind::Sub, e, term());
      else
        return e;
    }
  }

  ExprPtr term() {
    ExprPtr e = unary();
    for (;;) {
      if (accept('*'))
        e = make_binary(NodeKind::Mul, e, unary());
      else if (accept('/')) {
        ExprPtr d = unary();
        if (d->kind == NodeKind::Const && d->value == Complex(0.0))
          fail("division by the literal 0");
        e = make_binary(NodeKind::Div, e, d);
      } else
        return e;
    }
  }

  ExprPtr unary() {
    if (accept('-')) return make_unary(NodeKind::Neg, unary());
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (accept('^')) {
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      if (pos_ == start) fail("expected non-negative integer exponent");
      base = make_pow(base, std::atoi(s_.substr(start, pos_ - start).c_str()));
    }
    return base;
  }

  double number() {
    skip_ws();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  int coord_index_from(const std::string& digits) {
    int idx = std::atoi(digits.c_str());
    if (opts_.max_coord_index >= 0 && idx > opts_.max_coord_index)
      fail("coordinate index out of range: " + digits);
    return idx;
  }

  ExprPtr atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return make_const(Complex(number()));
    if (c == '(') {
      ++pos_;
      ExprPtr e = expr();
      expect(')');
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return identifier();
    fail("unexpected character");
  }

  ExprPtr identifier() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string name = s_.substr(start, pos_ - start);
    if (name == "i") return make_const(Complex(0.0, 1.0));
    if (name == "t") return make_time();
    if ((name == "sin" || name == "cos" || name == "exp") && peek_char('(')) {
      ++pos_;
      ExprPtr arg = expr();
      expect(')');
      NodeKind k = name == "sin" ? NodeKind::Sin
                 : name == "cos" ? NodeKind::Cos
                                 : NodeKind::Exp;
      return make_unary(k, arg);
    }
    if (name == "q_half" || name == "p_half") {
      if (opts_.half_index < 0)
        fail("'" + name + "' used without a half-order ladder slot");
      return name[0] == 'q' ? make_coord(opts_.half_index)
                            : make_mom(opts_.half_index);
    }
    if (name == "x" && peek_char('[')) {
      ++pos_;
      double nu = number();
      expect(']');
      if (nu < 0.0) fail("coordinate order must be >= 0");
      return make_coord_order(nu);
    }
    if (name == "D" && peek_char('[')) {
      ++pos_;
      double nu = number();
      expect(']');
      if (nu < 0.0) fail("derivative order must be >= 0");
      expect('(');
      ExprPtr arg = expr();
      expect(')');
      return make_rderiv(nu, arg);
    }
    if ((name[0] == 'q' || name[0] == 'p') && name.size() > 1 &&
        std::all_of(name.begin() + 1, name.end(), [](char d) {
          return std::isdigit(static_cast<unsigned char>(d));
        })) {
      int idx = coord_index_from(name.substr(1));
      return name[0] == 'q' ? make_coord(idx) : make_mom(idx);
    }
    return make_param(std::move(name));
  }
};

}  // namespace

ExprPtr parse(const std::string& text, const ParseOptions& opts) {
  return Parser(text, opts).run();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_const(Complex v) {
  if (v.imag() == 0.0) return fmt_double(v.real());
  std::string im = v.imag() == 1.0    ? "i"
                   : v.imag() == -1.0 ? "-i"
                                      : fmt_double(v.imag()) + "*i";
  if (v.real() == 0.0) return im;
  std::string sep = (v.imag() > 0.0 || std::isnan(v.imag())) ? "+" : "";
  return "(" + fmt_double(v.real()) + sep + im + ")";
}

int precedence(const ExprPtr& e) {
  switch (e->kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
      return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
      return 2;
    case NodeKind::Neg:
      return 3;
    case NodeKind::Pow:
      return 4;
    case NodeKind::Const:
      // negative literals print with a leading sign
      return (e->value.real() < 0.0 && e->value.imag() == 0.0) ||
                     (e->value.real() == 0.0 && e->value.imag() < 0.0)
                 ? 3
                 : 5;
    default:
      return 5;
  }
}

void print_rec(const ExprPtr& e, std::string& out);

void print_child(const ExprPtr& child, int parent_prec, bool strict,
                 std::string& out) {
  int p = precedence(child);
  bool parens = strict ? p <= parent_prec : p < parent_prec;
  if (parens) out += '(';
  print_rec(child, out);
  if (parens) out += ')';
}

void print_rec(const ExprPtr& e, std::string& out) {
  switch (e->kind) {
    case NodeKind::Const:
      out += fmt_const(e->value);
      break;
    case NodeKind::Param:
      out += e->name;
      break;
    case NodeKind::Time:
      out += 't';
      break;
    case NodeKind::Coord:
      out += 'q' + std::to_string(e->index);
      break;
    case NodeKind::CoordOrder:
      out += "x[" + fmt_double(e->order) + "]";
      break;
    case NodeKind::Mom:
      out += 'p' + std::to_string(e->index);
      break;
    case NodeKind::Neg:
      out += '-';
      print_child(e->lhs, 3, false, out);
      break;
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Exp:
      out += e->kind == NodeKind::Sin ? "sin(" : e->kind == NodeKind::Cos ? "cos(" : "exp(";
      print_rec(e->lhs, out);
      out += ')';
      break;
    case NodeKind::Add:
      print_child(e->lhs, 1, false, out);
      out += " + ";
      print_child(e->rhs, 1, true, out);
      break;
    case NodeKind::Sub:
      print_child(e->lhs, 1, false, out);
      out += " - ";
      print_child(e->rhs, 1, true, out);
      break;
    case NodeKind::Mul:
      print_child(e->lhs, 2, false, out);
      out += '*';
      print_child(e->rhs, 2, true, out);
      break;
    case NodeKind::Div:
      print_child(e->lhs, 2, false, out);
      out += '/';
      print_child(e->rhs, 2, true, out);
      break;
    case NodeKind::Pow:
      print_child(e->lhs, 4, true, out);
      out += '^' + std::to_string(e->exponent);
      break;
    case NodeKind::RDeriv:
      out += "D[" + fmt_double(e->order) + "](";
      print_rec(e->lhs, out);
      out += ')';
      break;
  }
}

}  // namespace

std::string print(const ExprPtr& e) {
  std::string out;
  print_rec(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Structural comparison

namespace {

int cmp_expr(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind != b->kind)
    return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
  auto cmp_d = [](double x, double y) { return x < y ? -1 : (x > y ? 1 : 0); };
  switch (a->kind) {
    case NodeKind::Const:
      if (int c = cmp_d(a->value.real(), b->value.real())) return c;
      return cmp_d(a->value.imag(), b->value.imag());
    case NodeKind::Param:
      return a->name.compare(b->name);
    case NodeKind::Time:
      return 0;
    case NodeKind::Coord:
    case NodeKind::Mom:
      return a->index - b->index;
    case NodeKind::CoordOrder:
      return cmp_d(a->order, b->order);
    default:
      break;
  }
  if (a->kind == NodeKind::Pow && a->exponent != b->exponent)
    return a->exponent < b->exponent ? -1 : 1;
  if (a->kind == NodeKind::RDeriv)
    if (int c = cmp_d(a->order, b->order)) return c;
  if (a->lhs && b->lhs)
    if (int c = cmp_expr(a->lhs, b->lhs)) return c;
  if (a->rhs && b->rhs)
    if (int c = cmp_expr(a->rhs, b->rhs)) return c;
  return 0;
}

}  // namespace

bool ast_equal(const ExprPtr& a, const ExprPtr& b) {
  return cmp_expr(a, b) == 0;
}

bool contains_kind(const ExprPtr& e, NodeKind k) {
  if (e->kind == k) return true;
  if (e->lhs && contains_kind(e->lhs, k)) return true;
  if (e->rhs && contains_kind(e->rhs, k)) return true;
  return false;
}

bool contains_coord(const ExprPtr& e, int index) {
  if (e->kind == NodeKind::Coord && e->index == index) return true;
  if (e->lhs && contains_coord(e->lhs, index)) return true;
  if (e->rhs && contains_coord(e->rhs, index)) return true;
  return false;
}

ExprPtr subst_coord(const ExprPtr& e, int index, const ExprPtr& replacement) {
  if (e->kind == NodeKind::Coord)
    return e->index == index ? replacement : e;
  if (!e->lhs) return e;
  Expr copy = *e;
  copy.lhs = subst_coord(e->lhs, index, replacement);
  if (e->rhs) copy.rhs = subst_coord(e->rhs, index, replacement);
  return node(std::move(copy));
}

// ---------------------------------------------------------------------------
// Evaluation

Complex eval(const ExprPtr& e, const EvalContext& ctx) {
  switch (e->kind) {
    case NodeKind::Const:
      return e->value;
    case NodeKind::Param: {
      auto it = ctx.params.find(e->name);
      if (it == ctx.params.end())
        throw std::runtime_error("eval: unbound parameter '" + e->name + "'");
      return it->second;
    }
    case NodeKind::Time:
      return ctx.t;
    case NodeKind::Coord: {
      auto it = ctx.coords.find(e->index);
      if (it == ctx.coords.end())
        throw std::runtime_error("eval: unbound coordinate q" +
                                 std::to_string(e->index));
      return it->second;
    }
    case NodeKind::Mom: {
      auto it = ctx.moms.find(e->index);
      if (it == ctx.moms.end())
        throw std::runtime_error("eval: unbound momentum p" +
                                 std::to_string(e->index));
      return it->second;
    }
    case NodeKind::CoordOrder: {
      // tolerant key lookup: orders come from independent arithmetic paths
      auto it = ctx.by_order.lower_bound(e->order - 1e-9);
      if (it == ctx.by_order.end() || std::abs(it->first - e->order) > 1e-9)
        throw std::runtime_error("eval: unbound derived coordinate x[" +
                                 fmt_double(e->order) + "]");
      return it->second;
    }
    case NodeKind::Neg:
      return -eval(e->lhs, ctx);
    case NodeKind::Sin:
      return std::sin(eval(e->lhs, ctx));
    case NodeKind::Cos:
      return std::cos(eval(e->lhs, ctx));
    case NodeKind::Exp:
      return std::exp(eval(e->lhs, ctx));
    case NodeKind::Add:
      return eval(e->lhs, ctx) + eval(e->rhs, ctx);
    case NodeKind::Sub:
      return eval(e->lhs, ctx) - eval(e->rhs, ctx);
    case NodeKind::Mul:
      return eval(e->lhs, ctx) * eval(e->rhs, ctx);
    case NodeKind::Div: {
      Complex d = eval(e->rhs, ctx);
      if (d == Complex(0.0)) throw std::runtime_error("eval: division by zero");
      return eval(e->lhs, ctx) / d;
    }
    case NodeKind::Pow: {
      Complex base = eval(e->lhs, ctx);
      Complex acc(1.0);
      for (int k = 0; k < e->exponent; ++k) acc *= base;
      return acc;
    }
    case NodeKind::RDeriv:
      throw std::runtime_error(
          "eval: unresolved derivative node; resolve against a trajectory "
          "first");
  }
  throw std::logic_error("eval: unreachable");
}

// ---------------------------------------------------------------------------
// Constant folding / canonicalization
//
// Expressions are expanded into sums of monomials over opaque atom factors
// (parameters, coordinates, momenta, function applications, non-monomial
// denominators). Like terms are merged and the result is rebuilt in a fixed
// order, so equal expressions fold to identical trees.

namespace {

struct Factor {
  ExprPtr base;
  int exp;
};

struct Term {
  Complex coeff{1.0, 0.0};
  std::vector<Factor> factors;
};

using Poly = std::vector<Term>;

int cmp_factor(const Factor& a, const Factor& b) {
  if (int c = cmp_expr(a.base, b.base)) return c;
  return a.exp - b.exp;
}

int cmp_term_key(const Term& a, const Term& b) {
  std::size_t n = std::min(a.factors.size(), b.factors.size());
  for (std::size_t i = 0; i < n; ++i)
    if (int c = cmp_factor(a.factors[i], b.factors[i])) return c;
  if (a.factors.size() != b.factors.size())
    return a.factors.size() < b.factors.size() ? -1 : 1;
  return 0;
}

void normalize_term(Term& t) {
  std::sort(t.factors.begin(), t.factors.end(),
            [](const Factor& a, const Factor& b) { return cmp_factor(a, b) < 0; });
  std::vector<Factor> merged;
  for (const Factor& f : t.factors) {
    if (!merged.empty() && cmp_expr(merged.back().base, f.base) == 0)
      merged.back().exp += f.exp;
    else
      merged.push_back(f);
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Factor& f) { return f.exp == 0; }),
               merged.end());
  t.factors = std::move(merged);
}

Poly combine(Poly p) {
  for (Term& t : p) normalize_term(t);
  std::stable_sort(p.begin(), p.end(), [](const Term& a, const Term& b) {
    return cmp_term_key(a, b) < 0;
  });
  Poly out;
  for (Term& t : p) {
    if (!out.empty() && cmp_term_key(out.back(), t) == 0)
      out.back().coeff += t.coeff;
    else
      out.push_back(std::move(t));
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Term& t) { return t.coeff == Complex(0.0); }),
            out.end());
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out;
  out.reserve(a.size() * b.size());
  for (const Term& ta : a)
    for (const Term& tb : b) {
      Term t;
      t.coeff = ta.coeff * tb.coeff;
      t.factors = ta.factors;
      t.factors.insert(t.factors.end(), tb.factors.begin(), tb.factors.end());
      out.push_back(std::move(t));
    }
  return combine(std::move(out));
}

ExprPtr rebuild(const Poly& p);

Poly normalize(const ExprPtr& e);

Poly atom_poly(ExprPtr base) {
  Term t;
  t.factors.push_back(Factor{std::move(base), 1});
  return {std::move(t)};
}

Poly const_poly(Complex v) {
  if (v == Complex(0.0)) return {};
  Term t;
  t.coeff = v;
  return {std::move(t)};
}

Poly normalize(const ExprPtr& e) {
  switch (e->kind) {
    case NodeKind::Const:
      return const_poly(e->value);
    case NodeKind::Param:
    case NodeKind::Time:
    case NodeKind::Coord:
    case NodeKind::CoordOrder:
    case NodeKind::Mom:
      return atom_poly(e);
    case NodeKind::Neg: {
      Poly p = normalize(e->lhs);
      for (Term& t : p) t.coeff = -t.coeff;
      return p;
    }
    case NodeKind::Add:
    case NodeKind::Sub: {
      Poly p = normalize(e->lhs);
      Poly q = normalize(e->rhs);
      if (e->kind == NodeKind::Sub)
        for (Term& t : q) t.coeff = -t.coeff;
      p.insert(p.end(), q.begin(), q.end());
      return combine(std::move(p));
    }
    case NodeKind::Mul:
      return poly_mul(normalize(e->lhs), normalize(e->rhs));
    case NodeKind::Div: {
      Poly num = normalize(e->lhs);
      Poly den = normalize(e->rhs);
      if (den.empty()) throw std::runtime_error("fold: division by zero");
      if (den.size() == 1) {
        const Term& d = den.front();
        for (Term& t : num) {
          t.coeff /= d.coeff;
          for (const Factor& f : d.factors)
            t.factors.push_back(Factor{f.base, -f.exp});
        }
        return combine(std::move(num));
      }
      // non-monomial denominator stays opaque
      Poly inv = atom_poly(rebuild(den));
      inv.front().factors.front().exp = -1;
      return poly_mul(num, inv);
    }
    case NodeKind::Pow: {
      if (e->exponent == 0) return const_poly(Complex(1.0));
      Poly base = normalize(e->lhs);
      Poly acc = base;
      for (int k = 1; k < e->exponent; ++k) acc = poly_mul(acc, base);
      return acc;
    }
    case NodeKind::Sin:
    case NodeKind::Cos:
    case NodeKind::Exp: {
      ExprPtr arg = rebuild(normalize(e->lhs));
      if (arg->kind == NodeKind::Const) {
        Complex v = arg->value;
        Complex r = e->kind == NodeKind::Sin   ? std::sin(v)
                    : e->kind == NodeKind::Cos ? std::cos(v)
                                               : std::exp(v);
        return const_poly(r);
      }
      return atom_poly(make_unary(e->kind, arg));
    }
    case NodeKind::RDeriv: {
      // linearity: pull coefficients and time-independent factors through
      // the derivative
      auto time_dependent = [](const ExprPtr& f) {
        return contains_kind(f, NodeKind::Time) ||
               contains_kind(f, NodeKind::Coord) ||
               contains_kind(f, NodeKind::CoordOrder) ||
               contains_kind(f, NodeKind::Mom) ||
               contains_kind(f, NodeKind::RDeriv);
      };
      Poly child = normalize(e->lhs);
      Poly out;
      for (const Term& t : child) {
        Term kept;
        kept.coeff = t.coeff;
        Term mono;
        for (const Factor& f : t.factors)
          (time_dependent(f.base) ? mono : kept).factors.push_back(f);
        if (mono.factors.empty()) {
          // derivative of a constant: zero for integer orders, kept
          // unevaluated otherwise
          if (e->order == std::floor(e->order)) {
            if (e->order == 0.0) out.push_back(std::move(kept));
            continue;
          }
          kept.factors.push_back(
              Factor{make_rderiv(e->order, make_const(Complex(1.0))), 1});
          out.push_back(std::move(kept));
          continue;
        }
        kept.factors.push_back(
            Factor{make_rderiv(e->order, rebuild({mono})), 1});
        out.push_back(std::move(kept));
      }
      return combine(std::move(out));
    }
  }
  throw std::logic_error("normalize: unreachable");
}

ExprPtr rebuild_product(Complex coeff, const std::vector<Factor>& factors,
                        bool include_coeff) {
  std::vector<ExprPtr> num, den;
  bool negate = false;
  if (include_coeff && coeff == Complex(-1.0) && !factors.empty())
    negate = true;
  else if (include_coeff && coeff != Complex(1.0))
    num.push_back(make_const(coeff));
  for (const Factor& f : factors) {
    ExprPtr piece = std::abs(f.exp) == 1 ? f.base : make_pow(f.base, std::abs(f.exp));
    (f.exp > 0 ? num : den).push_back(piece);
  }
  auto chain = [](const std::vector<ExprPtr>& v) -> ExprPtr {
    if (v.empty()) return make_const(Complex(1.0));
    ExprPtr acc = v.front();
    for (std::size_t i = 1; i < v.size(); ++i)
      acc = make_binary(NodeKind::Mul, acc, v[i]);
    return acc;
  };
  if (negate) {
    if (num.empty())
      num.push_back(make_const(Complex(-1.0)));
    else
      num.front() = make_unary(NodeKind::Neg, num.front());
  }
  ExprPtr numerator = chain(num);
  if (den.empty()) return numerator;
  return make_binary(NodeKind::Div, numerator, chain(den));
}

bool coeff_prints_negative(Complex c) {
  return (c.real() < 0.0) || (c.real() == 0.0 && c.imag() < 0.0);
}

ExprPtr rebuild(const Poly& p) {
  if (p.empty()) return make_const(Complex(0.0));
  ExprPtr acc;
  for (const Term& t : p) {
    if (!acc) {
      acc = rebuild_product(t.coeff, t.factors, true);
      continue;
    }
    if (coeff_prints_negative(t.coeff)) {
      Complex neg = -t.coeff;
      ExprPtr piece = rebuild_product(neg, t.factors, true);
      acc = make_binary(NodeKind::Sub, acc, piece);
    } else {
      acc = make_binary(NodeKind::Add, acc, rebuild_product(t.coeff, t.factors, true));
    }
  }
  return acc;
}

}  // namespace

ExprPtr fold(const ExprPtr& e) { return rebuild(normalize(e)); }

// ---------------------------------------------------------------------------
// Symbolic differentiation

namespace {

ExprPtr d_rec(const ExprPtr& e, NodeKind var_kind, int index) {
  auto zero = [] { return make_const(Complex(0.0)); };
  switch (e->kind) {
    case NodeKind::Const:
    case NodeKind::Param:
    case NodeKind::Time:
    case NodeKind::CoordOrder:
      return zero();
    case NodeKind::Coord:
      return (var_kind == NodeKind::Coord && e->index == index)
                 ? make_const(Complex(1.0))
                 : zero();
    case NodeKind::Mom:
      return (var_kind == NodeKind::Mom && e->index == index)
                 ? make_const(Complex(1.0))
                 : zero();
    case NodeKind::Neg:
      return make_unary(NodeKind::Neg, d_rec(e->lhs, var_kind, index));
    case NodeKind::Sin:
      return make_binary(NodeKind::Mul, make_unary(NodeKind::Cos, e->lhs),
                         d_rec(e->lhs, var_kind, index));
    case NodeKind::Cos:
      return make_unary(
          NodeKind::Neg,
          make_binary(NodeKind::Mul, make_unary(NodeKind::Sin, e->lhs),
                      d_rec(e->lhs, var_kind, index)));
    case NodeKind::Exp:
      return make_binary(NodeKind::Mul, e, d_rec(e->lhs, var_kind, index));
    case NodeKind::Add:
      return make_binary(NodeKind::Add, d_rec(e->lhs, var_kind, index),
                         d_rec(e->rhs, var_kind, index));
    case NodeKind::Sub:
      return make_binary(NodeKind::Sub, d_rec(e->lhs, var_kind, index),
                         d_rec(e->rhs, var_kind, index));
    case NodeKind::Mul:
      return make_binary(
          NodeKind::Add,
          make_binary(NodeKind::Mul, d_rec(e->lhs, var_kind, index), e->rhs),
          make_binary(NodeKind::Mul, e->lhs, d_rec(e->rhs, var_kind, index)));
    case NodeKind::Div:
      return make_binary(
          NodeKind::Div,
          make_binary(
              NodeKind::Sub,
              make_binary(NodeKind::Mul, d_rec(e->lhs, var_kind, index), e->rhs),
              make_binary(NodeKind::Mul, e->lhs, d_rec(e->rhs, var_kind, index))),
          make_pow(e->rhs, 2));
    case NodeKind::Pow: {
      if (e->exponent == 0) return zero();
      ExprPtr inner = d_rec(e->lhs, var_kind, index);
      ExprPtr coeff = make_const(Complex(static_cast<double>(e->exponent)));
      ExprPtr reduced = make_pow(e->lhs, e->exponent - 1);
      return make_binary(NodeKind::Mul,
                         make_binary(NodeKind::Mul, coeff, reduced), inner);
    }
    case NodeKind::RDeriv:
      return make_rderiv(e->order, d_rec(e->lhs, var_kind, index));
  }
  throw std::logic_error("d_rec: unreachable");
}

}  // namespace

ExprPtr partial(const ExprPtr& e, int index) {
  return fold(d_rec(e, NodeKind::Coord, index));
}

ExprPtr partial_mom(const ExprPtr& e, int index) {
  return fold(d_rec(e, NodeKind::Mom, index));
}

}  // namespace fracvar

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fracvar/fracops.hpp"

namespace fracvar {

enum class NodeKind {
  Const,       // complex literal
  Param,       // named parameter (m, g, w, eps, k, ...)
  Time,        // t
  Coord,       // ladder coordinate q<index>
  CoordOrder,  // derived coordinate x[nu] of arbitrary total order nu
  Mom,         // canonical momentum p<index>
  Neg,
  Sin,
  Cos,
  Exp,
  Add,
  Sub,
  Mul,
  Div,
  Pow,     // integer exponent >= 0 in `exponent`
  RDeriv,  // right RL derivative of order `order` applied to the child
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  NodeKind kind;
  Complex value{};        // Const
  std::string name;       // Param
  int index = 0;          // Coord / Mom
  int exponent = 0;       // Pow
  double order = 0.0;     // CoordOrder / RDeriv
  ExprPtr lhs, rhs;       // children (unary ops use lhs only)
};

ExprPtr make_const(Complex v);
ExprPtr make_param(std::string name);
ExprPtr make_time();
ExprPtr make_coord(int index);
ExprPtr make_coord_order(double order);
ExprPtr make_mom(int index);
ExprPtr make_unary(NodeKind k, ExprPtr child);
ExprPtr make_binary(NodeKind k, ExprPtr lhs, ExprPtr rhs);
ExprPtr make_pow(ExprPtr base, int exponent);
ExprPtr make_rderiv(double order, ExprPtr child);

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& what, std::size_t pos)
      : std::runtime_error(what), position(pos) {}
};

struct ParseOptions {
  int max_coord_index = -1;  // -1: unchecked
  int half_index = -1;       // ladder slot that `q_half`/`p_half` refer to
};

/// Recursive-descent parser for the Lagrangian grammar (see docs/grammar.md).
/// Precedence: ^  >  unary -  >  * /  >  + -.
ExprPtr parse(const std::string& text, const ParseOptions& opts = {});

/// Deterministic printer; parse(print(e)) reproduces the tree.
std::string print(const ExprPtr& e);

/// Exact symbolic partial derivative with respect to q<index>, followed by
/// constant folding.
ExprPtr partial(const ExprPtr& e, int index);

ExprPtr partial_mom(const ExprPtr& e, int index);

/// Flattens +/* chains, folds numeric constants, drops zero/one factors and
/// sorts commutative operands into a canonical order.
ExprPtr fold(const ExprPtr& e);

bool ast_equal(const ExprPtr& a, const ExprPtr& b);

bool contains_kind(const ExprPtr& e, NodeKind k);
bool contains_coord(const ExprPtr& e, int index);

/// Substitute every occurrence of q<index> by the replacement expression.
ExprPtr subst_coord(const ExprPtr& e, int index, const ExprPtr& replacement);

struct EvalContext {
  std::map<std::string, Complex> params;
  Complex t{};
  std::map<int, Complex> coords;        // q<index>
  std::map<int, Complex> moms;          // p<index>
  std::map<double, Complex> by_order;   // x[nu]
};

Complex eval(const ExprPtr& e, const EvalContext& ctx);

}  // namespace fracvar

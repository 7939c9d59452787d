#include "fracvar/variational.hpp"

#include <cmath>
#include <stdexcept>

namespace fracvar {

namespace {

constexpr double kOrderTol = 1e-9;

bool near_integer(double x) { return std::abs(x - std::round(x)) < kOrderTol; }

/// Slot index whose ladder order matches nu, or -1.
int ladder_slot(const LagrangianSpec& lag, double nu) {
  for (std::size_t l = 0; l < lag.ladder.size(); ++l)
    if (std::abs(lag.ladder[l] - nu) < kOrderTol) return static_cast<int>(l);
  return -1;
}

}  // namespace

Complex composition_phase(double nu, CompositionConvention conv) {
  if (conv == CompositionConvention::NumericRight)
    throw std::logic_error("composition_phase: no phase in numeric mode");
  double s = (conv == CompositionConvention::RiewePhase) ? 1.0 : -1.0;
  // exact values at integer and half-integer orders
  if (near_integer(nu)) {
    long m = std::lround(nu);
    return (m % 2 == 0) ? Complex(1.0) : Complex(-1.0);
  }
  if (near_integer(2.0 * nu)) {
    long m = std::lround(nu - 0.5);  // nu = m + 1/2
    Complex ih(0.0, s);
    return (m % 2 == 0) ? ih : -ih;
  }
  return std::exp(Complex(0.0, s * M_PI * nu));
}

CoordinateStack coordinate_stack(const LagrangianSpec& lag,
                                 const SampledPath& x) {
  CoordinateStack stack{x, {}};
  stack.derived.reserve(lag.ladder.size());
  for (double nu : lag.ladder)
    stack.derived.push_back(left_rl_deriv(x, FracOrder::from_total(nu)));
  return stack;
}

ExprPtr resolve_rderiv(const ExprPtr& e, const LagrangianSpec& lag,
                       CompositionConvention conv) {
  auto walk = [&](auto&& self, const ExprPtr& node) -> ExprPtr {
    if (!node->lhs && !node->rhs) {
      if (node->kind == NodeKind::CoordOrder) {
        int slot = ladder_slot(lag, node->order);
        return slot >= 0 ? make_coord(slot) : node;
      }
      return node;
    }
    if (node->kind == NodeKind::RDeriv) {
      double nu = node->order;
      if (std::abs(nu) < kOrderTol) return self(self, node->lhs);
      if (conv == CompositionConvention::NumericRight) {
        ExprPtr inner = self(self, node->lhs);
        return inner == node->lhs ? node : make_rderiv(nu, inner);
      }
      ExprPtr inner = self(self, node->lhs);
      double base;
      if (inner->kind == NodeKind::Coord)
        base = lag.ladder.at(static_cast<std::size_t>(inner->index));
      else if (inner->kind == NodeKind::CoordOrder)
        base = inner->order;
      else
        throw std::runtime_error(
            "resolve_rderiv: phase composition needs a bare coordinate under "
            "D[" + std::to_string(nu) + "]; fold the expression first");
      double total = base + nu;
      int slot = ladder_slot(lag, total);
      ExprPtr coord = slot >= 0 ? make_coord(slot) : make_coord_order(total);
      Complex phase = composition_phase(nu, conv);
      if (phase == Complex(1.0)) return coord;
      if (phase == Complex(-1.0)) return make_unary(NodeKind::Neg, coord);
      return make_binary(NodeKind::Mul, make_const(phase), coord);
    }
    ExprPtr l = node->lhs ? self(self, node->lhs) : nullptr;
    ExprPtr r = node->rhs ? self(self, node->rhs) : nullptr;
    if (l == node->lhs && r == node->rhs) return node;
    auto copy = std::make_shared<Expr>(*node);
    copy->lhs = l;
    copy->rhs = r;
    return copy;
  };
  return fold(walk(walk, e));
}

std::vector<ExprPtr> symbolic_momenta(const LagrangianSpec& lag,
                                      CompositionConvention conv) {
  lag.validate();
  int top = lag.top_index();
  std::vector<ExprPtr> out;
  out.reserve(static_cast<std::size_t>(top));
  for (int l = 0; l < top; ++l) {
    ExprPtr sum;
    for (int m = l; m < top; ++m) {
      double nu = lag.ladder[static_cast<std::size_t>(m)] -
                  lag.ladder[static_cast<std::size_t>(l)];
      ExprPtr dL = partial(lag.expr, m + 1);
      ExprPtr term = std::abs(nu) < kOrderTol ? dL : make_rderiv(nu, dL);
      sum = sum ? make_binary(NodeKind::Add, sum, term) : term;
    }
    out.push_back(resolve_rderiv(fold(sum), lag, conv));
  }
  return out;
}

ExprPtr symbolic_el(const LagrangianSpec& lag, CompositionConvention conv) {
  lag.validate();
  ExprPtr sum;
  for (int l = 0; l <= lag.top_index(); ++l) {
    double nu = lag.ladder[static_cast<std::size_t>(l)];
    ExprPtr dL = partial(lag.expr, l);
    ExprPtr term = std::abs(nu) < kOrderTol ? dL : make_rderiv(nu, dL);
    sum = sum ? make_binary(NodeKind::Add, sum, term) : term;
  }
  return resolve_rderiv(fold(sum), lag, conv);
}

namespace {

/// Writes dL/dq_top = hess * q_top + rest with hess, rest free of q_top;
/// throws when the dependence is not affine or hess degenerates.
void split_top_derivative(const LagrangianSpec& lag, ExprPtr& hess,
                          ExprPtr& rest) {
  int top = lag.top_index();
  ExprPtr dtop = partial(lag.expr, top);
  hess = partial(dtop, top);
  if (contains_coord(hess, top) || contains_kind(hess, NodeKind::Coord) ||
      contains_kind(hess, NodeKind::CoordOrder))
    throw SingularLegendreError(
        "reduced_hamiltonian: Lagrangian is not quadratic in the top "
        "coordinate");
  ExprPtr folded = fold(hess);
  if (folded->kind == NodeKind::Const && folded->value == Complex(0.0))
    throw SingularLegendreError(
        "reduced_hamiltonian: degenerate Legendre transform, "
        "d2L/dq_top^2 vanishes identically");
  rest = fold(subst_coord(dtop, top, make_const(Complex(0.0))));
  // consistency: dtop must equal hess*q_top + rest
  ExprPtr recon = fold(make_binary(
      NodeKind::Sub, dtop,
      make_binary(NodeKind::Add, make_binary(NodeKind::Mul, hess, make_coord(top)),
                  rest)));
  if (!(recon->kind == NodeKind::Const && recon->value == Complex(0.0)))
    throw SingularLegendreError(
        "reduced_hamiltonian: top-coordinate dependence is not affine");
}

}  // namespace

ExprPtr symbolic_hamiltonian(const LagrangianSpec& lag,
                             CompositionConvention conv) {
  lag.validate();
  int top = lag.top_index();
  ExprPtr hess, rest;
  split_top_derivative(lag, hess, rest);

  // q_top = (p_{top-1} - rest) / hess
  ExprPtr qtop = fold(make_binary(
      NodeKind::Div, make_binary(NodeKind::Sub, make_mom(top - 1), rest),
      hess));

  ExprPtr h;
  for (int m = 0; m < top; ++m) {
    ExprPtr term =
        make_binary(NodeKind::Mul, make_mom(m), make_coord(m + 1));
    h = h ? make_binary(NodeKind::Add, h, term) : term;
  }
  h = make_binary(NodeKind::Sub, h, lag.expr);
  h = subst_coord(h, top, qtop);
  (void)conv;  // the reduced H is convention-free; momenta carry the phases
  return fold(h);
}

SampledPath sample_expr(const ExprPtr& e, const LagrangianSpec& lag,
                        const CoordinateStack& stack,
                        const std::map<int, SampledPath>* moms) {
  const UniformGrid& g = stack.base.grid;
  std::size_t n = g.n;
  // cache for off-ladder x[nu] requests keyed by rounded order
  std::map<long long, SampledPath> order_cache;
  auto order_path = [&](double nu) -> const SampledPath& {
    int slot = ladder_slot(lag, nu);
    if (slot >= 0) return stack.derived[static_cast<std::size_t>(slot)];
    long long key = std::llround(nu * 1e9);
    auto it = order_cache.find(key);
    if (it == order_cache.end())
      it = order_cache
               .emplace(key, left_rl_deriv(stack.base,
                                           FracOrder::from_total(nu)))
               .first;
    return it->second;
  };

  auto walk = [&](auto&& self, const ExprPtr& node) -> SampledPath {
    auto constant = [&](Complex v) {
      SampledPath p = SampledPath::zeros(g);
      for (auto& s : p.values) s = v;
      return p;
    };
    switch (node->kind) {
      case NodeKind::Const:
        return constant(node->value);
      case NodeKind::Param: {
        auto it = lag.params.find(node->name);
        if (it == lag.params.end())
          throw std::runtime_error("sample_expr: unbound parameter '" +
                                   node->name + "'");
        return constant(it->second);
      }
      case NodeKind::Time: {
        SampledPath p = SampledPath::zeros(g);
        for (std::size_t i = 0; i < n; ++i) p.values[i] = Complex(g.t(i));
        return p;
      }
      case NodeKind::Coord:
        return stack.derived.at(static_cast<std::size_t>(node->index));
      case NodeKind::CoordOrder:
        return order_path(node->order);
      case NodeKind::Mom: {
        if (!moms || !moms->count(node->index))
          throw std::runtime_error("sample_expr: unbound momentum p" +
                                   std::to_string(node->index));
        return moms->at(node->index);
      }
      case NodeKind::RDeriv: {
        SampledPath inner = self(self, node->lhs);
        return right_rl_deriv(inner, FracOrder::from_total(node->order));
      }
      default:
        break;
    }
    SampledPath l = node->lhs ? self(self, node->lhs) : SampledPath::zeros(g);
    switch (node->kind) {
      case NodeKind::Neg:
        for (auto& s : l.values) s = -s;
        return l;
      case NodeKind::Sin:
        for (auto& s : l.values) s = std::sin(s);
        return l;
      case NodeKind::Cos:
        for (auto& s : l.values) s = std::cos(s);
        return l;
      case NodeKind::Exp:
        for (auto& s : l.values) s = std::exp(s);
        return l;
      case NodeKind::Pow:
        for (auto& s : l.values) s = std::pow(s, node->exponent);
        return l;
      default:
        break;
    }
    SampledPath r = self(self, node->rhs);
    l.low_accuracy_left = std::max(l.low_accuracy_left, r.low_accuracy_left);
    l.low_accuracy_right = std::max(l.low_accuracy_right, r.low_accuracy_right);
    switch (node->kind) {
      case NodeKind::Add:
        for (std::size_t i = 0; i < n; ++i) l.values[i] += r.values[i];
        return l;
      case NodeKind::Sub:
        for (std::size_t i = 0; i < n; ++i) l.values[i] -= r.values[i];
        return l;
      case NodeKind::Mul:
        for (std::size_t i = 0; i < n; ++i) l.values[i] *= r.values[i];
        return l;
      case NodeKind::Div:
        for (std::size_t i = 0; i < n; ++i) {
          if (r.values[i] == Complex(0.0))
            throw std::runtime_error("sample_expr: division by zero");
          l.values[i] /= r.values[i];
        }
        return l;
      default:
        throw std::logic_error("sample_expr: unhandled node kind");
    }
  };
  return walk(walk, e);
}

MomentumSet momenta(const LagrangianSpec& lag, const SampledPath& x,
                    CompositionConvention conv) {
  MomentumSet out;
  out.symbolic = symbolic_momenta(lag, conv);
  CoordinateStack stack = coordinate_stack(lag, x);
  out.sampled.reserve(out.symbolic.size());
  for (const auto& p : out.symbolic)
    out.sampled.push_back(sample_expr(p, lag, stack));
  return out;
}

HamiltonianSpec reduced_hamiltonian(const LagrangianSpec& lag,
                                    const SampledPath& x,
                                    CompositionConvention conv) {
  HamiltonianSpec out{symbolic_hamiltonian(lag, conv),
                      SampledPath::zeros(x.grid)};
  MomentumSet ps = momenta(lag, x, conv);
  CoordinateStack stack = coordinate_stack(lag, x);
  std::map<int, SampledPath> moms;
  for (std::size_t l = 0; l < ps.sampled.size(); ++l)
    moms.emplace(static_cast<int>(l), ps.sampled[l]);
  out.sampled = sample_expr(out.symbolic, lag, stack, &moms);
  return out;
}

SampledPath euler_lagrange_residual(const LagrangianSpec& lag,
                                    const SampledPath& x,
                                    CompositionConvention conv) {
  ExprPtr el = symbolic_el(lag, conv);
  CoordinateStack stack = coordinate_stack(lag, x);
  return sample_expr(el, lag, stack);
}

}  // namespace fracvar

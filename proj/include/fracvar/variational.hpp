#pragma once

#include <map>
#include <vector>

#include "fracvar/lagrangian.hpp"

namespace fracvar {

/// How right-derivative factors arising in the momentum chain and the
/// Euler-Lagrange sum are composed with the left-derivative coordinates.
enum class CompositionConvention {
  /// D_b^nu -> e^{+i pi nu} D_a^nu, fused into a single total-order operator.
  /// Reproduces (-d/dt)^l at integer orders and the damped equation of
  /// motion m x'' + g x' + V' = 0 at half orders.
  RiewePhase,
  /// Same with e^{-i pi nu}; flips the sign of the damping term.
  ConjugatePhase,
  /// Keep D_b^nu as an operator and apply the right GL sum numerically to
  /// the sampled inner expression.
  NumericRight,
};

Complex composition_phase(double nu, CompositionConvention conv);

/// The sampled coordinates q_l = D^{ladder[l]} x along one trajectory.
struct CoordinateStack {
  SampledPath base;
  std::vector<SampledPath> derived;  // one per ladder slot
};

struct MomentumSet {
  std::vector<ExprPtr> symbolic;     // p_0 .. p_{n-1}
  std::vector<SampledPath> sampled;
};

struct HamiltonianSpec {
  ExprPtr symbolic;  // in q_0..q_{n-1}, p_0..p_{n-1}
  SampledPath sampled;
};

struct SingularLegendreError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CoordinateStack coordinate_stack(const LagrangianSpec& lag,
                                 const SampledPath& x);

/// Resolve D[nu] nodes against the ladder under the given convention; maps
/// on-ladder coordinate orders back to their q-slots.
ExprPtr resolve_rderiv(const ExprPtr& e, const LagrangianSpec& lag,
                       CompositionConvention conv);

/// Momentum chain p_l = sum_{m=l}^{n-1} D_b^{ladder[m]-ladder[l]}
/// (dL/dq_{m+1}), truncated at the Lagrangian's top order.
std::vector<ExprPtr> symbolic_momenta(
    const LagrangianSpec& lag,
    CompositionConvention conv = CompositionConvention::RiewePhase);

/// Reduced Hamiltonian H = sum_m p_m q_{m+1} - L with the top coordinate
/// eliminated through the highest momentum relation.
ExprPtr symbolic_hamiltonian(
    const LagrangianSpec& lag,
    CompositionConvention conv = CompositionConvention::RiewePhase);

/// Euler-Lagrange expression sum_l D_b^{ladder[l]} (dL/dq_l).
ExprPtr symbolic_el(
    const LagrangianSpec& lag,
    CompositionConvention conv = CompositionConvention::RiewePhase);

/// Evaluate an expression pointwise along a trajectory. Momentum variables
/// are looked up in `moms`; D[nu] nodes are applied with the right GL
/// operator; x[nu] coordinates are derived from the base path on demand.
SampledPath sample_expr(const ExprPtr& e, const LagrangianSpec& lag,
                        const CoordinateStack& stack,
                        const std::map<int, SampledPath>* moms = nullptr);

MomentumSet momenta(
    const LagrangianSpec& lag, const SampledPath& x,
    CompositionConvention conv = CompositionConvention::RiewePhase);

HamiltonianSpec reduced_hamiltonian(
    const LagrangianSpec& lag, const SampledPath& x,
    CompositionConvention conv = CompositionConvention::RiewePhase);

SampledPath euler_lagrange_residual(
    const LagrangianSpec& lag, const SampledPath& x,
    CompositionConvention conv = CompositionConvention::RiewePhase);

}  // namespace fracvar

#pragma once

#include <map>
#include <string>
#include <vector>

#include "fracvar/expr.hpp"

namespace fracvar {

/// A Lagrangian L(t, q_0, ..., q_n) over an explicit ladder of derivative
/// orders. The ladder need not be uniform ({0, 1/2, 1} is valid).
struct LagrangianSpec {
  double alpha = 1.0;            // base order in (0, 1]
  std::vector<double> ladder;    // strictly increasing, ladder[l] = order of q_l
  ExprPtr expr;
  std::map<std::string, Complex> params;

  int top_index() const { return static_cast<int>(ladder.size()) - 1; }
  double top_order() const { return ladder.back(); }

  /// index of the order-1/2 slot, or -1
  int half_index() const;

  void validate() const;
};

LagrangianSpec make_lagrangian(const std::string& text,
                               std::vector<double> ladder, double alpha,
                               std::map<std::string, Complex> params);

/// Oscillator with an acceleration-squared part, on the ladder {0, a, 2a}:
///   L = (1/2)(1+eps^2 w^2) q1^2 - (1/2) w^2 q0^2 - (1/2) eps^2 q2^2.
LagrangianSpec make_pu(double alpha = 1.0, double eps = 0.1, double w = 1.0);

/// Damped oscillator on the ladder {0, 1/2, 1}:
///   L = (1/2) m q2^2 + i (g/2) q1^2 - (1/2) k q0^2, with q1 the half-order
/// coordinate.
LagrangianSpec make_damped(double m = 1.0, double g = 0.4, double k = 1.0);

/// Simple harmonic oscillator on the ladder {0, a}:
///   L = (1/2) m q1^2 - (1/2) k q0^2.
LagrangianSpec make_sho(double alpha = 1.0, double m = 1.0, double k = 1.0);

}  // namespace fracvar

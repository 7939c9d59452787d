#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fracvar/variational.hpp"

namespace fracvar {

/// Endpoint data for the stationary problem. Each entry (l, v) pins the
/// ladder coordinate q_l at the interval end to the value v. Conditions are
/// applied to boundary samples through one-sided stencils, so each side
/// must supply ceil(top order) conditions with ladder slots of integer
/// order 0, 1, ... in some order.
struct BoundaryData {
  std::vector<std::pair<int, Complex>> left;
  std::vector<std::pair<int, Complex>> right;
};

struct BoundaryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularSystemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Discretized action restricted to the free samples:
///   S(x) = 1/2 x^T A x + b^T x + c,  A symmetric.
struct QuadraticForm {
  Eigen::MatrixXcd A;
  Eigen::VectorXcd b;
  Complex c{};
  UniformGrid grid{0.0, 1.0, 2};
  std::vector<std::size_t> unknown_indices;          // grid index per row of A
  std::vector<std::pair<std::size_t, Complex>> fixed;  // pinned samples
  std::map<std::string, double> metadata;

  Complex value(const Eigen::VectorXcd& x) const;
};

/// Coefficients of a quadratic Lagrangian: L = 1/2 q^T H q + g^T q + c0.
struct QuadraticCoefficients {
  Eigen::MatrixXcd hessian;
  Eigen::VectorXcd linear;
  Complex constant{};
};

/// Extracts H, g, c0; throws std::invalid_argument when L is not quadratic
/// in the coordinates or depends explicitly on t.
QuadraticCoefficients quadratic_coefficients(const LagrangianSpec& lag);

/// Resolves boundary conditions into pinned sample values (indices 0..
/// near each end) via one-sided stencils.
std::vector<std::pair<std::size_t, Complex>> pin_boundary_samples(
    const LagrangianSpec& lag, const UniformGrid& grid,
    const BoundaryData& bc);

/// Assembles S(x) = dt * sum_i L(stack(x)_i) over the grid, with boundary
/// samples eliminated.
QuadraticForm assemble_action(const LagrangianSpec& lag,
                              const UniformGrid& grid,
                              const BoundaryData& bc);

/// Same assembly with explicitly supplied coefficients (used for the
/// Euclidean continuation, which rescales H and g).
QuadraticForm assemble_quadratic(const LagrangianSpec& lag,
                                 const UniformGrid& grid,
                                 const BoundaryData& bc,
                                 const QuadraticCoefficients& qc);

struct SolveOptions {
  /// Solve the composed (phase-fused) equation-of-motion rows instead of
  /// the stationarity conditions of the discretized action. Required for
  /// complex Lagrangians whose damping term cancels under symmetrization.
  bool riewe_composition = false;
  std::size_t max_unknowns = 20000;
  double residual_tol = 1e-9;
};

SampledPath solve_stationary(const LagrangianSpec& lag,
                             const UniformGrid& grid, const BoundaryData& bc,
                             const SolveOptions& opts = {});

}  // namespace fracvar

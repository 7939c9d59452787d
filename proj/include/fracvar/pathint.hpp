#pragma once

#include <iosfwd>

#include "fracvar/solver.hpp"

namespace fracvar {

/// Gaussian kernel diagnostics: log Z, two-point correlators and fitted
/// decay rates.
struct SpectralReport {
  double log_det = 0.0;
  std::vector<std::pair<double, Complex>> correlator;  // (tau, <x_i x_j>)
  std::vector<double> gap_estimates;
  UniformGrid grid{0.0, 1.0, 2};
  std::map<std::string, double> metadata;
};

/// tau-window used for the log-linear decay fit.
struct FitWindow {
  double tau_min = 0.0;
  double tau_max = 1e300;
};

/// Imaginary-time continuation of the action: exp(iS) -> exp(-S_E). The
/// coefficients pick up H^E_{ll'} = -i^{nu_l+nu_l'} H_{ll'}, which makes the
/// oscillator form positive definite. The sign of the Minkowski top block
/// is reported in metadata["ghost_sign"], never hidden.
QuadraticForm euclidean_quadratic_form(const LagrangianSpec& lag,
                                       const UniformGrid& grid,
                                       const BoundaryData& bc);

/// -1/2 log|det A| + (N/2) log(2pi), N = unknown count.
double kernel_log_det(const QuadraticForm& form);

/// <x_i x_j> = (A^-1)_{ij} for each requested (i, j) row pair, plus a
/// log-linear decay fit over the window. Requires positive definite A.
SpectralReport correlator(
    const QuadraticForm& form,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const FitWindow& window = {});

/// Quartic oscillator kernel evaluated through the exact symbol
/// factorization (s + w^2)(eps^2 s + 1): one standard oscillator per mode,
/// with fitted rates ~ {w, 1/eps}.
SpectralReport mode_split_report(const LagrangianSpec& pu_like,
                                 const UniformGrid& grid,
                                 const FitWindow& window = {});

struct MarginalizationResult {
  QuadraticForm effective;  // Euclidean form on the q0 field
  QuadraticForm full;       // effective block plus the auxiliary block
  double log_c = 0.0;       // (N/2) log(2pi / (gamma dt))
  std::size_t aux_count = 0;
};

/// Integrates out the decoupled half-order coordinate of the damped system
/// as an independent Gaussian field (one sample per grid point), returning
/// the effective form on q0 and the constant log C.
MarginalizationResult marginalize_auxiliary(const LagrangianSpec& lag,
                                            const UniformGrid& grid,
                                            const BoundaryData& bc,
                                            bool independent_half_field = true);

std::string to_json(const SpectralReport& report);
void write_correlator_csv(std::ostream& os, const SpectralReport& report);

}  // namespace fracvar

#pragma once

#include <map>

#include "fracvar/fracops.hpp"

namespace fracvar {

/// Generalized Taylor basis element
///   e_alpha(lambda) = (lambda - lambda0)^alpha / Gamma(alpha + 1),
/// defined on the right of its center lambda0.
struct BasisElement {
  FracOrder order;
  double center = 0.0;
};

/// Truncated series sum_m c_m e_{m+alpha}(lambda). Negative-index slots are
/// carried for pairing bookkeeping but skipped by reconstruct (they are
/// singular at the center).
struct FracSeries {
  double alpha = 0.0;  // in [0, 1)
  double center = 0.0;
  std::map<int, Complex> coeffs;

  static constexpr int kWindowMin = -4;
  static constexpr int kWindowMax = 12;
};

Complex eval_basis(const BasisElement& elem, double lambda);

/// Pairing <e^{alpha_m}, e_{alpha_m'}> evaluated analytically through the
/// power rule; equals the Kronecker delta on indices. Supported for
/// |m|, |m'| <= 12.
Complex dual_pairing(int m, int m_prime, double alpha);

Complex reconstruct(const FracSeries& series, double lambda);

/// Recover ladder coefficients of a fractional polynomial given as a map
/// exponent -> coefficient; every exponent must sit on the m+alpha ladder.
FracSeries project(const std::map<double, Complex>& f_powers, double alpha,
                   double center = 0.0, int m_min = FracSeries::kWindowMin,
                   int m_max = FracSeries::kWindowMax);

}  // namespace fracvar

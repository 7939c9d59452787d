#include "fracvar/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace fracvar {

Complex eval_basis(const BasisElement& elem, double lambda) {
  if (lambda < elem.center)
    throw std::domain_error("eval_basis: lambda must be >= center");
  const double am = elem.order.total();
  if (am == 0.0) return Complex(1.0);
  const double d = lambda - elem.center;
  if (d == 0.0) return Complex(0.0);
  return Complex(std::pow(d, am) * rgamma(am + 1.0));
}

Complex dual_pairing(int m, int m_prime, double alpha) {
  if (std::abs(m) > 12 || std::abs(m_prime) > 12)
    throw std::invalid_argument("dual_pairing: index outside supported window");
  (void)alpha;  // the ladder offset cancels in the index difference
  // The pairing reduces to (lambda - lambda0)^(m'-m) / Gamma(m'-m+1) at
  // lambda0: the positive power kills m' > m, the Gamma pole kills m' < m.
  if (m_prime == m) return Complex(1.0);
  if (m_prime > m) return Complex(0.0);
  return Complex(rgamma(static_cast<double>(m_prime - m) + 1.0));  // exact 0
}

Complex reconstruct(const FracSeries& series, double lambda) {
  if (lambda < series.center)
    throw std::domain_error("reconstruct: lambda must be >= center");
  Complex acc(0.0);
  for (const auto& [m, c] : series.coeffs) {
    const double am = static_cast<double>(m) + series.alpha;
    if (am < 0.0) continue;  // singular at the center, pairing algebra only
    acc += c * eval_basis(BasisElement{FracOrder::from_total(am),
                                       series.center},
                          lambda);
  }
  return acc;
}

FracSeries project(const std::map<double, Complex>& f_powers, double alpha,
                   double center, int m_min, int m_max) {
  FracSeries series;
  series.alpha = alpha;
  series.center = center;
  for (const auto& [exponent, c] : f_powers) {
    const double m_real = exponent - alpha;
    const int m = static_cast<int>(std::lround(m_real));
    if (std::abs(m_real - static_cast<double>(m)) > 1e-9)
      throw std::invalid_argument("project: exponent off the alpha ladder");
    if (m < m_min || m > m_max)
      throw std::invalid_argument("project: exponent outside the window");
    const double am = static_cast<double>(m) + alpha;
    series.coeffs[m] = real_gamma(am + 1.0) * c;
  }
  return series;
}

}  // namespace fracvar

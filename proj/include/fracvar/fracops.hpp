#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace fracvar {

using Complex = std::complex<double>;

/// Uniformly sampled closed interval [a, b] with n >= 2 samples.
struct UniformGrid {
  double a;
  double b;
  std::size_t n;

  UniformGrid(double a_, double b_, std::size_t n_);

  double dt() const { return (b - a) / static_cast<double>(n - 1); }
  double t(std::size_t i) const { return a + dt() * static_cast<double>(i); }
  bool operator==(const UniformGrid&) const = default;
};

/// A real order alpha_total >= 0 split as m + frac with m integer and
/// frac in [0, 1).
class FracOrder {
 public:
  static FracOrder from_total(double total);
  FracOrder(int m, double frac);

  int integer_part() const { return m_; }
  double frac_part() const { return frac_; }
  double total() const { return static_cast<double>(m_) + frac_; }
  bool is_integer() const { return frac_ == 0.0; }

 private:
  int m_;
  double frac_;
};

/// Grunwald-Letnikov weights w_k = (-1)^k binom(alpha, k), generated by
/// w_0 = 1, w_k = w_{k-1} (k - 1 - alpha) / k.
struct GLWeights {
  FracOrder order;
  std::vector<double> w;
};

/// Complex-valued trajectory on a uniform grid. The low-accuracy counts
/// mark boundary samples whose GL sum had fewer than four terms.
struct SampledPath {
  UniformGrid grid;
  std::vector<Complex> values;
  std::size_t low_accuracy_left = 0;
  std::size_t low_accuracy_right = 0;

  SampledPath(UniformGrid g, std::vector<Complex> v);
  static SampledPath zeros(const UniformGrid& g);
  static SampledPath from_function(const UniformGrid& g,
                                   const std::function<Complex(double)>& f);
};

GLWeights gl_weights(const FracOrder& order, std::size_t count);

/// Left derivative with lower limit a:
///   (D^alpha f)(t_i) = dt^-alpha sum_{k=0..i} w_k f(t_{i-k}).
SampledPath left_rl_deriv(const SampledPath& path, const FracOrder& order);

/// Right derivative with upper limit b:
///   (D^alpha f)(t_i) = dt^-alpha sum_k w_k f(t_{i+k}).
/// For alpha = 1 this equals -f'.
SampledPath right_rl_deriv(const SampledPath& path, const FracOrder& order);

/// Analytic power rule for f(t) = (t-a)^beta:
///   D^alpha f = Gamma(beta+1)/Gamma(beta-alpha+1) * s^(beta-alpha),
/// evaluated at s = t-a. Exactly zero when beta-alpha+1 hits a Gamma pole.
Complex rl_power_rule(double beta, const FracOrder& order, double s);

/// 1/Gamma(x); exactly zero at the poles x = 0, -1, -2, ...
double rgamma(double x);

double real_gamma(double x);

}  // namespace fracvar

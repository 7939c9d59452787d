#include "fracvar/fracops.hpp"

#include <cmath>
#include <stdexcept>

namespace fracvar {

UniformGrid::UniformGrid(double a_, double b_, std::size_t n_)
    : a(a_), b(b_), n(n_) {
  if (!(b > a)) throw std::invalid_argument("UniformGrid: requires b > a");
  if (n < 2) throw std::invalid_argument("UniformGrid: requires n >= 2");
}

FracOrder FracOrder::from_total(double total) {
  if (!(total >= 0.0))
    throw std::invalid_argument("FracOrder: total order must be >= 0");
  int m = static_cast<int>(std::floor(total));
  double frac = total - static_cast<double>(m);
  if (frac >= 1.0) {  // floor rounding at representable boundaries
    ++m;
    frac = 0.0;
  }
  return FracOrder(m, frac);
}

FracOrder::FracOrder(int m, double frac) : m_(m), frac_(frac) {
  if (m < 0) throw std::invalid_argument("FracOrder: integer part must be >= 0");
  if (!(frac >= 0.0 && frac < 1.0))
    throw std::invalid_argument("FracOrder: fractional part must be in [0,1)");
}

SampledPath::SampledPath(UniformGrid g, std::vector<Complex> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.n)
    throw std::invalid_argument("SampledPath: value count must match grid");
}

SampledPath SampledPath::zeros(const UniformGrid& g) {
  return SampledPath(g, std::vector<Complex>(g.n, Complex(0.0)));
}

SampledPath SampledPath::from_function(
    const UniformGrid& g, const std::function<Complex(double)>& f) {
  std::vector<Complex> v(g.n);
  for (std::size_t i = 0; i < g.n; ++i) v[i] = f(g.t(i));
  return SampledPath(g, std::move(v));
}

GLWeights gl_weights(const FracOrder& order, std::size_t count) {
  if (count < 1) throw std::invalid_argument("gl_weights: count must be >= 1");
  std::vector<double> w(count);
  const double alpha = order.total();
  w[0] = 1.0;
  for (std::size_t k = 1; k < count; ++k)
    w[k] = w[k - 1] * (static_cast<double>(k) - 1.0 - alpha) /
           static_cast<double>(k);
  return GLWeights{order, std::move(w)};
}

SampledPath left_rl_deriv(const SampledPath& path, const FracOrder& order) {
  if (order.total() == 0.0) return path;
  const std::size_t n = path.grid.n;
  const GLWeights gw = gl_weights(order, n);
  const double scale = std::pow(path.grid.dt(), -order.total());
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex acc(0.0);
    for (std::size_t k = 0; k <= i; ++k) acc += gw.w[k] * path.values[i - k];
    out[i] = scale * acc;
  }
  SampledPath result(path.grid, std::move(out));
  result.low_accuracy_left = std::min<std::size_t>(3, n);
  return result;
}

SampledPath right_rl_deriv(const SampledPath& path, const FracOrder& order) {
  if (order.total() == 0.0) return path;
  const std::size_t n = path.grid.n;
  const GLWeights gw = gl_weights(order, n);
  const double scale = std::pow(path.grid.dt(), -order.total());
  std::vector<Complex> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Complex acc(0.0);
    for (std::size_t k = 0; i + k < n; ++k) acc += gw.w[k] * path.values[i + k];
    out[i] = scale * acc;
  }
  SampledPath result(path.grid, std::move(out));
  result.low_accuracy_right = std::min<std::size_t>(3, n);
  return result;
}

double rgamma(double x) {
  if (x <= 0.5 && x == std::floor(x)) return 0.0;  // pole
  return 1.0 / std::tgamma(x);
}

double real_gamma(double x) { return std::tgamma(x); }

Complex rl_power_rule(double beta, const FracOrder& order, double s) {
  if (beta <= -1.0)
    throw std::domain_error("rl_power_rule: beta must be > -1");
  if (!(s > 0.0)) throw std::domain_error("rl_power_rule: s must be > 0");
  const double alpha = order.total();
  const double r = rgamma(beta - alpha + 1.0);
  if (r == 0.0) return Complex(0.0);
  return Complex(real_gamma(beta + 1.0) * r * std::pow(s, beta - alpha));
}

}  // namespace fracvar

#include <cmath>
#include <random>

#include "doctest.h"
#include "fracvar/fracops.hpp"

using namespace fracvar;

namespace {

// max |.| over interior samples, skipping `skip` samples on each side
double max_interior_err(const SampledPath& got, const SampledPath& expect,
                        std::size_t skip) {
  double m = 0.0;
  for (std::size_t i = skip; i + skip < got.grid.n; ++i)
    m = std::max(m, std::abs(got.values[i] - expect.values[i]));
  return m;
}

}  // namespace

TEST_CASE("grid and order invariants") {
  CHECK_THROWS(UniformGrid(1.0, 1.0, 4));
  CHECK_THROWS(UniformGrid(0.0, 1.0, 1));
  CHECK(UniformGrid(0.0, 1.0, 5).dt() == doctest::Approx(0.25));

  CHECK_THROWS(FracOrder::from_total(-0.1));
  auto o = FracOrder::from_total(2.5);
  CHECK(o.integer_part() == 2);
  CHECK(o.frac_part() == doctest::Approx(0.5));
  CHECK(o.total() == doctest::Approx(2.5));
  CHECK(FracOrder::from_total(3.0).is_integer());
}

TEST_CASE("gl_weights examples and recurrence") {
  auto w1 = gl_weights(FracOrder::from_total(1.0), 4).w;
  CHECK(w1[0] == 1.0);
  CHECK(w1[1] == -1.0);
  CHECK(w1[2] == 0.0);
  CHECK(w1[3] == 0.0);

  auto w0 = gl_weights(FracOrder::from_total(0.0), 3).w;
  CHECK(w0[0] == 1.0);
  CHECK(w0[1] == 0.0);
  CHECK(w0[2] == 0.0);

  // frozen from the recurrence w_k = w_{k-1}(k-1-alpha)/k
  auto wh = gl_weights(FracOrder::from_total(0.5), 4).w;
  CHECK(wh[0] == doctest::Approx(1.0));
  CHECK(wh[1] == doctest::Approx(-0.5));
  CHECK(wh[2] == doctest::Approx(-0.125));
  CHECK(wh[3] == doctest::Approx(-0.0625));

  // recurrence invariant for a generic order
  auto w = gl_weights(FracOrder::from_total(1.7), 64).w;
  for (std::size_t k = 1; k < w.size(); ++k)
    CHECK(w[k] ==
          doctest::Approx(w[k - 1] * (double(k) - 1.0 - 1.7) / double(k)));

  // integer order p: weights vanish beyond k = p
  auto w2 = gl_weights(FracOrder::from_total(2.0), 8).w;
  for (std::size_t k = 3; k < 8; ++k) CHECK(w2[k] == 0.0);
}

TEST_CASE("rl_power_rule oracle") {
  CHECK(rl_power_rule(1.0, FracOrder::from_total(1.0), 3.0).real() ==
        doctest::Approx(1.0));
  CHECK(rl_power_rule(0.5, FracOrder::from_total(0.5), 1.0).real() ==
        doctest::Approx(0.8862269254527580).epsilon(1e-12));
  // Gamma pole: beta - alpha + 1 = 0
  CHECK(rl_power_rule(0.5, FracOrder::from_total(1.5), 1.0) == Complex(0.0));
  CHECK_THROWS_AS(rl_power_rule(-1.0, FracOrder::from_total(0.5), 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(rl_power_rule(0.5, FracOrder::from_total(0.5), 0.0),
                  std::domain_error);
}

TEST_CASE("order zero is the identity, bit-exactly") {
  UniformGrid g(0.0, 2.0, 33);
  auto f = SampledPath::from_function(
      g, [](double t) { return Complex(std::sin(t), 0.3 * t); });
  auto d = left_rl_deriv(f, FracOrder::from_total(0.0));
  auto r = right_rl_deriv(f, FracOrder::from_total(0.0));
  for (std::size_t i = 0; i < g.n; ++i) {
    CHECK(d.values[i] == f.values[i]);
    CHECK(r.values[i] == f.values[i]);
  }
}

TEST_CASE("integer orders collapse to one-sided finite differences") {
  UniformGrid g(0.0, 1.0, 101);
  auto f = SampledPath::from_function(
      g, [](double t) { return Complex(t * t * t - 0.5 * t); });
  const double dt = g.dt();
  auto d1 = left_rl_deriv(f, FracOrder::from_total(1.0));
  auto d2 = left_rl_deriv(f, FracOrder::from_total(2.0));
  for (std::size_t i = 2; i < g.n; ++i) {
    CHECK(std::abs(d1.values[i] - (f.values[i] - f.values[i - 1]) / dt) < 1e-12);
    CHECK(std::abs(d2.values[i] - (f.values[i] - 2.0 * f.values[i - 1] +
                                   f.values[i - 2]) /
                                      (dt * dt)) < 1e-9);
  }
}

TEST_CASE("left derivative of (t-a) at order 1 is 1 on the interior") {
  UniformGrid g(0.5, 2.5, 41);
  auto f = SampledPath::from_function(g, [&](double t) { return Complex(t - g.a); });
  auto d = left_rl_deriv(f, FracOrder::from_total(1.0));
  for (std::size_t i = 1; i < g.n; ++i)
    CHECK(std::abs(d.values[i] - Complex(1.0)) < 1e-12);
}

TEST_CASE("left half-derivative converges to the power rule") {
  // f = (t-a)^0.5, alpha = 0.5 -> Gamma(1.5) everywhere
  const double target = 0.8862269254527580;
  double prev = 0.0;
  for (std::size_t n : {129, 257, 513}) {
    UniformGrid g(0.0, 1.0, n);
    auto f = SampledPath::from_function(
        g, [](double t) { return Complex(std::sqrt(t)); });
    auto d = left_rl_deriv(f, FracOrder::from_total(0.5));
    double err = 0.0;
    for (std::size_t i = g.n / 4; i < g.n; ++i)
      err = std::max(err, std::abs(d.values[i] - Complex(target)));
    if (prev > 0.0) CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.02);
}

TEST_CASE("half-derivative of a constant is nonzero, matching the power rule") {
  UniformGrid g(0.0, 1.0, 801);
  auto f = SampledPath::from_function(g, [](double) { return Complex(1.0); });
  auto d = left_rl_deriv(f, FracOrder::from_total(0.5));
  for (std::size_t i = g.n / 2; i < g.n; ++i) {
    double s = g.t(i) - g.a;
    Complex expect = rl_power_rule(0.0, FracOrder::from_total(0.5), s);
    CHECK(std::abs(d.values[i] - expect) < 0.02);
  }
}

TEST_CASE("right derivative conventions") {
  UniformGrid g(0.0, 2.0, 41);
  // f = (b - t), alpha = 1 -> constant 1 under D_b f ~ -f'
  auto f = SampledPath::from_function(g, [&](double t) { return Complex(g.b - t); });
  auto d = right_rl_deriv(f, FracOrder::from_total(1.0));
  for (std::size_t i = 0; i + 1 < g.n; ++i)
    CHECK(std::abs(d.values[i] - Complex(1.0)) < 1e-12);

  // f = (b-t)^0.5, alpha = 0.5 -> Gamma(1.5) (mirrored power rule)
  UniformGrid g2(0.0, 1.0, 801);
  auto h = SampledPath::from_function(
      g2, [&](double t) { return Complex(std::sqrt(g2.b - t)); });
  auto dh = right_rl_deriv(h, FracOrder::from_total(0.5));
  for (std::size_t i = 0; i < 3 * g2.n / 4; ++i)
    CHECK(std::abs(dh.values[i] - Complex(0.8862269254527580)) < 0.03);
}

TEST_CASE("linearity to machine precision") {
  UniformGrid g(0.0, 1.0, 64);
  std::mt19937 rng(20240817);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&](const UniformGrid& gr) {
    std::vector<Complex> v(gr.n);
    for (auto& x : v) x = Complex(u(rng), u(rng));
    return SampledPath(gr, std::move(v));
  };
  for (double alpha : {0.25, 0.5, 1.0, 1.5, 2.3}) {
    auto f = rnd(g), h = rnd(g);
    Complex c1(0.7, -0.2), c2(-1.3, 0.5);
    std::vector<Complex> comb(g.n);
    for (std::size_t i = 0; i < g.n; ++i)
      comb[i] = c1 * f.values[i] + c2 * h.values[i];
    auto lhs = left_rl_deriv(SampledPath(g, comb), FracOrder::from_total(alpha));
    auto df = left_rl_deriv(f, FracOrder::from_total(alpha));
    auto dh = left_rl_deriv(h, FracOrder::from_total(alpha));
    for (std::size_t i = 0; i < g.n; ++i) {
      Complex rhs = c1 * df.values[i] + c2 * dh.values[i];
      CHECK(std::abs(lhs.values[i] - rhs) <
            1e-10 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("first-order convergence against the power rule") {
  // f = (t-a)^beta, beta >= 1: halving dt halves the interior error (+-20%)
  for (double alpha : {0.25, 0.5, 0.75}) {
    for (double beta : {1.0, 2.0, 2.5}) {
      double errs[2];
      int k = 0;
      for (std::size_t n : {257, 513}) {
        UniformGrid g(0.0, 1.0, n);
        auto f = SampledPath::from_function(
            g, [&](double t) { return Complex(std::pow(t, beta)); });
        auto d = left_rl_deriv(f, FracOrder::from_total(alpha));
        auto expect = SampledPath::from_function(g, [&](double t) {
          if (t <= g.a) return Complex(0.0);
          return rl_power_rule(beta, FracOrder::from_total(alpha), t - g.a);
        });
        errs[k++] = max_interior_err(d, expect, g.n / 8);
      }
      double ratio = errs[1] / errs[0];
      CHECK(ratio > 0.3);
      CHECK(ratio < 0.72);
    }
  }
}

TEST_CASE("boundary samples carry the low-accuracy flag") {
  UniformGrid g(0.0, 1.0, 16);
  auto f = SampledPath::from_function(g, [](double t) { return Complex(t); });
  auto d = left_rl_deriv(f, FracOrder::from_total(0.5));
  CHECK(d.low_accuracy_left == 3);
  auto r = right_rl_deriv(f, FracOrder::from_total(0.5));
  CHECK(r.low_accuracy_right == 3);
}

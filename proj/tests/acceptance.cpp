// Acceptance suite: one PASS/FAIL line per criterion.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fracvar/basis.hpp"
#include "fracvar/pathint.hpp"
#include "fracvar/solver.hpp"

using namespace fracvar;
namespace fs = std::filesystem;

namespace {

void report(int number, bool pass, const char* what) {
  std::printf("ACCEPTANCE %d: %s — %s\n", number, pass ? "PASS" : "FAIL",
              what);
  std::fflush(stdout);
  CHECK_MESSAGE(pass, what);
}

double gl_power_error(std::size_t n) {
  UniformGrid g(0.0, 1.0, n);
  SampledPath f = SampledPath::from_function(
      g, [](double t) { return Complex(std::pow(t, 2.5)); });
  SampledPath d = left_rl_deriv(f, FracOrder::from_total(0.5));
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = g.t(i);
    if (t < 0.1) continue;  // interior window
    err = std::max(err,
                   std::abs(d.values[i] -
                            rl_power_rule(2.5, FracOrder::from_total(0.5), t)));
  }
  return err;
}

double max_error(const SampledPath& x,
                 const std::function<double(double)>& ref) {
  double err = 0.0;
  for (std::size_t i = 0; i < x.grid.n; ++i)
    err = std::max(err, std::abs(x.values[i] - Complex(ref(x.grid.t(i)))));
  return err;
}

SampledPath solve_pu_combo(std::size_t n, double T) {
  double w = 1.0, eps = 0.1;
  auto f = [&](double t) { return std::sin(w * t) + 0.1 * std::sin(t / eps); };
  auto df = [&](double t) {
    return w * std::cos(w * t) + 0.1 / eps * std::cos(t / eps);
  };
  auto pu = make_pu(1.0, eps, w);
  UniformGrid g(0.0, T, n);
  BoundaryData bc{{{0, Complex(f(0.0))}, {1, Complex(df(0.0))}},
                  {{0, Complex(f(T))}, {1, Complex(df(T))}}};
  return solve_stationary(pu, g, bc);
}

/// relative interior variation of the reduced Hamiltonian along a path.
/// Normalized by the energy scale max(|H(0)|, max_t sum_l |p_l dq_l|): for
/// ghost systems the positive and negative mode energies can cancel in H
/// itself, so |H(0)| alone is not a usable scale.
double hamiltonian_variation(const LagrangianSpec& spec,
                             const SampledPath& x) {
  auto h = reduced_hamiltonian(spec, x);
  auto ps = momenta(spec, x);
  std::size_t n = x.grid.n;
  std::size_t skip = n / 10;
  Complex h0 = h.sampled.values[skip];
  double var = 0.0, scale = std::abs(h0);
  std::vector<SampledPath> qdots;
  for (std::size_t l = 0; l + 1 < spec.ladder.size(); ++l)
    qdots.push_back(left_rl_deriv(x, FracOrder::from_total(spec.ladder[l + 1])));
  for (std::size_t i = skip; i + skip < n; ++i) {
    var = std::max(var, std::abs(h.sampled.values[i] - h0));
    double pq = 0.0;
    for (std::size_t l = 0; l < qdots.size(); ++l)
      pq += std::abs(ps.sampled[l].values[i] * qdots[l].values[i]);
    scale = std::max(scale, pq);
  }
  return var / scale;
}

double oscillator_log_det_oracle(double w, double dt, std::size_t N) {
  double a = 2.0 + w * w * dt * dt;
  double prev = 1.0, cur = a, log_scale = 0.0;
  for (std::size_t i = 1; i < N; ++i) {
    double next = a * cur - prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > 1e100) {
      prev /= 1e100;
      cur /= 1e100;
      log_scale += std::log(1e100);
    }
  }
  return static_cast<double>(N) * std::log(1.0 / dt) + std::log(cur) +
         log_scale;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

BoundaryData zero_dirichlet() {
  return BoundaryData{{{0, Complex(0.0)}}, {{0, Complex(0.0)}}};
}

}  // namespace

TEST_CASE("criterion 1: first-order GL convergence") {
  double e256 = gl_power_error(256);
  double e512 = gl_power_error(512);
  report(1, e512 <= 0.6 * e256,
         "GL half-derivative of t^2.5 converges at first order");
}

TEST_CASE("criterion 2: biorthogonality") {
  bool pass = true;
  for (double alpha : {0.0, 0.25, 0.5, 0.75})
    for (int m = 0; m <= 6; ++m)
      for (int mp = 0; mp <= 6; ++mp) {
        Complex expect = (m == mp) ? Complex(1.0) : Complex(0.0);
        if (std::abs(dual_pairing(m, mp, alpha) - expect) > 1e-12)
          pass = false;
      }
  report(2, pass, "dual pairing is the Kronecker delta to 1e-12");
}

TEST_CASE("criterion 3: symbolic reproduction via the CLI") {
  fs::path dir = "acceptance_work";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "pu.json") << "{\"schema\":1,\"system\":\"pu\"}";
    std::ofstream(dir / "damped.json")
        << "{\"schema\":1,\"system\":\"damped\"}";
  }
  bool pass = true;
  for (std::string name : {"pu", "damped"}) {
    std::string cmd = std::string(FRACVAR_CLI_PATH) + " derive --config " +
                      (dir / (name + ".json")).string() + " > " +
                      (dir / (name + ".out")).string() + " 2> /dev/null";
    if (std::system(cmd.c_str()) != 0) pass = false;
    if (slurp(dir / (name + ".out")) !=
        slurp(fs::path(FRACVAR_GOLDEN_DIR) / ("derive_" + name + ".txt")))
      pass = false;
  }
  report(3, pass, "derive output matches the frozen momenta/Hamiltonians");
}

TEST_CASE("criterion 4: integer-limit momenta on the ladder {0,1,2}") {
  auto pu = make_pu();  // alpha = 1
  auto ps = symbolic_momenta(pu);
  // classical second-order form: p0 = dL/dq1 - d/dt dL/dq2, p1 = dL/dq2;
  // the -d/dt of q2 is written as -x[3] by the composed convention
  bool pass = ps.size() == 2 &&
              ast_equal(ps[0], fold(parse("(1+eps^2*w^2)*q1 + eps^2*x[3]"))) &&
              ast_equal(ps[1], fold(parse("-eps^2*q2")));
  auto general = make_lagrangian("0.5*q2^2 - 0.5*q1^2 - 0.5*q0^2",
                                 {0.0, 1.0, 2.0}, 1.0, {});
  auto gs = symbolic_momenta(general);
  pass = pass && ast_equal(gs[0], fold(parse("-q1 - x[3]"))) &&
         ast_equal(gs[1], fold(parse("q2")));
  report(4, pass, "momenta reduce to the classical Ostrogradski formulas");
}

TEST_CASE("criterion 5: classical solutions") {
  // (a) oscillator over a third period (full periods are resonant for
  // Dirichlet data)
  double w = 1.0, Ta = 2.0 * M_PI / (3.0 * w);
  UniformGrid ga(0.0, Ta, 2000);
  auto xa = solve_stationary(make_sho(1.0, 1.0, w * w), ga,
                             BoundaryData{{{0, Complex(0.0)}},
                                          {{0, Complex(std::sin(w * Ta))}}});
  double ea = max_error(xa, [&](double t) { return std::sin(w * t); });
  report(5, ea < 5e-3, "(a) oscillator matches sin to 5e-3");

  // (b) quartic oscillator two-mode combination
  double eps = 0.1;
  auto xb = solve_pu_combo(4000, 2.0);
  double eb = max_error(xb, [&](double t) {
    return std::sin(t) + 0.1 * std::sin(t / eps);
  });
  report(5, eb < 2e-2, "(b) two-mode combination matches to 2e-2");

  // (c) damped oscillator under the composed convention
  double m = 1.0, gam = 0.4, k = 1.0;
  double wd = std::sqrt(k / m - gam * gam / (4.0 * m * m));
  auto f = [&](double t) {
    return std::exp(-gam * t / (2.0 * m)) * std::sin(wd * t);
  };
  UniformGrid gc(0.0, 10.0, 4501);
  SolveOptions opts;
  opts.riewe_composition = true;
  auto xc = solve_stationary(make_damped(m, gam, k), gc,
                             BoundaryData{{{0, Complex(0.0)}},
                                          {{0, Complex(f(10.0))}}},
                             opts);
  double ec = max_error(xc, f);
  report(5, ec < 2e-2, "(c) damped envelope matches to 2e-2");
}

TEST_CASE("criterion 6: Hamiltonian conservation and its fractional loss") {
  auto pu = make_pu();
  double var4000 = hamiltonian_variation(pu, solve_pu_combo(4000, 2.0));
  report(6, var4000 < 1e-2,
         "quartic-oscillator H varies by < 1e-2 along the solution");
  double var2000 = hamiltonian_variation(pu, solve_pu_combo(2000, 2.0));
  report(6, var4000 < var2000, "the H variation shrinks under refinement");

  double T = 2.0 * M_PI / 3.0;
  UniformGrid g(0.0, T, 1024);
  BoundaryData bc{{{0, Complex(0.0)}}, {{0, Complex(std::sin(T))}}};
  double v1 = hamiltonian_variation(make_sho(1.0),
                                    solve_stationary(make_sho(1.0), g, bc));
  double v09 = hamiltonian_variation(make_sho(0.9),
                                     solve_stationary(make_sho(0.9), g, bc));
  report(6, v09 > 10.0 * v1,
         "at alpha = 0.9 the H variation exceeds 10x the alpha = 1 value");
}

TEST_CASE("criterion 7: kernel identities") {
  UniformGrid g(0.0, 5.0, 500);
  bool pass = true;
  for (double w : {1.0, 1.4}) {
    auto form = euclidean_quadratic_form(make_sho(1.0, 1.0, w * w), g,
                                         zero_dirichlet());
    std::size_t N = form.unknown_indices.size();
    double expect = -0.5 * oscillator_log_det_oracle(w, g.dt(), N) +
                    0.5 * static_cast<double>(N) * std::log(2.0 * M_PI);
    if (std::abs(kernel_log_det(form) - expect) >
        1e-8 * std::max(1.0, std::abs(expect)))
      pass = false;
  }
  report(7, pass, "log-determinant matches the tridiagonal recursion");

  UniformGrid gm(0.0, 0.7, 8);
  auto with_v = marginalize_auxiliary(make_damped(1.0, 2.0, 1.0), gm,
                                      zero_dirichlet());
  auto no_v = marginalize_auxiliary(
      make_lagrangian("0.5*m*q2^2 + i*(g/2)*q1^2", {0.0, 0.5, 1.0}, 0.5,
                      {{"m", Complex(1.0)}, {"g", Complex(2.0)}}),
      gm, zero_dirichlet());
  bool fubini =
      std::abs(kernel_log_det(with_v.full) -
               (kernel_log_det(with_v.effective) + with_v.log_c)) < 1e-8 &&
      std::abs(kernel_log_det(no_v.full) -
               (kernel_log_det(no_v.effective) + no_v.log_c)) < 1e-8;
  report(7, fubini, "marginalization identity holds to 1e-8");
  report(7, with_v.log_c == no_v.log_c,
         "log C is independent of the potential");
}

TEST_CASE("criterion 8: spectral gaps") {
  double w = 1.0;
  UniformGrid g(0.0, 40.0 / w, 2000);
  auto form = euclidean_quadratic_form(make_sho(1.0, 1.0, w * w), g,
                                       zero_dirichlet());
  std::size_t nu = form.unknown_indices.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t d = 0; d < 200; ++d) pairs.emplace_back(nu / 2, nu / 2 + d);
  auto rep = correlator(form, pairs, FitWindow{0.2, 2.5});
  bool sho_ok = rep.gap_estimates.size() == 1 &&
                std::abs(rep.gap_estimates[0] - w) < 0.02 * w;
  report(8, sho_ok, "oscillator decay rate within 2% of w");

  auto pu_rep = mode_split_report(make_pu(), g, FitWindow{0.01, 2.0});
  bool pu_ok = pu_rep.gap_estimates.size() == 2 &&
               std::abs(pu_rep.gap_estimates[0] - 1.0) < 0.02 &&
               std::abs(pu_rep.gap_estimates[1] - 10.0) < 0.2;
  report(8, pu_ok, "factorized modes within 2% of {w, 1/eps}");
}

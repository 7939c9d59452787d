#include "fracvar/solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracvar {

namespace {

constexpr double kOrderTol = 1e-9;

ExprPtr with_coords_zeroed(const LagrangianSpec& lag, const ExprPtr& e) {
  ExprPtr out = e;
  for (int l = 0; l <= lag.top_index(); ++l)
    out = subst_coord(out, l, make_const(Complex(0.0)));
  return out;
}

Complex eval_constant(const LagrangianSpec& lag, const ExprPtr& e,
                      const char* what) {
  if (contains_kind(e, NodeKind::Coord) ||
      contains_kind(e, NodeKind::CoordOrder) ||
      contains_kind(e, NodeKind::Mom) || contains_kind(e, NodeKind::RDeriv))
    throw std::invalid_argument(std::string("assemble_action: ") + what +
                                " is not constant; the Lagrangian must be "
                                "quadratic in the coordinates");
  EvalContext ctx;
  ctx.params = lag.params;
  return eval(e, ctx);
}

std::vector<double> prefix_sums(const std::vector<double>& w) {
  std::vector<double> s(w.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    acc += w[k];
    s[k] = acc;
  }
  return s;
}

}  // namespace

Complex QuadraticForm::value(const Eigen::VectorXcd& x) const {
  return Complex(0.5) * (x.transpose() * A * x).value() +
         (b.transpose() * x).value() + c;
}

QuadraticCoefficients quadratic_coefficients(const LagrangianSpec& lag) {
  lag.validate();
  if (contains_kind(lag.expr, NodeKind::Time))
    throw std::invalid_argument(
        "assemble_action: time-dependent Lagrangians are not supported");
  if (contains_kind(lag.expr, NodeKind::Mom) ||
      contains_kind(lag.expr, NodeKind::CoordOrder) ||
      contains_kind(lag.expr, NodeKind::RDeriv))
    throw std::invalid_argument(
        "assemble_action: the Lagrangian must be written in the ladder "
        "coordinates q0..qn only");
  int P = lag.top_index() + 1;
  QuadraticCoefficients qc;
  qc.hessian = Eigen::MatrixXcd::Zero(P, P);
  qc.linear = Eigen::VectorXcd::Zero(P);
  for (int l = 0; l < P; ++l) {
    ExprPtr dl = partial(lag.expr, l);
    for (int lp = l; lp < P; ++lp) {
      Complex h = eval_constant(lag, partial(dl, lp), "a second derivative");
      qc.hessian(l, lp) = h;
      qc.hessian(lp, l) = h;
    }
    qc.linear(l) =
        eval_constant(lag, fold(with_coords_zeroed(lag, dl)), "a gradient");
  }
  qc.constant = eval_constant(
      lag, fold(with_coords_zeroed(lag, lag.expr)), "the constant part");
  return qc;
}

std::vector<std::pair<std::size_t, Complex>> pin_boundary_samples(
    const LagrangianSpec& lag, const UniformGrid& grid,
    const BoundaryData& bc) {
  std::size_t expected =
      static_cast<std::size_t>(std::ceil(lag.top_order() - kOrderTol));
  if (bc.left.size() != expected || bc.right.size() != expected)
    throw BoundaryError("boundary data: each side needs " +
                        std::to_string(expected) + " condition(s)");
  if (2 * expected + 2 > grid.n)
    throw BoundaryError("boundary data: grid too small for the conditions");

  auto side_values = [&](const std::vector<std::pair<int, Complex>>& conds) {
    auto sorted = conds;
    std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
      return lag.ladder.at(a.first) < lag.ladder.at(b.first);
    });
    std::vector<Complex> values;  // values[j] pins the j-th sample from the end
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      int slot = sorted[j].first;
      if (slot < 0 || slot > lag.top_index())
        throw BoundaryError("boundary data: ladder slot out of range");
      double nu = lag.ladder.at(static_cast<std::size_t>(slot));
      if (std::abs(nu - static_cast<double>(j)) > kOrderTol)
        throw BoundaryError(
            "boundary data: each side must pin the coordinates of integer "
            "order 0.." + std::to_string(expected - 1) + " exactly once");
      values.push_back(sorted[j].second);
    }
    return values;
  };

  double dt = grid.dt();
  std::vector<std::pair<std::size_t, Complex>> pins;

  std::vector<Complex> lv = side_values(bc.left);
  std::vector<Complex> xs;  // x_0 .. x_{m-1}
  for (std::size_t p = 0; p < lv.size(); ++p) {
    // p-th forward difference: sum_k w_k x_{p-k} = v dt^p
    GLWeights w = gl_weights(FracOrder::from_total(double(p)), p + 1);
    Complex acc = lv[p] * std::pow(dt, double(p));
    for (std::size_t k = 1; k <= p; ++k) acc -= w.w[k] * xs[p - k];
    xs.push_back(acc);  // w_0 = 1
    pins.emplace_back(p, xs.back());
  }

  std::vector<Complex> rv = side_values(bc.right);
  std::vector<Complex> xe;  // x_{n-1}, x_{n-2}, ...
  for (std::size_t p = 0; p < rv.size(); ++p) {
    // p-th backward difference at b: sum_k w_k x_{n-1-k} = v dt^p
    GLWeights w = gl_weights(FracOrder::from_total(double(p)), p + 1);
    Complex acc = rv[p] * std::pow(dt, double(p));
    for (std::size_t k = 0; k < p; ++k) acc -= w.w[k] * xe[k];
    xe.push_back(acc / w.w[p]);
    pins.emplace_back(grid.n - 1 - p, xe.back());
  }
  std::sort(pins.begin(), pins.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return pins;
}

QuadraticForm assemble_action(const LagrangianSpec& lag,
                              const UniformGrid& grid,
                              const BoundaryData& bc) {
  return assemble_quadratic(lag, grid, bc, quadratic_coefficients(lag));
}

QuadraticForm assemble_quadratic(const LagrangianSpec& lag,
                                 const UniformGrid& grid,
                                 const BoundaryData& bc,
                                 const QuadraticCoefficients& qc) {
  const std::size_t n = grid.n;
  const double dt = grid.dt();
  const int P = lag.top_index() + 1;

  std::vector<std::vector<double>> w(P);
  std::vector<double> scale(P);
  for (int l = 0; l < P; ++l) {
    w[l] = gl_weights(FracOrder::from_total(lag.ladder[l]), n).w;
    scale[l] = std::pow(dt, -lag.ladder[l]);
  }

  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n, n);
  for (int l = 0; l < P; ++l)
    for (int lp = 0; lp < P; ++lp) {
      Complex coeff = dt * qc.hessian(l, lp) * scale[l] * scale[lp];
      if (coeff == Complex(0.0)) continue;
      // K += coeff * G_l^T G_lp with lower-triangular Toeplitz G
      for (std::size_t d = 0; d < n; ++d) {
        Complex acc(0.0);
        for (std::size_t q = 0; q + d < n; ++q) {
          acc += w[l][q + d] * w[lp][q];
          K(n - 1 - d - q, n - 1 - q) += coeff * acc;
        }
        if (d == 0) continue;
        Complex acc2(0.0);
        for (std::size_t q = 0; q + d < n; ++q) {
          acc2 += w[l][q] * w[lp][q + d];
          K(n - 1 - q, n - 1 - d - q) += coeff * acc2;
        }
      }
    }
  K = Complex(0.5) * (K + Eigen::MatrixXcd(K.transpose()));

  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  for (int l = 0; l < P; ++l) {
    if (qc.linear(l) == Complex(0.0)) continue;
    std::vector<double> s = prefix_sums(w[l]);
    Complex coeff = dt * qc.linear(l) * scale[l];
    for (std::size_t i = 0; i < n; ++i) v(i) += coeff * s[n - 1 - i];
  }

  QuadraticForm form;
  form.grid = grid;
  form.fixed = pin_boundary_samples(lag, grid, bc);
  std::vector<char> is_fixed(n, 0);
  for (const auto& [idx, val] : form.fixed) is_fixed[idx] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (!is_fixed[i]) form.unknown_indices.push_back(i);

  const std::size_t nu = form.unknown_indices.size();
  form.A.resize(nu, nu);
  form.b.resize(nu);
  for (std::size_t r = 0; r < nu; ++r) {
    std::size_t i = form.unknown_indices[r];
    for (std::size_t s = 0; s < nu; ++s)
      form.A(r, s) = K(i, form.unknown_indices[s]);
    Complex bi = v(i);
    for (const auto& [f, xf] : form.fixed) bi += K(i, f) * xf;
    form.b(r) = bi;
  }
  form.c = qc.constant * dt * static_cast<double>(n);
  for (const auto& [f, xf] : form.fixed) {
    form.c += v(f) * xf;
    for (const auto& [f2, xf2] : form.fixed)
      form.c += Complex(0.5) * K(f, f2) * xf * xf2;
  }
  form.metadata["hessian_top_real"] = qc.hessian(P - 1, P - 1).real();
  return form;
}

namespace {

std::size_t matrix_bandwidth(const Eigen::MatrixXcd& A) {
  std::size_t bw = 0;
  const auto n = static_cast<std::size_t>(A.rows());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (A(i, j) != Complex(0.0)) {
        std::size_t d = i > j ? i - j : j - i;
        bw = std::max(bw, d);
      }
  return bw;
}

Eigen::VectorXcd solve_linear(const Eigen::MatrixXcd& A,
                              const Eigen::VectorXcd& rhs, double tol) {
  Eigen::VectorXcd x;
  const auto n = A.rows();
  if (n > 0 && A.cwiseAbs().maxCoeff() == 0.0)
    throw SingularSystemError("stationary system is singular (resonance?)");
  if (n > 64 && matrix_bandwidth(A) <= 4) {
    Eigen::SparseMatrix<Complex> S(n, n);
    std::vector<Eigen::Triplet<Complex>> trips;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 4);
           j < std::min<Eigen::Index>(n, i + 5); ++j)
        if (A(i, j) != Complex(0.0)) trips.emplace_back(i, j, A(i, j));
    S.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(S);
    if (lu.info() != Eigen::Success)
      throw SingularSystemError("stationary system is singular (resonance?)");
    x = lu.solve(rhs);
  } else {
    x = Eigen::PartialPivLU<Eigen::MatrixXcd>(A).solve(rhs);
  }
  double res = (A * x - rhs).cwiseAbs().maxCoeff();
  double ref = std::max(rhs.cwiseAbs().maxCoeff(),
                        A.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff());
  if (!std::isfinite(res) || res > tol * std::max(ref, 1e-300))
    throw SingularSystemError("stationary system is singular (resonance?)");
  return x;
}

SampledPath scatter_solution(
    const UniformGrid& grid, const std::vector<std::size_t>& unknowns,
    const Eigen::VectorXcd& xu,
    const std::vector<std::pair<std::size_t, Complex>>& fixed) {
  SampledPath out = SampledPath::zeros(grid);
  for (std::size_t r = 0; r < unknowns.size(); ++r)
    out.values[unknowns[r]] = xu(r);
  for (const auto& [idx, val] : fixed) out.values[idx] = val;
  return out;
}

/// Composed equation-of-motion route. The equation rows form a single
/// lower-triangular Toeplitz operator W with W[d] =
/// sum_{l,l'} phase(nu_l) H_{ll'} dt^{-(nu_l+nu_l')} w^{nu_l+nu_l'}_d, which
/// is solved by forward substitution with the leading free samples treated
/// as parameters fixed by the trailing rows.
SampledPath solve_riewe(const LagrangianSpec& lag, const UniformGrid& grid,
                        const BoundaryData& bc, const SolveOptions& opts) {
  QuadraticCoefficients qc = quadratic_coefficients(lag);
  const std::size_t n = grid.n;
  const double dt = grid.dt();
  const int P = lag.top_index() + 1;

  std::vector<Complex> W(n, Complex(0.0));
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (int l = 0; l < P; ++l) {
    Complex phase =
        composition_phase(lag.ladder[l], CompositionConvention::RiewePhase);
    for (int lp = 0; lp < P; ++lp) {
      Complex coeff = phase * qc.hessian(l, lp);
      if (coeff == Complex(0.0)) continue;
      double tot = lag.ladder[l] + lag.ladder[lp];
      coeff *= std::pow(dt, -tot);
      GLWeights w = gl_weights(FracOrder::from_total(tot), n);
      for (std::size_t d = 0; d < n; ++d) W[d] += coeff * w.w[d];
    }
    if (qc.linear(l) != Complex(0.0)) {
      Complex coeff =
          phase * qc.linear(l) * std::pow(dt, -lag.ladder[l]);
      GLWeights w = gl_weights(FracOrder::from_total(lag.ladder[l]), n);
      std::vector<double> s = prefix_sums(w.w);
      for (std::size_t i = 0; i < n; ++i) rhs(i) -= coeff * s[i];
    }
  }
  if (W[0] == Complex(0.0))
    throw SingularSystemError("equation rows have a vanishing diagonal");

  auto fixed = pin_boundary_samples(lag, grid, bc);
  const std::size_t m = bc.left.size();  // = bc.right.size()
  const std::size_t s0 = 2 * m;          // first usable equation row
  const std::size_t p = m;               // trailing parameters
  const std::size_t uL = m;              // first unknown sample

  // affine representation x_i = coef[i][0] + sum_k coef[i][1+k] * param_k
  std::vector<std::vector<Complex>> coef(n,
                                         std::vector<Complex>(p + 1, 0.0));
  for (const auto& [idx, val] : fixed) coef[idx][0] = val;
  for (std::size_t k = 0; k < p; ++k) coef[uL + k][1 + k] = Complex(1.0);

  const std::size_t uR = n - 1 - m;  // last unknown sample
  for (std::size_t i = s0; i <= uR; ++i) {
    std::vector<Complex> acc(p + 1, Complex(0.0));
    acc[0] = rhs(i);
    for (std::size_t j = 0; j < i; ++j) {
      Complex wij = W[i - j];
      if (wij == Complex(0.0)) continue;
      for (std::size_t k = 0; k <= p; ++k) acc[k] -= wij * coef[j][k];
    }
    for (std::size_t k = 0; k <= p; ++k) coef[i][k] = acc[k] / W[0];
  }

  // trailing rows fix the parameters
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(p, p);
  Eigen::VectorXcd r = Eigen::VectorXcd::Zero(p);
  for (std::size_t row = 0; row < p; ++row) {
    std::size_t i = uR + 1 + row;
    std::vector<Complex> acc(p + 1, Complex(0.0));
    for (std::size_t j = 0; j <= i; ++j) {
      Complex wij = W[i - j];
      if (wij == Complex(0.0)) continue;
      for (std::size_t k = 0; k <= p; ++k) acc[k] += wij * coef[j][k];
    }
    r(row) = rhs(i) - acc[0];
    for (std::size_t k = 0; k < p; ++k) M(row, k) = acc[1 + k];
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
  if (!lu.isInvertible())
    throw SingularSystemError("equation rows are singular (resonance?)");
  Eigen::VectorXcd params = lu.solve(r);

  SampledPath out = SampledPath::zeros(grid);
  double xmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Complex xi = coef[i][0];
    for (std::size_t k = 0; k < p; ++k) xi += coef[i][1 + k] * params(k);
    out.values[i] = xi;
    xmax = std::max(xmax, std::abs(xi));
  }
  // residual of every equation row
  double res = 0.0;
  for (std::size_t i = s0; i < n; ++i) {
    Complex acc = -rhs(i);
    for (std::size_t j = 0; j <= i; ++j) acc += W[i - j] * out.values[j];
    res = std::max(res, std::abs(acc));
  }
  double ref = std::abs(W[0]) * std::max(xmax, 1e-300);
  if (!std::isfinite(res) || res > opts.residual_tol * ref)
    throw SingularSystemError("equation rows are singular (resonance?)");
  return out;
}

}  // namespace

SampledPath solve_stationary(const LagrangianSpec& lag,
                             const UniformGrid& grid, const BoundaryData& bc,
                             const SolveOptions& opts) {
  if (grid.n > opts.max_unknowns)
    throw std::invalid_argument("solve_stationary: grid exceeds the unknown "
                                "budget (" +
                                std::to_string(opts.max_unknowns) + ")");
  if (opts.riewe_composition) return solve_riewe(lag, grid, bc, opts);
  QuadraticForm form = assemble_action(lag, grid, bc);
  Eigen::VectorXcd xu = solve_linear(form.A, -form.b, opts.residual_tol);
  return scatter_solution(grid, form.unknown_indices, xu, form.fixed);
}

}  // namespace fracvar

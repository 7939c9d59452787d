#include "fracvar/pathint.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>
#include <stdexcept>

namespace fracvar {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Complex i_pow(double nu) {
  // i^nu = exp(i pi nu / 2), exact at integers
  long m = std::lround(nu);
  if (std::abs(nu - static_cast<double>(m)) < 1e-12) {
    switch (((m % 4) + 4) % 4) {
      case 0: return Complex(1.0);
      case 1: return Complex(0.0, 1.0);
      case 2: return Complex(-1.0);
      default: return Complex(0.0, -1.0);
    }
  }
  return std::exp(Complex(0.0, M_PI * nu / 2.0));
}

std::size_t form_bandwidth(const Eigen::MatrixXcd& A) {
  std::size_t bw = 0;
  const auto n = static_cast<std::size_t>(A.rows());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (A(i, j) != Complex(0.0)) bw = std::max(bw, i > j ? i - j : j - i);
  return bw;
}

/// Shift coordinate indices above `removed` down by one.
ExprPtr remap_coords_above(const ExprPtr& e, int removed) {
  if (e->kind == NodeKind::Coord && e->index > removed)
    return make_coord(e->index - 1);
  if (!e->lhs && !e->rhs) return e;
  ExprPtr l = e->lhs ? remap_coords_above(e->lhs, removed) : nullptr;
  ExprPtr r = e->rhs ? remap_coords_above(e->rhs, removed) : nullptr;
  if (l == e->lhs && r == e->rhs) return e;
  auto copy = std::make_shared<Expr>(*e);
  copy->lhs = l;
  copy->rhs = r;
  return copy;
}

void fit_gap(SpectralReport& report, const FitWindow& window) {
  // least-squares slope of log Re<xx> over the window
  std::vector<std::pair<double, double>> pts;
  double floor_ref = 0.0;
  for (const auto& [tau, v] : report.correlator)
    floor_ref = std::max(floor_ref, std::abs(v));
  for (const auto& [tau, v] : report.correlator) {
    if (tau < window.tau_min || tau > window.tau_max) continue;
    if (!(v.real() > 1e-12 * floor_ref)) continue;
    pts.emplace_back(tau, std::log(v.real()));
  }
  if (pts.size() < 2) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double nn = static_cast<double>(pts.size());
  double denom = nn * sxx - sx * sx;
  if (denom == 0.0) return;
  double slope = (nn * sxy - sx * sy) / denom;
  report.gap_estimates.push_back(-slope);
}

}  // namespace

QuadraticForm euclidean_quadratic_form(const LagrangianSpec& lag,
                                       const UniformGrid& grid,
                                       const BoundaryData& bc) {
  QuadraticCoefficients qc = quadratic_coefficients(lag);
  const int P = lag.top_index() + 1;
  QuadraticCoefficients qe;
  qe.hessian = Eigen::MatrixXcd::Zero(P, P);
  qe.linear = Eigen::VectorXcd::Zero(P);
  for (int l = 0; l < P; ++l) {
    for (int lp = 0; lp < P; ++lp)
      qe.hessian(l, lp) =
          -i_pow(lag.ladder[l] + lag.ladder[lp]) * qc.hessian(l, lp);
    qe.linear(l) = -i_pow(lag.ladder[l]) * qc.linear(l);
  }
  qe.constant = -qc.constant;
  QuadraticForm form = assemble_quadratic(lag, grid, bc, qe);
  double top = qc.hessian(P - 1, P - 1).real();
  form.metadata["euclidean"] = 1.0;
  form.metadata["ghost_sign"] = top > 0.0 ? 1.0 : (top < 0.0 ? -1.0 : 0.0);
  return form;
}

double kernel_log_det(const QuadraticForm& form) {
  const auto n = form.A.rows();
  double log_abs = 0.0;
  if (n > 0) {
    if (n > 64 && form_bandwidth(form.A) <= 4) {
      Eigen::SparseMatrix<Complex> S(n, n);
      std::vector<Eigen::Triplet<Complex>> trips;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = std::max<Eigen::Index>(0, i - 4);
             j < std::min<Eigen::Index>(n, i + 5); ++j)
          if (form.A(i, j) != Complex(0.0))
            trips.emplace_back(i, j, form.A(i, j));
      S.setFromTriplets(trips.begin(), trips.end());
      Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(S);
      if (lu.info() != Eigen::Success)
        throw SingularSystemError("kernel_log_det: singular form");
      log_abs = lu.logAbsDeterminant().real();
    } else {
      Eigen::PartialPivLU<Eigen::MatrixXcd> lu(form.A);
      for (Eigen::Index i = 0; i < n; ++i) {
        double d = std::abs(lu.matrixLU()(i, i));
        if (d == 0.0)
          throw SingularSystemError("kernel_log_det: singular form");
        log_abs += std::log(d);
      }
    }
  }
  if (!std::isfinite(log_abs))
    throw SingularSystemError("kernel_log_det: singular form");
  return -0.5 * log_abs +
         0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

SpectralReport correlator(
    const QuadraticForm& form,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    const FitWindow& window) {
  const auto n = form.A.rows();
  double scale = n > 0 ? form.A.cwiseAbs().maxCoeff() : 0.0;
  if (form.A.imag().cwiseAbs().maxCoeff() > 1e-12 * std::max(scale, 1e-300))
    throw std::domain_error(
        "correlator: form has complex weights; no positive-definite "
        "interpretation");
  Eigen::MatrixXd Ar = form.A.real();

  std::set<std::size_t> cols;
  for (const auto& [i, j] : pairs) {
    if (i >= static_cast<std::size_t>(n) || j >= static_cast<std::size_t>(n))
      throw std::out_of_range("correlator: pair index out of range");
    cols.insert(j);
  }

  std::map<std::size_t, Eigen::VectorXd> inv_cols;
  if (n > 64 && form_bandwidth(form.A) <= 4) {
    Eigen::SparseMatrix<double> S(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = std::max<Eigen::Index>(0, i - 4);
           j < std::min<Eigen::Index>(n, i + 5); ++j)
        if (Ar(i, j) != 0.0) trips.emplace_back(i, j, Ar(i, j));
    S.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(S);
    if (llt.info() != Eigen::Success)
      throw std::domain_error("correlator: form is not positive definite");
    for (std::size_t j : cols) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(static_cast<Eigen::Index>(j)) = 1.0;
      inv_cols[j] = llt.solve(e);
    }
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(Ar);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
      throw std::domain_error("correlator: form is not positive definite");
    for (std::size_t j : cols) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(static_cast<Eigen::Index>(j)) = 1.0;
      inv_cols[j] = ldlt.solve(e);
    }
  }

  SpectralReport report;
  report.grid = form.grid;
  report.log_det = kernel_log_det(form);
  for (const auto& [i, j] : pairs) {
    double ti = form.grid.t(form.unknown_indices.at(i));
    double tj = form.grid.t(form.unknown_indices.at(j));
    report.correlator.emplace_back(
        std::abs(tj - ti),
        Complex(inv_cols.at(j)(static_cast<Eigen::Index>(i))));
  }
  fit_gap(report, window);
  return report;
}

SpectralReport mode_split_report(const LagrangianSpec& pu_like,
                                 const UniformGrid& grid,
                                 const FitWindow& window) {
  QuadraticCoefficients qc = quadratic_coefficients(pu_like);
  if (pu_like.top_index() != 2)
    throw std::invalid_argument("mode_split_report: needs a 3-rung ladder");
  // L = 1/2 (1 + eps^2 w^2) q1^2 - 1/2 w^2 q0^2 - 1/2 eps^2 q2^2 shape
  double eps2 = (-qc.hessian(2, 2)).real();
  double w2 = (-qc.hessian(0, 0)).real();
  double mid = qc.hessian(1, 1).real();
  if (eps2 <= 0.0 || w2 <= 0.0 ||
      std::abs(mid - (1.0 + eps2 * w2)) > 1e-9 * (1.0 + eps2 * w2))
    throw std::invalid_argument(
        "mode_split_report: quartic symbol does not factor as "
        "(s + w^2)(eps^2 s + 1)");

  BoundaryData bc{{{0, Complex(0.0)}}, {{0, Complex(0.0)}}};
  auto sho_slow = make_sho(1.0, 1.0, w2);
  auto sho_fast = make_sho(1.0, eps2, 1.0);

  auto run_mode = [&](const LagrangianSpec& spec) {
    QuadraticForm form = euclidean_quadratic_form(spec, grid, bc);
    std::size_t nu = form.unknown_indices.size();
    std::size_t mid_row = nu / 2;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t d = 0; mid_row + d < nu; ++d)
      pairs.emplace_back(mid_row, mid_row + d);
    return correlator(form, pairs, window);
  };

  SpectralReport slow = run_mode(sho_slow);
  SpectralReport fast = run_mode(sho_fast);
  SpectralReport out = slow;
  out.log_det = slow.log_det + fast.log_det;
  for (double gap : fast.gap_estimates) out.gap_estimates.push_back(gap);
  out.metadata["mode_split"] = 1.0;
  out.metadata["w2"] = w2;
  out.metadata["eps2"] = eps2;
  return out;
}

MarginalizationResult marginalize_auxiliary(const LagrangianSpec& lag,
                                            const UniformGrid& grid,
                                            const BoundaryData& bc,
                                            bool independent_half_field) {
  if (!independent_half_field)
    throw std::runtime_error(
        "marginalize_auxiliary: composed (non-independent) half-order "
        "blocks are unsupported in v1");
  int h = lag.half_index();
  if (h < 0)
    throw std::invalid_argument(
        "marginalize_auxiliary: the ladder has no half-order slot");
  QuadraticCoefficients qc = quadratic_coefficients(lag);
  const int P = lag.top_index() + 1;
  for (int l = 0; l < P; ++l)
    if (l != h && qc.hessian(h, l) != Complex(0.0))
      throw std::invalid_argument(
          "marginalize_auxiliary: the half-order coordinate couples to "
          "other coordinates");
  if (qc.linear(h) != Complex(0.0))
    throw std::invalid_argument(
        "marginalize_auxiliary: the half-order coordinate has a linear "
        "source term");
  // Euclidean weight of the auxiliary block: -i^(1/2+1/2) * H_hh = -i H_hh
  Complex gamma_e = Complex(0.0, -1.0) * qc.hessian(h, h);
  if (!(gamma_e.real() > 0.0) ||
      std::abs(gamma_e.imag()) > 1e-12 * gamma_e.real())
    throw std::invalid_argument(
        "marginalize_auxiliary: auxiliary block is not a positive "
        "Gaussian weight");
  double gamma = gamma_e.real();

  // effective Lagrangian: drop the half slot
  LagrangianSpec reduced;
  reduced.alpha = 1.0;
  for (int l = 0; l < P; ++l)
    if (l != h) reduced.ladder.push_back(lag.ladder[l]);
  reduced.params = lag.params;
  reduced.expr = fold(remap_coords_above(
      subst_coord(lag.expr, h, make_const(Complex(0.0))), h));
  reduced.validate();

  MarginalizationResult out;
  out.effective = euclidean_quadratic_form(reduced, grid, bc);
  out.aux_count = grid.n;
  double dt = grid.dt();
  out.log_c = 0.5 * static_cast<double>(out.aux_count) *
              std::log(2.0 * M_PI / (gamma * dt));

  const auto ne = out.effective.A.rows();
  const auto na = static_cast<Eigen::Index>(out.aux_count);
  out.full = out.effective;
  out.full.A = Eigen::MatrixXcd::Zero(ne + na, ne + na);
  out.full.A.topLeftCorner(ne, ne) = out.effective.A;
  out.full.A.bottomRightCorner(na, na) =
      Complex(gamma * dt) * Eigen::MatrixXcd::Identity(na, na);
  out.full.b = Eigen::VectorXcd::Zero(ne + na);
  out.full.b.head(ne) = out.effective.b;
  for (std::size_t i = 0; i < out.aux_count; ++i)
    out.full.unknown_indices.push_back(i);
  out.full.metadata["aux_count"] = static_cast<double>(out.aux_count);
  out.full.metadata["gamma"] = gamma;
  return out;
}

std::string to_json(const SpectralReport& report) {
  std::string out = "{\"log_det\":" + fmt17(report.log_det);
  out += ",\"grid\":{\"a\":" + fmt17(report.grid.a) +
         ",\"b\":" + fmt17(report.grid.b) +
         ",\"n\":" + std::to_string(report.grid.n) + "}";
  out += ",\"gap_estimates\":[";
  for (std::size_t k = 0; k < report.gap_estimates.size(); ++k) {
    if (k) out += ',';
    out += fmt17(report.gap_estimates[k]);
  }
  out += "],\"correlator\":[";
  for (std::size_t k = 0; k < report.correlator.size(); ++k) {
    if (k) out += ',';
    out += "{\"tau\":" + fmt17(report.correlator[k].first) +
           ",\"re\":" + fmt17(report.correlator[k].second.real()) +
           ",\"im\":" + fmt17(report.correlator[k].second.imag()) + "}";
  }
  out += "],\"metadata\":{";
  bool first = true;
  for (const auto& [key, value] : report.metadata) {
    if (!first) out += ',';
    first = false;
    out += "\"" + key + "\":" + fmt17(value);
  }
  out += "}}";
  return out;
}

void write_correlator_csv(std::ostream& os, const SpectralReport& report) {
  os << "tau,re,im\n";
  for (const auto& [tau, v] : report.correlator)
    os << fmt17(tau) << ',' << fmt17(v.real()) << ',' << fmt17(v.imag())
       << '\n';
}

}  // namespace fracvar

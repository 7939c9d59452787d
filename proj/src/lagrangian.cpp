#include "fracvar/lagrangian.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace fracvar {

namespace {

void collect_params(const ExprPtr& e, std::set<std::string>& names) {
  if (e->kind == NodeKind::Param) names.insert(e->name);
  if (e->lhs) collect_params(e->lhs, names);
  if (e->rhs) collect_params(e->rhs, names);
}

}  // namespace

int LagrangianSpec::half_index() const {
  for (std::size_t l = 0; l < ladder.size(); ++l)
    if (std::abs(ladder[l] - 0.5) < 1e-12) return static_cast<int>(l);
  return -1;
}

void LagrangianSpec::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("LagrangianSpec: alpha must be in (0, 1]");
  if (ladder.size() < 2)
    throw std::invalid_argument("LagrangianSpec: ladder needs >= 2 orders");
  for (std::size_t l = 0; l + 1 < ladder.size(); ++l)
    if (!(ladder[l] < ladder[l + 1]))
      throw std::invalid_argument("LagrangianSpec: ladder must be strictly increasing");
  if (ladder.front() < 0.0)
    throw std::invalid_argument("LagrangianSpec: negative ladder order");
  if (!expr) throw std::invalid_argument("LagrangianSpec: missing expression");
  for (int l = top_index() + 1; l <= top_index() + 4; ++l)
    if (contains_coord(expr, l))
      throw std::invalid_argument("LagrangianSpec: coordinate index beyond ladder");
  std::set<std::string> names;
  collect_params(expr, names);
  for (const auto& name : names)
    if (!params.count(name))
      throw std::invalid_argument("LagrangianSpec: unbound parameter '" + name + "'");
}

LagrangianSpec make_lagrangian(const std::string& text,
                               std::vector<double> ladder, double alpha,
                               std::map<std::string, Complex> params) {
  LagrangianSpec spec;
  spec.alpha = alpha;
  spec.ladder = std::move(ladder);
  spec.params = std::move(params);
  ParseOptions opts;
  opts.max_coord_index = static_cast<int>(spec.ladder.size()) - 1;
  opts.half_index = -1;
  for (std::size_t l = 0; l < spec.ladder.size(); ++l)
    if (std::abs(spec.ladder[l] - 0.5) < 1e-12)
      opts.half_index = static_cast<int>(l);
  spec.expr = parse(text, opts);
  spec.validate();
  return spec;
}

LagrangianSpec make_pu(double alpha, double eps, double w) {
  return make_lagrangian(
      "0.5*(1+eps^2*w^2)*q1^2 - 0.5*w^2*q0^2 - 0.5*eps^2*q2^2",
      {0.0, alpha, 2.0 * alpha}, alpha,
      {{"eps", Complex(eps)}, {"w", Complex(w)}});
}

LagrangianSpec make_damped(double m, double g, double k) {
  return make_lagrangian("0.5*m*q2^2 + i*(g/2)*q1^2 - 0.5*k*q0^2",
                         {0.0, 0.5, 1.0}, 0.5,
                         {{"m", Complex(m)}, {"g", Complex(g)}, {"k", Complex(k)}});
}

LagrangianSpec make_sho(double alpha, double m, double k) {
  return make_lagrangian("0.5*m*q1^2 - 0.5*k*q0^2", {0.0, alpha}, alpha,
                         {{"m", Complex(m)}, {"k", Complex(k)}});
}

}  // namespace fracvar

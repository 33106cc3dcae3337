#include "circbench/linsolve.hpp"

#include <cmath>

#include "circbench/detail/assemble.hpp"
#include "circbench/errors.hpp"

namespace circbench::linsolve {

namespace {

using ir::ConstraintSystem;
using ir::LinearConstraint;
using ir::Relation;

// Square-system checks, then presolve of definitional products.
ir::Presolved prepare(const ConstraintSystem& system) {
  if (!system.disjunctions.empty())
    throw HasDisjunctions("system " + system.name + " has " + std::to_string(system.disjunctions.size()) +
                          " disjunctions; fix a mode first");
  if (!system.parameters.empty()) throw UnsupportedFeature("symbolic parameters need the symbolic solver");
  bool has_products = false;
  for (const auto& c : system.conjuncts) {
    if (c.relation != Relation::EQ)
      throw NotSquare("constraint " + c.label + " is an inequality; only EQ systems are solved here");
    has_products = has_products || !c.products.empty();
  }
  ir::Presolved pre = has_products ? ir::presolve_with_postsolve(system) : ir::Presolved{system, {}};
  for (const auto& c : pre.system.conjuncts)
    if (!c.interval_coeffs.empty())
      throw UnsupportedFeature("interval coefficients in " + c.label + " need the interval solver");
  if (pre.system.conjuncts.size() != pre.system.variables.size())
    throw NotSquare(std::to_string(pre.system.conjuncts.size()) + " equations for " +
                    std::to_string(pre.system.variables.size()) + " unknowns");
  return pre;
}

template <typename T>
std::vector<T> eliminate(const ConstraintSystem& sys) {
  std::vector<const LinearConstraint*> rows;
  rows.reserve(sys.conjuncts.size());
  for (const auto& c : sys.conjuncts) rows.push_back(&c);
  detail::SparseEliminator<T> elim(static_cast<int>(sys.variables.size()),
                                   detail::assemble<T>(rows, sys.variable_index()));
  elim.eliminate();
  if (elim.rank() < static_cast<int>(sys.variables.size())) {
    auto fc = elim.free_columns();
    throw SingularSystem("singular system: no pivot for " + sys.variables[fc.front()] + " (rank " +
                         std::to_string(elim.rank()) + " of " + std::to_string(sys.variables.size()) + ")");
  }
  return elim.back_substitute();
}

template <typename V>
V eval_lhs(const LinearConstraint& c, const std::map<std::string, V>& values) {
  auto value = [&](const std::string& name) -> const V& {
    auto it = values.find(name);
    if (it == values.end()) throw MissingVariable("no value for " + name);
    return it->second;
  };
  V lhs{};
  for (const auto& [name, coef] : c.terms) lhs += detail::convert<V>(coef) * value(name);
  for (const auto& p : c.products) lhs += detail::convert<V>(p.coef) * value(p.first) * value(p.second);
  return lhs;
}

}  // namespace

double Assignment::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw MissingVariable("no value for " + name);
  return it->second;
}

const Scalar& ExactAssignment::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw MissingVariable("no value for " + name);
  return it->second;
}

Assignment ExactAssignment::to_float() const {
  Assignment a;
  for (const auto& [name, v] : values) a.values.emplace(name, to_double(v));
  return a;
}

Assignment solve_f64(const ConstraintSystem& system) {
  ir::Presolved pre = prepare(system);
  std::vector<double> x = eliminate<double>(pre.system);
  Assignment out;
  for (std::size_t k = 0; k < x.size(); ++k) out.values.emplace(pre.system.variables[k], x[k] == 0 ? 0.0 : x[k]);
  ir::postsolve(pre.substitutions, out.values);
  out.residual_norm = residual(system, out.values);
  double scale = residual_scale(system, out.values);
  if (!(out.residual_norm <= 1e-9 * scale))
    throw SingularSystem("residual " + std::to_string(out.residual_norm) + " exceeds tolerance; system is ill-conditioned");
  return out;
}

ExactAssignment solve_exact(const ConstraintSystem& system) {
  ir::Presolved pre = prepare(system);
  std::vector<Scalar> x = eliminate<Scalar>(pre.system);
  ExactAssignment out;
  for (std::size_t k = 0; k < x.size(); ++k) out.values.emplace(pre.system.variables[k], std::move(x[k]));
  ir::postsolve(pre.substitutions, out.values);
  return out;
}

double residual(const ConstraintSystem& system, const std::map<std::string, double>& values) {
  double worst = 0;
  for (const auto& c : system.conjuncts) {
    if (c.relation != Relation::EQ) continue;
    worst = std::max(worst, std::fabs(eval_lhs(c, values) - to_double(c.rhs)));
  }
  return worst;
}

Scalar residual(const ConstraintSystem& system, const std::map<std::string, Scalar>& values) {
  Scalar worst = 0;
  for (const auto& c : system.conjuncts) {
    if (c.relation != Relation::EQ) continue;
    Scalar r = abs(eval_lhs(c, values) - c.rhs);
    if (r > worst) worst = r;
  }
  return worst;
}

double residual_scale(const ConstraintSystem& system, const std::map<std::string, double>& values) {
  double scale = 1;
  for (const auto& c : system.conjuncts) {
    if (c.relation != Relation::EQ) continue;
    scale = std::max(scale, std::fabs(to_double(c.rhs)));
    for (const auto& [name, coef] : c.terms) {
      auto it = values.find(name);
      if (it != values.end()) scale = std::max(scale, std::fabs(to_double(coef) * it->second));
    }
  }
  return scale;
}

}  // namespace circbench::linsolve

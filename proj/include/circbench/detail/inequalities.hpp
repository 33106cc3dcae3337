#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "circbench/detail/assemble.hpp"
#include "circbench/ir.hpp"

namespace circbench::detail {

// Whether `lhs - rhs` satisfies the relation; `scale` sets the float slack.
template <typename T>
bool holds(ir::Relation rel, const T& diff, double scale) {
  if constexpr (std::is_same_v<T, double>) {
    double tol = 1e-9 * scale;
    switch (rel) {
      case ir::Relation::EQ: return std::fabs(diff) <= tol;
      case ir::Relation::LE: return diff <= tol;
      case ir::Relation::GE: return diff >= -tol;
      case ir::Relation::LT: return diff < -tol;
      case ir::Relation::GT: return diff > tol;
    }
  } else {
    (void)scale;
    int s = sgn(diff);
    switch (rel) {
      case ir::Relation::EQ: return s == 0;
      case ir::Relation::LE: return s <= 0;
      case ir::Relation::GE: return s >= 0;
      case ir::Relation::LT: return s < 0;
      case ir::Relation::GT: return s > 0;
    }
  }
  return false;
}

// Labelled renderings of the rows that x does not satisfy.
template <typename T>
std::vector<std::string> violations(const std::vector<const ir::LinearConstraint*>& rows,
                                    const std::unordered_map<std::string, std::size_t>& index,
                                    const std::vector<T>& x) {
  std::vector<std::string> out;
  for (const ir::LinearConstraint* c : rows) {
    T lhs{};
    double scale = std::max(1.0, std::fabs(to_double(c->rhs)));
    for (const auto& [name, coef] : c->terms) {
      T term = detail::convert<T>(coef) * x[index.at(name)];
      lhs += term;
      if constexpr (std::is_same_v<T, double>)
        scale = std::max(scale, std::fabs(term));
      else
        scale = std::max(scale, std::fabs(term.get_d()));
    }
    if (!holds<T>(c->relation, T(lhs - detail::convert<T>(c->rhs)), scale))
      out.push_back(c->label + ": " + ir::to_string(*c));
  }
  return out;
}

}  // namespace circbench::detail

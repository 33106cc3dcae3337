#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "circbench/detail/sparse_elimination.hpp"
#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::detail {

template <typename T>
T convert(const Scalar& v);

template <>
inline double convert<double>(const Scalar& v) {
  return to_double(v);
}

template <>
inline Scalar convert<Scalar>(const Scalar& v) {
  return v;
}

/// Sparse rows for linear constraints over the given variable numbering.
/// Products and interval coefficients must have been removed beforehand.
template <typename T>
std::vector<SparseRow<T>> assemble(const std::vector<const ir::LinearConstraint*>& constraints,
                                   const std::unordered_map<std::string, std::size_t>& index) {
  std::vector<SparseRow<T>> rows;
  rows.reserve(constraints.size());
  for (const ir::LinearConstraint* c : constraints) {
    SparseRow<T> row;
    row.rhs = convert<T>(c->rhs);
    row.entries.reserve(c->terms.size());
    for (const auto& [name, coef] : c->terms) {
      auto it = index.find(name);
      if (it == index.end()) throw MissingVariable("unknown variable " + name + " in " + c->label);
      row.entries.emplace_back(static_cast<int>(it->second), convert<T>(coef));
    }
    std::sort(row.entries.begin(), row.entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace circbench::detail

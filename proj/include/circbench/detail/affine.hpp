#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "circbench/detail/assemble.hpp"
#include "circbench/detail/simplex.hpp"
#include "circbench/ir.hpp"

namespace circbench::detail {

/// Solution set of a set of linear equations written as x = x0 + N t.
/// Other linear constraints can then be restated over the free
/// parameters t.
template <typename T>
class AffineReduction {
 public:
  AffineReduction(const std::vector<std::string>& variables, const std::vector<const ir::LinearConstraint*>& eqs)
      : variables_(variables) {
    for (std::size_t i = 0; i < variables.size(); ++i) index_.emplace(variables[i], i);
    auto rows = assemble<T>(eqs, index_);
    double rhs_scale = 1;
    for (const auto& r : rows) rhs_scale = std::max(rhs_scale, ScalarTraits<T>::magnitude(r.rhs));
    SparseEliminator<T> elim(static_cast<int>(variables.size()), std::move(rows));
    elim.eliminate();
    if constexpr (ScalarTraits<T>::exact)
      consistent_ = elim.consistent_exact();
    else
      consistent_ = elim.inconsistency() <= 1e-9 * rhs_scale;
    auto [x0, basis] = elim.affine();
    x0_ = std::move(x0);
    dim_ = basis.size();
    rows_.assign(variables.size(), {});
    for (std::size_t k = 0; k < dim_; ++k)
      for (auto& [v, value] : basis[k]) rows_[static_cast<std::size_t>(v)].emplace_back(k, std::move(value));
  }

  bool consistent() const { return consistent_; }
  std::size_t dim() const { return dim_; }
  const std::vector<std::string>& variables() const { return variables_; }

  /// The constraint over t. Strict relations map to their closure.
  LpRow<T> map(const ir::LinearConstraint& c) const {
    LpRow<T> row;
    row.coef.assign(dim_, T{});
    row.rhs = convert<T>(c.rhs);
    row.relation = c.relation == ir::Relation::LT ? ir::Relation::LE
                   : c.relation == ir::Relation::GT ? ir::Relation::GE
                                                    : c.relation;
    for (const auto& [name, coef] : c.terms) {
      auto it = index_.find(name);
      if (it == index_.end()) throw MissingVariable("unknown variable " + name + " in " + c.label);
      T a = convert<T>(coef);
      row.rhs -= a * x0_[it->second];
      for (const auto& [k, n] : rows_[it->second]) row.coef[k] += a * n;
    }
    return row;
  }

  std::vector<T> point(const std::vector<T>& t) const {
    std::vector<T> x = x0_;
    for (std::size_t v = 0; v < x.size(); ++v)
      for (const auto& [k, n] : rows_[v])
        if (k < t.size()) x[v] += n * t[k];
    return x;
  }

 private:
  std::vector<std::string> variables_;
  std::unordered_map<std::string, std::size_t> index_;
  bool consistent_ = true;
  std::size_t dim_ = 0;
  std::vector<T> x0_;
  /// Row v of N as sparse (t index, value) pairs.
  std::vector<std::vector<std::pair<std::size_t, T>>> rows_;
};

}  // namespace circbench::detail

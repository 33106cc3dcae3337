#pragma once

#include <cmath>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "circbench/ir.hpp"
#include "circbench/scalar.hpp"

namespace circbench::detail {

template <typename T>
struct LpRow {
  std::vector<T> coef;
  ir::Relation relation = ir::Relation::EQ;  // EQ, LE or GE
  T rhs{};
};

template <typename T>
struct LpProblem {
  std::size_t num_vars = 0;
  std::vector<bool> free_var;  // empty: every variable is free
  std::vector<LpRow<T>> rows;
  std::vector<T> objective;  // empty: feasibility only
  bool maximize = false;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <typename T>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  T value{};
  std::vector<T> x;
  std::size_t pivots = 0;
};

template <typename T>
struct LpTraits;

template <>
struct LpTraits<double> {
  static bool negative(double v) { return v < -1e-9; }
  static bool positive(double v) { return v > 1e-9; }
  static bool zero(double v) { return std::fabs(v) <= 1e-9; }
};

template <>
struct LpTraits<Scalar> {
  static bool negative(const Scalar& v) { return sgn(v) < 0; }
  static bool positive(const Scalar& v) { return sgn(v) > 0; }
  static bool zero(const Scalar& v) { return sgn(v) == 0; }
};

/// Dense two-phase tableau simplex with Bland's rule. Free variables are
/// split into a difference of two nonnegative columns.
template <typename T>
class Simplex {
  using Tr = LpTraits<T>;

 public:
  explicit Simplex(const LpProblem<T>& p) : p_(p) {}

  LpSolution<T> solve() {
    build();
    LpSolution<T> out;
    // phase 1: minimise the sum of artificials
    std::vector<T> phase1(cols_, T{});
    for (std::size_t c = art_begin_; c < cols_; ++c) phase1[c] = T{1};
    if (!optimise(phase1, true, out.pivots)) {
      out.status = LpStatus::Infeasible;  // cannot happen for phase 1
      return out;
    }
    if (Tr::positive(value_)) {
      out.status = LpStatus::Infeasible;
      return out;
    }
    drive_out_artificials(out.pivots);
    std::vector<T> cost(cols_, T{});
    for (std::size_t v = 0; v < p_.num_vars && v < p_.objective.size(); ++v) {
      T c = p_.maximize ? T(-p_.objective[v]) : p_.objective[v];
      cost[pos_[v]] = c;
      if (neg_[v] >= 0) cost[static_cast<std::size_t>(neg_[v])] = -c;
    }
    if (!optimise(cost, false, out.pivots)) {
      out.status = LpStatus::Unbounded;
      return out;
    }
    out.status = LpStatus::Optimal;
    std::vector<T> col_value(cols_, T{});
    for (std::size_t r = 0; r < basis_.size(); ++r) col_value[basis_[r]] = tab_[r][cols_];
    out.x.assign(p_.num_vars, T{});
    out.value = T{};
    for (std::size_t v = 0; v < p_.num_vars; ++v) {
      out.x[v] = col_value[pos_[v]];
      if (neg_[v] >= 0) out.x[v] -= col_value[static_cast<std::size_t>(neg_[v])];
      if (v < p_.objective.size()) out.value += p_.objective[v] * out.x[v];
    }
    return out;
  }

 private:
  void build() {
    const std::size_t n = p_.num_vars;
    pos_.assign(n, 0);
    neg_.assign(n, -1);
    std::size_t col = 0;
    for (std::size_t v = 0; v < n; ++v) {
      pos_[v] = col++;
      bool is_free = p_.free_var.empty() || p_.free_var[v];
      if (is_free) neg_[v] = static_cast<long>(col++);
    }
    struct Norm {
      std::vector<T> coef;
      ir::Relation rel;
      T rhs;
    };
    std::vector<Norm> rows;
    for (const auto& r : p_.rows) {
      Norm nr{r.coef, r.relation, r.rhs};
      nr.coef.resize(n, T{});
      if (nr.rhs < 0) {
        for (auto& c : nr.coef) c = -c;
        nr.rhs = -nr.rhs;
        if (nr.rel == ir::Relation::LE)
          nr.rel = ir::Relation::GE;
        else if (nr.rel == ir::Relation::GE)
          nr.rel = ir::Relation::LE;
      }
      rows.push_back(std::move(nr));
    }
    std::size_t slack_begin = col;
    for (const auto& r : rows)
      if (r.rel != ir::Relation::EQ) ++col;
    art_begin_ = col;
    for (const auto& r : rows)
      if (r.rel != ir::Relation::LE) ++col;
    cols_ = col;

    tab_.assign(rows.size(), std::vector<T>(cols_ + 1, T{}));
    basis_.assign(rows.size(), 0);
    std::size_t slack = slack_begin, art = art_begin_;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto& t = tab_[r];
      for (std::size_t v = 0; v < n; ++v) {
        if (rows[r].coef[v] == 0) continue;
        t[pos_[v]] = rows[r].coef[v];
        if (neg_[v] >= 0) t[static_cast<std::size_t>(neg_[v])] = -rows[r].coef[v];
      }
      t[cols_] = rows[r].rhs;
      switch (rows[r].rel) {
        case ir::Relation::LE:
          t[slack] = T{1};
          basis_[r] = slack++;
          break;
        case ir::Relation::GE:
          t[slack++] = T{-1};
          t[art] = T{1};
          basis_[r] = art++;
          break;
        default:
          t[art] = T{1};
          basis_[r] = art++;
          break;
      }
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    auto& pr = tab_[r];
    T inv = T{1} / pr[c];
    for (auto& v : pr)
      if (v != 0) v *= inv;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (i == r) continue;
      T f = tab_[i][c];
      if (f == 0) continue;
      auto& row = tab_[i];
      for (std::size_t j = 0; j <= cols_; ++j)
        if (pr[j] != 0) row[j] -= f * pr[j];
      if constexpr (std::is_same_v<T, double>) row[c] = 0;
    }
    basis_[r] = c;
  }

  // Minimises cost over the current basis. Returns false when unbounded.
  bool optimise(const std::vector<T>& cost, bool allow_artificial, std::size_t& pivots) {
    const std::size_t limit = allow_artificial ? cols_ : art_begin_;
    for (;;) {
      // reduced cost d_j = c_j - c_B B^-1 a_j, read off the tableau
      std::vector<T> duals_cost(tab_.size());
      for (std::size_t r = 0; r < tab_.size(); ++r) duals_cost[r] = cost[basis_[r]];
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < limit; ++j) {
        T d = cost[j];
        for (std::size_t r = 0; r < tab_.size(); ++r)
          if (tab_[r][j] != 0 && duals_cost[r] != 0) d -= duals_cost[r] * tab_[r][j];
        if (Tr::negative(d)) {
          enter = j;
          break;
        }
      }
      if (enter == cols_) break;
      std::size_t leave = tab_.size();
      T best{};
      for (std::size_t r = 0; r < tab_.size(); ++r) {
        if (!Tr::positive(tab_[r][enter])) continue;
        T ratio = tab_[r][cols_] / tab_[r][enter];
        if (leave == tab_.size() || ratio < best || (ratio == best && basis_[r] < basis_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave == tab_.size()) return false;
      pivot(leave, enter);
      ++pivots;
    }
    value_ = T{};
    for (std::size_t r = 0; r < tab_.size(); ++r) value_ += cost[basis_[r]] * tab_[r][cols_];
    return true;
  }

  void drive_out_artificials(std::size_t& pivots) {
    for (std::size_t r = 0; r < tab_.size();) {
      if (basis_[r] < art_begin_) {
        ++r;
        continue;
      }
      std::size_t c = 0;
      while (c < art_begin_ && Tr::zero(tab_[r][c])) ++c;
      if (c < art_begin_) {
        pivot(r, c);
        ++pivots;
        ++r;
      } else {
        tab_.erase(tab_.begin() + static_cast<long>(r));  // redundant row
        basis_.erase(basis_.begin() + static_cast<long>(r));
      }
    }
  }

  const LpProblem<T>& p_;
  std::vector<std::size_t> pos_;
  std::vector<long> neg_;
  std::size_t art_begin_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::vector<T>> tab_;
  std::vector<std::size_t> basis_;
  T value_{};
};

template <typename T>
LpSolution<T> solve_lp(const LpProblem<T>& problem) {
  return Simplex<T>(problem).solve();
}

}  // namespace circbench::detail

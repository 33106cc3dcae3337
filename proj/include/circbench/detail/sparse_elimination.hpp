#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "circbench/scalar.hpp"

namespace circbench::detail {

template <typename T>
struct SparseRow {
  std::vector<std::pair<int, T>> entries;  // sorted by column, no zeros
  T rhs{};
};

template <typename T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double magnitude(double v) { return std::fabs(v); }
  static constexpr bool exact = false;
};

template <>
struct ScalarTraits<Scalar> {
  static double magnitude(const Scalar& v) { return std::fabs(v.get_d()); }
  static constexpr bool exact = true;
};

/// Column-ordered sparse Gaussian elimination on a possibly rectangular
/// system A x = b. Columns are eliminated in index order, so a banded
/// ordering of the unknowns keeps fill local.
///
/// Float pivoting is partial by magnitude (ties to the lowest row); a
/// pivot below `singular_ratio` times the largest initial entry is treated
/// as zero. Exact pivoting takes the lowest-numbered row with a nonzero.
template <typename T>
class SparseEliminator {
 public:
  SparseEliminator(int num_cols, std::vector<SparseRow<T>> rows, double singular_ratio = 1e-12)
      : num_cols_(num_cols), rows_(std::move(rows)), col_rows_(num_cols), pivot_row_(num_cols, -1) {
    for (int r = 0; r < static_cast<int>(rows_.size()); ++r) {
      for (const auto& [c, v] : rows_[r].entries) {
        col_rows_[c].push_back(r);
        max_entry_ = std::max(max_entry_, ScalarTraits<T>::magnitude(v));
      }
    }
    threshold_ = singular_ratio * max_entry_;
    drop_ = 1e-3 * threshold_;
  }

  /// Forward elimination. Columns without an acceptable pivot stay free.
  void eliminate() {
    std::vector<char> used(rows_.size(), 0);
    for (int c = 0; c < num_cols_; ++c) {
      auto& cand = col_rows_[c];
      std::sort(cand.begin(), cand.end());
      cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
      int best = -1;
      double best_mag = 0;
      std::vector<int> live;
      for (int r : cand) {
        if (used[r]) continue;
        const T* v = find(rows_[r], c);
        if (!v) continue;
        live.push_back(r);
        double mag = ScalarTraits<T>::magnitude(*v);
        if constexpr (ScalarTraits<T>::exact) {
          if (best < 0) best = r;
        } else {
          if (mag > best_mag) {
            best = r;
            best_mag = mag;
          }
        }
      }
      cand.clear();
      if (best < 0) continue;
      if constexpr (!ScalarTraits<T>::exact) {
        if (best_mag < threshold_ || best_mag == 0) {
          // Numerically zero column: clear it so later steps never see it.
          for (int r : live) erase(rows_[r], c);
          continue;
        }
      }
      used[best] = 1;
      pivot_row_[c] = best;
      const SparseRow<T>& p = rows_[best];
      const T pv = *find(p, c);
      for (int r : live) {
        if (r == best) continue;
        T factor = *find(rows_[r], c) / pv;
        axpy(r, factor, p, c);
      }
    }
    for (int r = 0; r < static_cast<int>(rows_.size()); ++r)
      if (!used[r]) leftover_.push_back(r);
  }

  int num_cols() const { return num_cols_; }
  bool is_pivot(int c) const { return pivot_row_[c] >= 0; }
  int rank() const {
    return static_cast<int>(std::count_if(pivot_row_.begin(), pivot_row_.end(), [](int r) { return r >= 0; }));
  }
  std::vector<int> free_columns() const {
    std::vector<int> out;
    for (int c = 0; c < num_cols_; ++c)
      if (pivot_row_[c] < 0) out.push_back(c);
    return out;
  }
  double max_entry() const { return max_entry_; }

  /// Largest |rhs| among rows reduced to 0 = rhs.
  double inconsistency() const {
    double worst = 0;
    for (int r : leftover_) worst = std::max(worst, ScalarTraits<T>::magnitude(rows_[r].rhs));
    return worst;
  }
  bool consistent_exact() const {
    for (int r : leftover_)
      if (rows_[r].rhs != 0) return false;
    return true;
  }
  /// Rows left without a pivot, in original numbering.
  const std::vector<int>& leftover_rows() const { return leftover_; }

  /// Back substitution. `free_values` assigns the free columns in
  /// increasing column order; when `homogeneous` the right-hand side is 0.
  std::vector<T> back_substitute(const std::vector<T>& free_values = {}, bool homogeneous = false) const {
    std::vector<T> x(num_cols_, T{});
    std::size_t k = 0;
    for (int c = 0; c < num_cols_; ++c)
      if (pivot_row_[c] < 0) x[c] = k < free_values.size() ? free_values[k++] : T{};
    for (int c = num_cols_ - 1; c >= 0; --c) {
      int r = pivot_row_[c];
      if (r < 0) continue;
      const SparseRow<T>& row = rows_[r];
      T acc = homogeneous ? T{} : row.rhs;
      T pivot{};
      for (const auto& [col, v] : row.entries) {
        if (col == c)
          pivot = v;
        else
          acc -= v * x[col];
      }
      x[c] = acc / pivot;
    }
    return x;
  }

  /// x = x0 + N t over the free columns t; N is returned column by column
  /// as sparse (variable, value) lists.
  std::pair<std::vector<T>, std::vector<std::vector<std::pair<int, T>>>> affine() const {
    std::vector<T> x0 = back_substitute();
    std::vector<int> fc = free_columns();
    std::vector<std::vector<std::pair<int, T>>> basis;
    basis.reserve(fc.size());
    std::vector<T> e(fc.size(), T{});
    for (std::size_t f = 0; f < fc.size(); ++f) {
      e[f] = T{1};
      std::vector<T> col = back_substitute(e, true);
      e[f] = T{};
      std::vector<std::pair<int, T>> sparse;
      for (std::size_t v = 0; v < col.size(); ++v)
        if (col[v] != 0) sparse.emplace_back(static_cast<int>(v), std::move(col[v]));
      basis.push_back(std::move(sparse));
    }
    return {std::move(x0), std::move(basis)};
  }

 private:
  static const T* find(const SparseRow<T>& row, int c) {
    auto it = std::lower_bound(row.entries.begin(), row.entries.end(), c,
                               [](const std::pair<int, T>& e, int col) { return e.first < col; });
    return it != row.entries.end() && it->first == c ? &it->second : nullptr;
  }

  static void erase(SparseRow<T>& row, int c) {
    auto it = std::lower_bound(row.entries.begin(), row.entries.end(), c,
                               [](const std::pair<int, T>& e, int col) { return e.first < col; });
    if (it != row.entries.end() && it->first == c) row.entries.erase(it);
  }

  bool negligible(const T& v) const {
    if constexpr (ScalarTraits<T>::exact)
      return v == 0;
    else
      return std::fabs(v) <= drop_;
  }

  // rows_[r] -= factor * p, dropping column c entirely.
  void axpy(int r, const T& factor, const SparseRow<T>& p, int c) {
    SparseRow<T>& row = rows_[r];
    std::vector<std::pair<int, T>> merged;
    merged.reserve(row.entries.size() + p.entries.size());
    auto a = row.entries.begin(), ae = row.entries.end();
    auto b = p.entries.begin(), be = p.entries.end();
    while (a != ae || b != be) {
      if (b == be || (a != ae && a->first < b->first)) {
        merged.push_back(std::move(*a));
        ++a;
      } else if (a == ae || b->first < a->first) {
        if (b->first != c) {
          T v = -(factor * b->second);
          if (!negligible(v)) {
            merged.emplace_back(b->first, std::move(v));
            col_rows_[b->first].push_back(r);
          }
        }
        ++b;
      } else {
        if (a->first != c) {
          T v = a->second - factor * b->second;
          if (!negligible(v)) merged.emplace_back(a->first, std::move(v));
        }
        ++a;
        ++b;
      }
    }
    row.entries = std::move(merged);
    row.rhs -= factor * p.rhs;
  }

  int num_cols_;
  std::vector<SparseRow<T>> rows_;
  std::vector<std::vector<int>> col_rows_;
  std::vector<int> pivot_row_;
  std::vector<int> leftover_;
  double max_entry_ = 0;
  double threshold_ = 0;
  double drop_ = 0;
};

}  // namespace circbench::detail

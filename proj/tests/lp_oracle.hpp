#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "circbench/ir.hpp"

namespace lp_oracle {

namespace ir = circbench::ir;
using circbench::from_double;

struct RandomLp {
  int n;
  std::vector<std::vector<double>> a;  // rows a x <= b
  std::vector<double> b;
  std::vector<double> c;
};

// Bounded random LP: a box |x_i| <= 10 plus up to four cuts through a
// region containing the origin.
inline RandomLp random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(2, 8), cuts(1, 4), coef(-9, 9), rhs(1, 20);
  RandomLp lp;
  lp.n = dim(rng);
  for (int i = 0; i < lp.n; ++i) {
    std::vector<double> up(lp.n, 0), down(lp.n, 0);
    up[i] = 1;
    down[i] = -1;
    lp.a.push_back(up);
    lp.b.push_back(10);
    lp.a.push_back(down);
    lp.b.push_back(10);
  }
  for (int k = cuts(rng); k > 0; --k) {
    std::vector<double> row(lp.n);
    for (auto& v : row) v = coef(rng);
    lp.a.push_back(row);
    lp.b.push_back(rhs(rng));
  }
  lp.c.resize(lp.n);
  for (auto& v : lp.c) v = coef(rng);
  return lp;
}

// Minimum of c x over all basic feasible points.
inline double vertex_minimum(const RandomLp& lp) {
  const int m = static_cast<int>(lp.a.size()), n = lp.n;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> pick(n);
  for (int i = 0; i < n; ++i) pick[i] = i;
  for (;;) {
    std::vector<std::vector<double>> mat(n, std::vector<double>(n + 1));
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) mat[r][c] = lp.a[pick[r]][c];
      mat[r][n] = lp.b[pick[r]];
    }
    bool singular = false;
    for (int c = 0; c < n && !singular; ++c) {
      int p = c;
      for (int r = c + 1; r < n; ++r)
        if (std::fabs(mat[r][c]) > std::fabs(mat[p][c])) p = r;
      if (std::fabs(mat[p][c]) < 1e-12) {
        singular = true;
        break;
      }
      std::swap(mat[p], mat[c]);
      for (int r = 0; r < n; ++r) {
        if (r == c) continue;
        double f = mat[r][c] / mat[c][c];
        for (int k = c; k <= n; ++k) mat[r][k] -= f * mat[c][k];
      }
    }
    if (!singular) {
      std::vector<double> x(n);
      for (int c = 0; c < n; ++c) x[c] = mat[c][n] / mat[c][c];
      bool feasible = true;
      for (int r = 0; r < m && feasible; ++r) {
        double lhs = 0;
        for (int c = 0; c < n; ++c) lhs += lp.a[r][c] * x[c];
        feasible = lhs <= lp.b[r] + 1e-9;
      }
      if (feasible) {
        double v = 0;
        for (int c = 0; c < n; ++c) v += lp.c[c] * x[c];
        best = std::min(best, v);
      }
    }
    int i = n - 1;
    while (i >= 0 && pick[i] == m - n + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (int j = i + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

inline ir::ConstraintSystem as_system(const RandomLp& lp) {
  ir::ConstraintSystem s;
  for (int i = 0; i < lp.n; ++i) s.variables.push_back("x" + std::to_string(i));
  for (std::size_t r = 0; r < lp.a.size(); ++r) {
    ir::LinearConstraint c;
    for (int i = 0; i < lp.n; ++i)
      if (lp.a[r][i] != 0) c.add(s.variables[i], from_double(lp.a[r][i]));
    c.relation = ir::Relation::LE;
    c.rhs = from_double(lp.b[r]);
    c.label = "row" + std::to_string(r);
    s.conjuncts.push_back(std::move(c));
  }
  return s;
}

}  // namespace lp_oracle

#include "circbench/interval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "circbench/errors.hpp"
#include "circbench/linsolve.hpp"

namespace circbench::interval {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double x) { return std::nextafter(x, -kInf); }
double up(double x) { return std::nextafter(x, kInf); }

}  // namespace

Interval::Interval(double point) : lo_(point), hi_(point) {}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!(lo <= hi)) throw Error("interval lower bound exceeds upper bound");
}

Interval Interval::from_scalar(const Scalar& v) {
  double d = to_double(v);
  if (from_double(d) == v) return Interval(d);
  return {down(d), up(d)};
}

Interval Interval::hull(const Scalar& lo, const Scalar& hi) {
  return {from_scalar(lo).lo(), from_scalar(hi).hi()};
}

double Interval::mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }

bool Interval::contains(const Scalar& x) const { return from_double(lo_) <= x && x <= from_double(hi_); }

Interval Interval::intersect(const Interval& other) const {
  double lo = std::max(lo_, other.lo_), hi = std::min(hi_, other.hi_);
  if (lo > hi) throw DivergentEnclosure("interval intersection is empty");
  return {lo, hi};
}

Interval Interval::join(const Interval& other) const {
  return {std::min(lo_, other.lo_), std::max(hi_, other.hi_)};
}

Interval& Interval::operator+=(const Interval& o) {
  lo_ = down(lo_ + o.lo_);
  hi_ = up(hi_ + o.hi_);
  return *this;
}

Interval& Interval::operator-=(const Interval& o) {
  double lo = down(lo_ - o.hi_);
  hi_ = up(hi_ - o.lo_);
  lo_ = lo;
  return *this;
}

Interval& Interval::operator*=(const Interval& o) {
  double a = lo_ * o.lo_, b = lo_ * o.hi_, c = hi_ * o.lo_, d = hi_ * o.hi_;
  lo_ = down(std::min({a, b, c, d}));
  hi_ = up(std::max({a, b, c, d}));
  return *this;
}

Interval& Interval::operator/=(const Interval& o) {
  if (o.contains_zero()) throw DivergentEnclosure("division by an interval containing zero");
  double a = lo_ / o.lo_, b = lo_ / o.hi_, c = hi_ / o.lo_, d = hi_ / o.hi_;
  lo_ = down(std::min({a, b, c, d}));
  hi_ = up(std::max({a, b, c, d}));
  return *this;
}

std::ostream& operator<<(std::ostream& out, const Interval& iv) {
  return out << "[" << iv.lo() << ", " << iv.hi() << "]";
}

const Interval& IntervalAssignment::at(const std::string& name) const {
  auto it = values.find(name);
  if (it == values.end()) throw MissingVariable("no enclosure for " + name);
  return it->second;
}

namespace {

using ir::ConstraintSystem;
using ir::Relation;

void check_square_eq(const ConstraintSystem& system) {
  if (!system.disjunctions.empty()) throw HasDisjunctions("interval solving needs a conjunctive system");
  if (!system.parameters.empty()) throw UnsupportedFeature("symbolic parameters need the symbolic solver");
  for (const auto& c : system.conjuncts)
    if (c.relation != Relation::EQ) throw NotSquare("constraint " + c.label + " is an inequality");
}

// Ranges of unknowns fixed by interval definitional equations (c*R = v with
// c an interval); presolve only records their nominal value.
std::map<std::string, Interval> interval_definitions(const ConstraintSystem& system) {
  std::map<std::string, Interval> out;
  for (const auto& c : system.conjuncts) {
    if (c.relation != Relation::EQ || c.terms.size() != 1 || !c.products.empty()) continue;
    const auto& name = c.terms.begin()->first;
    auto iv = c.interval_coeffs.find(name);
    if (iv == c.interval_coeffs.end() || (iv->second.lo <= 0 && iv->second.hi >= 0)) continue;
    Scalar a = c.rhs / iv->second.lo, b = c.rhs / iv->second.hi;
    out.emplace(name, Interval::hull(std::min(a, b), std::max(a, b)));
  }
  return out;
}

struct SparseInterval {
  std::vector<std::vector<std::pair<int, Interval>>> rows;
  std::vector<Interval> rhs;
};

SparseInterval assemble(const ConstraintSystem& sys) {
  auto index = sys.variable_index();
  SparseInterval out;
  for (const auto& c : sys.conjuncts) {
    std::vector<std::pair<int, Interval>> row;
    for (const auto& [name, coef] : c.terms) {
      auto iv = c.interval_coeffs.find(name);
      Interval a = iv == c.interval_coeffs.end() ? Interval::from_scalar(coef)
                                                  : Interval::hull(iv->second.lo, iv->second.hi);
      row.emplace_back(static_cast<int>(index.at(name)), a);
    }
    for (const auto& [name, iv] : c.interval_coeffs)
      if (!c.terms.count(name)) row.emplace_back(static_cast<int>(index.at(name)), Interval::hull(iv.lo, iv.hi));
    out.rows.push_back(std::move(row));
    out.rhs.push_back(Interval::from_scalar(c.rhs));
  }
  return out;
}

// Approximate inverse by LU with partial pivoting; only has to be close.
std::vector<double> inverse(std::vector<double> a, std::size_t m) {
  std::vector<double> inv(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) inv[i * m + i] = 1;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < m; ++i)
      if (std::fabs(a[i * m + k]) > std::fabs(a[p * m + k])) p = i;
    if (a[p * m + k] == 0) throw DivergentEnclosure("midpoint matrix is singular");
    if (p != k) {
      for (std::size_t j = 0; j < m; ++j) {
        std::swap(a[k * m + j], a[p * m + j]);
        std::swap(inv[k * m + j], inv[p * m + j]);
      }
    }
    double d = a[k * m + k];
    for (std::size_t i = 0; i < m; ++i) {
      if (i == k) continue;
      double f = a[i * m + k] / d;
      if (f == 0) continue;
      for (std::size_t j = k; j < m; ++j) a[i * m + j] -= f * a[k * m + j];
      for (std::size_t j = 0; j < m; ++j) inv[i * m + j] -= f * inv[k * m + j];
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    double d = a[i * m + i];
    for (std::size_t j = 0; j < m; ++j) inv[i * m + j] /= d;
  }
  return inv;
}

bool tighten(Interval& xj, const Interval& candidate) {
  Interval next = xj.intersect(candidate);
  if (next.lo() <= xj.lo() && next.hi() >= xj.hi()) return false;
  double shrink = (xj.width() - next.width()) / std::max(1e-300, xj.width());
  xj = next;
  return shrink > 1e-12;
}

// Classic Gauss-Seidel on a dense row-major system: row i updates x_i.
bool gauss_seidel(const std::vector<Interval>& mat, const std::vector<Interval>& rhs, std::vector<Interval>& x) {
  const std::size_t m = x.size();
  bool moved = false;
  for (std::size_t i = 0; i < m; ++i) {
    const Interval& diag = mat[i * m + i];
    if (diag.contains_zero()) continue;
    Interval s = rhs[i];
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) s -= mat[i * m + j] * x[j];
    moved = tighten(x[i], s / diag) || moved;
  }
  return moved;
}

// Contracts x with x_j in (b_i - sum_{l != j} a_il x_l) / a_ij for every
// incidence of a sparse row set. Returns true if some bound moved.
bool contract_rows(const SparseInterval& a, std::vector<Interval>& x) {
  bool moved = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto& row = a.rows[i];
    for (std::size_t t = 0; t < row.size(); ++t) {
      const auto& [j, coef] = row[t];
      if (coef.contains_zero()) continue;
      Interval s = a.rhs[i];
      for (std::size_t u = 0; u < row.size(); ++u)
        if (u != t) s -= row[u].second * x[row[u].first];
      moved = tighten(x[j], s / coef) || moved;
    }
  }
  return moved;
}

}  // namespace

IntervalAssignment solve_interval(const ConstraintSystem& system, const IntervalOptions& options) {
  check_square_eq(system);
  std::map<std::string, Interval> defined = interval_definitions(system);
  ir::Presolved pre = ir::presolve_with_postsolve(system, {.eliminate_pairs = true});
  const ConstraintSystem& sys = pre.system;
  const std::size_t m = sys.variables.size();
  if (sys.conjuncts.size() != m)
    throw NotSquare(std::to_string(sys.conjuncts.size()) + " equations for " + std::to_string(m) + " unknowns");
  if (m > options.max_dimension)
    throw SizeCap("interval core has " + std::to_string(m) + " unknowns, above the limit of " +
                  std::to_string(options.max_dimension));

  SparseInterval a = assemble(sys);
  std::vector<Interval> x(m);
  if (m > 0) {
    std::vector<double> mid(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (const auto& [j, coef] : a.rows[i]) mid[i * m + j] = coef.mid();
    std::vector<double> c = inverse(std::move(mid), m);

    // M = C A and r = C b with outward rounding.
    std::vector<Interval> mat(m * m, Interval(0.0));
    std::vector<Interval> r(m, Interval(0.0));
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t i = 0; i < m; ++i) {
        double cik = c[i * m + k];
        if (cik == 0) continue;
        Interval ci(cik);
        for (const auto& [j, coef] : a.rows[k]) mat[i * m + j] += ci * coef;
        r[i] += ci * a.rhs[k];
      }
    }
    const std::vector<Interval> pre_mat = mat;
    const std::vector<Interval> pre_rhs = r;

    // Interval Gaussian elimination with pivoting on the smallest |.|.
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t p = k;
      auto mig = [](const Interval& v) { return v.contains_zero() ? 0.0 : std::min(std::fabs(v.lo()), std::fabs(v.hi())); };
      for (std::size_t i = k + 1; i < m; ++i)
        if (mig(mat[i * m + k]) > mig(mat[p * m + k])) p = i;
      if (mat[p * m + k].contains_zero())
        throw DivergentEnclosure("pivot interval for " + sys.variables[k] + " contains zero");
      if (p != k) {
        for (std::size_t j = 0; j < m; ++j) std::swap(mat[k * m + j], mat[p * m + j]);
        std::swap(r[k], r[p]);
      }
      const Interval piv = mat[k * m + k];
      for (std::size_t i = k + 1; i < m; ++i) {
        Interval& lead = mat[i * m + k];
        if (lead == Interval(0.0)) continue;
        Interval f = lead / piv;
        for (std::size_t j = k + 1; j < m; ++j) mat[i * m + j] -= f * mat[k * m + j];
        r[i] -= f * r[k];
        lead = Interval(0.0);
      }
    }
    for (std::size_t k = m; k-- > 0;) {
      Interval s = r[k];
      for (std::size_t j = k + 1; j < m; ++j) s -= mat[k * m + j] * x[j];
      x[k] = s / mat[k * m + k];
    }

    // Gauss-Seidel on the preconditioned rows, then on the original rows.
    for (int sweep = 0; sweep < options.refinement_sweeps; ++sweep) {
      bool moved = gauss_seidel(pre_mat, pre_rhs, x);
      moved = contract_rows(a, x) || moved;
      if (!moved) break;
    }
  }

  IntervalAssignment out;
  for (std::size_t j = 0; j < m; ++j) out.values.emplace(sys.variables[j], x[j]);
  for (auto it = pre.substitutions.rbegin(); it != pre.substitutions.rend(); ++it) {
    Interval v = Interval::from_scalar(it->offset);
    if (!it->other.empty()) v += Interval::from_scalar(it->scale) * out.values.at(it->other);
    out.values[it->variable] = v;
  }
  for (const auto& [name, range] : defined) out.values[name] = range;
  return out;
}

IntervalAssignment solve_interval_vertices(const ConstraintSystem& system) {
  check_square_eq(system);
  std::map<std::string, Interval> defined = interval_definitions(system);
  ir::Presolved pre = ir::presolve_with_postsolve(system, {.eliminate_pairs = true});

  std::vector<std::pair<std::size_t, std::string>> entries;
  for (std::size_t k = 0; k < pre.system.conjuncts.size(); ++k)
    for (const auto& [name, iv] : pre.system.conjuncts[k].interval_coeffs) entries.emplace_back(k, name);
  if (entries.size() > 12)
    throw SizeCap("vertex enumeration is limited to 12 interval coefficients, found " +
                  std::to_string(entries.size()));

  std::map<std::string, ExactRange> range;
  for (std::size_t mask = 0; mask < (std::size_t{1} << entries.size()); ++mask) {
    ConstraintSystem vertex = pre.system;
    for (auto& c : vertex.conjuncts) c.interval_coeffs.clear();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto& [k, name] = entries[e];
      const ir::CoeffInterval& iv = pre.system.conjuncts[k].interval_coeffs.at(name);
      const Scalar& value = (mask >> e) & 1 ? iv.hi : iv.lo;
      auto& terms = vertex.conjuncts[k].terms;
      if (value == 0)
        terms.erase(name);
      else
        terms[name] = value;
    }
    linsolve::ExactAssignment sol = linsolve::solve_exact(vertex);
    ir::postsolve(pre.substitutions, sol.values);
    for (const auto& [name, v] : sol.values) {
      auto [it, inserted] = range.try_emplace(name, ExactRange{v, v});
      if (!inserted) {
        if (v < it->second.lo) it->second.lo = v;
        if (v > it->second.hi) it->second.hi = v;
      }
    }
  }

  IntervalAssignment out;
  for (const auto& [name, r] : range) out.values.emplace(name, Interval::hull(r.lo, r.hi));
  for (const auto& [name, r] : defined) out.values[name] = r;
  return out;
}

}  // namespace circbench::interval

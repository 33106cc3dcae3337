#include "circbench/modes.hpp"

#include <algorithm>
#include <memory>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "circbench/detail/affine.hpp"
#include "circbench/detail/hull.hpp"
#include "circbench/detail/inequalities.hpp"
#include "circbench/errors.hpp"

namespace circbench::detail {

std::vector<ir::LinearConstraint> hull_rows(const ir::Disjunction& d) {
  using ir::LinearConstraint;
  using ir::Relation;
  struct Bounds {
    std::optional<Scalar> lo, hi;
  };
  using Form = std::map<std::string, Scalar>;
  std::vector<std::map<Form, Bounds>> per_branch;
  for (const auto& branch : d.branches) {
    std::map<Form, Bounds> forms;
    for (const auto& c : branch) {
      if (c.terms.empty() || !c.products.empty()) continue;
      Scalar lead = c.terms.begin()->second;
      Form f;
      for (const auto& [name, coef] : c.terms) f.emplace(name, coef / lead);
      Scalar r = c.rhs / lead;
      Relation rel = c.relation;
      if (sgn(lead) < 0) {
        if (rel == Relation::LE || rel == Relation::LT)
          rel = rel == Relation::LE ? Relation::GE : Relation::GT;
        else if (rel == Relation::GE || rel == Relation::GT)
          rel = rel == Relation::GE ? Relation::LE : Relation::LT;
      }
      Bounds& b = forms[f];
      if (rel == Relation::EQ || rel == Relation::GE || rel == Relation::GT)
        if (!b.lo || r > *b.lo) b.lo = r;
      if (rel == Relation::EQ || rel == Relation::LE || rel == Relation::LT)
        if (!b.hi || r < *b.hi) b.hi = r;
    }
    per_branch.push_back(std::move(forms));
  }
  std::vector<LinearConstraint> out;
  if (per_branch.empty()) return out;
  for (const auto& [form, first] : per_branch.front()) {
    std::optional<Scalar> lo = first.lo, hi = first.hi;
    for (std::size_t b = 1; b < per_branch.size(); ++b) {
      auto it = per_branch[b].find(form);
      if (it == per_branch[b].end()) {
        lo.reset();
        hi.reset();
        break;
      }
      if (lo && it->second.lo)
        lo = std::min(*lo, *it->second.lo);
      else
        lo.reset();
      if (hi && it->second.hi)
        hi = std::max(*hi, *it->second.hi);
      else
        hi.reset();
    }
    auto emit = [&](Relation rel, const Scalar& rhs) {
      LinearConstraint c;
      c.terms = form;
      c.relation = rel;
      c.rhs = rhs;
      c.label = d.label + "/hull";
      out.push_back(std::move(c));
    };
    if (lo && hi && *lo == *hi) {
      emit(Relation::EQ, *lo);
    } else {
      if (lo) emit(Relation::GE, *lo);
      if (hi) emit(Relation::LE, *hi);
    }
  }
  return out;
}

}  // namespace circbench::detail

namespace circbench::modes {

namespace {

using detail::AffineReduction;
using detail::holds;
using detail::hull_rows;
using detail::violations;
using detail::LpRow;
using ir::ConstraintSystem;
using ir::LinearConstraint;
using ir::Relation;

bool has_products(const ConstraintSystem& s) {
  auto any = [](const LinearConstraint& c) { return !c.products.empty(); };
  if (std::any_of(s.conjuncts.begin(), s.conjuncts.end(), any)) return true;
  for (const auto& d : s.disjunctions)
    for (const auto& b : d.branches)
      if (std::any_of(b.begin(), b.end(), any)) return true;
  return false;
}

void reject_unsupported(const ConstraintSystem& s) {
  if (!s.parameters.empty()) throw UnsupportedFeature("symbolic parameters need the symbolic solver");
  auto check = [](const LinearConstraint& c) {
    if (!c.interval_coeffs.empty())
      throw UnsupportedFeature("interval coefficients in " + c.label + " need the interval solver");
  };
  for (const auto& c : s.conjuncts) check(c);
  for (const auto& d : s.disjunctions)
    for (const auto& b : d.branches)
      for (const auto& c : b) check(c);
}

ir::Presolved prepare(const ConstraintSystem& system) {
  ir::Presolved pre = has_products(system) ? ir::presolve_with_postsolve(system) : ir::Presolved{system, {}};
  reject_unsupported(pre.system);
  return pre;
}

bool use_exact(const ConstraintSystem& s, const CheckOptions& o) {
  if (o.backend == Backend::Exact) return true;
  if (o.backend == Backend::Float) return false;
  return s.variables.size() <= o.exact_limit;
}

template <typename T>
bool is_zero(const T& v) {
  if constexpr (std::is_same_v<T, double>)
    return std::fabs(v) <= 1e-10;
  else
    return sgn(v) == 0;
}

template <typename T>
Feasibility check_impl(const ConstraintSystem& original, const ir::Presolved& pre) {
  const ConstraintSystem& sys = pre.system;
  std::vector<const LinearConstraint*> eqs, ineqs;
  for (const auto& c : sys.conjuncts) (c.relation == Relation::EQ ? eqs : ineqs).push_back(&c);

  Feasibility out;
  AffineReduction<T> red(sys.variables, eqs);
  if (!red.consistent()) {
    out.kind = Feasibility::Kind::InfeasibleEquality;
    return out;
  }
  std::vector<T> t;
  if (red.dim() > 0) {
    out.underdetermined = true;
    // maximise a common margin s on the strict rows, 0 <= s <= 1
    detail::LpProblem<T> lp;
    lp.num_vars = red.dim() + 1;
    lp.free_var.assign(lp.num_vars, true);
    lp.free_var.back() = false;
    bool strict = false;
    for (const LinearConstraint* c : ineqs) {
      LpRow<T> row = red.map(*c);
      row.coef.push_back(T{});
      if (c->relation == Relation::LT) row.coef.back() = T{1};
      if (c->relation == Relation::GT) row.coef.back() = T{-1};
      strict = strict || ir::is_strict(c->relation);
      lp.rows.push_back(std::move(row));
    }
    LpRow<T> cap;
    cap.coef.assign(lp.num_vars, T{});
    cap.coef.back() = T{1};
    cap.relation = Relation::LE;
    cap.rhs = T{1};
    lp.rows.push_back(std::move(cap));
    lp.objective.assign(lp.num_vars, T{});
    lp.objective.back() = T{1};
    lp.maximize = true;
    auto sol = detail::solve_lp(lp);
    bool ok = sol.status == detail::LpStatus::Optimal;
    if (ok && strict) {
      if constexpr (std::is_same_v<T, double>)
        ok = sol.value > 1e-9;
      else
        ok = sgn(sol.value) > 0;
    }
    if (!ok) {
      out.kind = Feasibility::Kind::InfeasibleInequality;
      out.violated.push_back("no point satisfies the inequalities over the solution set of the equations");
      return out;
    }
    t.assign(sol.x.begin(), sol.x.end() - 1);
  }
  std::vector<T> x = red.point(t);
  auto index = sys.variable_index();
  out.violated = violations<T>(ineqs, index, x);
  if (!out.violated.empty()) {
    out.kind = Feasibility::Kind::InfeasibleInequality;
    return out;
  }
  out.kind = Feasibility::Kind::Feasible;
  if constexpr (std::is_same_v<T, double>) {
    std::map<std::string, double> values;
    for (std::size_t v = 0; v < x.size(); ++v) values.emplace(sys.variables[v], x[v]);
    ir::postsolve(pre.substitutions, values);
    out.assignment.values = std::move(values);
  } else {
    linsolve::ExactAssignment exact;
    for (std::size_t v = 0; v < x.size(); ++v) exact.values.emplace(sys.variables[v], x[v]);
    ir::postsolve(pre.substitutions, exact.values);
    out.assignment = exact.to_float();
    out.exact = std::move(exact);
  }
  out.assignment.residual_norm = linsolve::residual(original, out.assignment.values);
  return out;
}

bool same_solution(const FeasibleLeaf& a, const FeasibleLeaf& b) {
  if (a.exact && b.exact) return a.exact->values == b.exact->values;
  if (a.assignment.values.size() != b.assignment.values.size()) return false;
  for (const auto& [name, v] : a.assignment.values) {
    auto it = b.assignment.values.find(name);
    if (it == b.assignment.values.end()) return false;
    if (std::fabs(v - it->second) > 1e-9 * std::max(1.0, std::fabs(v))) return false;
  }
  return true;
}

std::vector<std::size_t> decode(const ConstraintSystem& s, unsigned long long k) {
  std::vector<std::size_t> choice(s.disjunctions.size(), 0);
  for (std::size_t d = s.disjunctions.size(); d-- > 0;) {
    std::size_t base = s.disjunctions[d].branches.size();
    choice[d] = static_cast<std::size_t>(k % base);
    k /= base;
  }
  return choice;
}

template <typename T>
class Searcher {
 public:
  Searcher(const ConstraintSystem& original, const ConstraintSystem& base, const Strategy& strategy,
           const SearchOptions& options)
      : original_(original), base_(base), strategy_(strategy), options_(options), red_(base.variables, equations(base)) {
    for (const auto& c : base.conjuncts)
      if (c.relation != Relation::EQ) root_.ineqs.push_back(std::make_shared<const Row>(row(c)));
    for (const auto& d : base.disjunctions) {
      std::vector<std::vector<Row>> rows;
      for (const auto& b : d.branches) {
        std::vector<Row> br;
        for (const auto& c : b) br.push_back(row(c));
        rows.push_back(std::move(br));
      }
      branch_rows_.push_back(std::move(rows));
      for (const auto& h : hull_rows(d)) hull_.push_back(row(h));
    }
  }

  std::optional<SearchResult> run() {
    if (!red_.consistent()) return std::nullopt;
    State s = root_;
    bool ok = true;
    for (const Row& h : hull_) ok = ok && add(s, h);
    if (!ok) {
      ++stats_.branches_explored;
      ++stats_.branches_pruned;
      return std::nullopt;
    }
    choice_.assign(base_.disjunctions.size(), 0);
    return dfs(0, s);
  }

  const SearchStats& stats() const { return stats_; }

 private:
  // Sparse row over t, entries sorted by index.
  struct Row {
    std::vector<std::pair<std::size_t, T>> coef;
    Relation rel;
    T rhs;
  };
  // Rows are shared between DFS levels and copied only when modified.
  using RowPtr = std::shared_ptr<const Row>;
  struct Pivot {
    std::size_t col;
    RowPtr row;  // coefficient 1 at col
  };
  struct State {
    std::vector<Pivot> pivots;
    std::vector<RowPtr> ineqs;
  };

  static std::vector<const LinearConstraint*> equations(const ConstraintSystem& s) {
    std::vector<const LinearConstraint*> out;
    for (const auto& c : s.conjuncts)
      if (c.relation == Relation::EQ) out.push_back(&c);
    return out;
  }

  Row row(const LinearConstraint& c) const {
    LpRow<T> r = red_.map(c);
    Row out{{}, c.relation, std::move(r.rhs)};
    for (std::size_t k = 0; k < r.coef.size(); ++k)
      if (!is_zero(r.coef[k])) out.coef.emplace_back(k, std::move(r.coef[k]));
    return out;
  }

  static const T* find(const Row& r, std::size_t col) {
    auto it = std::lower_bound(r.coef.begin(), r.coef.end(), col,
                               [](const std::pair<std::size_t, T>& e, std::size_t c) { return e.first < c; });
    return it != r.coef.end() && it->first == col ? &it->second : nullptr;
  }

  // r -= f * p; entries that cancel are dropped.
  static void axpy(Row& r, const T& f, const Row& p) {
    std::vector<std::pair<std::size_t, T>> merged;
    merged.reserve(r.coef.size() + p.coef.size());
    auto a = r.coef.begin(), ae = r.coef.end();
    auto b = p.coef.begin(), be = p.coef.end();
    while (a != ae || b != be) {
      if (b == be || (a != ae && a->first < b->first)) {
        merged.push_back(std::move(*a++));
      } else if (a == ae || b->first < a->first) {
        T v = -(f * b->second);
        if (!is_zero(v)) merged.emplace_back(b->first, std::move(v));
        ++b;
      } else {
        T v = a->second - f * b->second;
        if (!is_zero(v)) merged.emplace_back(a->first, std::move(v));
        ++a;
        ++b;
      }
    }
    r.coef = std::move(merged);
    r.rhs -= f * p.rhs;
  }

  static void eliminate(Row& r, const Pivot& p) {
    const T* f = find(r, p.col);
    if (f == nullptr) return;
    T factor = *f;
    axpy(r, factor, *p.row);  // the pivot entry is 1, so column p.col cancels exactly
  }

  static bool constant(const Row& r) { return r.coef.empty(); }

  // 0 <rel> rhs
  static bool constant_holds(const Row& r) {
    double scale = 1;
    if constexpr (std::is_same_v<T, double>) scale = std::max(1.0, std::fabs(r.rhs));
    return holds<T>(r.rel, T(-r.rhs), scale);
  }

  // Adds a row to the state; false when it exposes a contradiction.
  bool add(State& s, Row r) {
    for (const Pivot& p : s.pivots) eliminate(r, p);
    if (constant(r)) return constant_holds(r);
    if (r.rel != Relation::EQ) {
      s.ineqs.push_back(std::make_shared<const Row>(std::move(r)));
      return true;
    }
    std::size_t pick = 0;
    if constexpr (std::is_same_v<T, double>) {
      for (std::size_t k = 1; k < r.coef.size(); ++k)
        if (std::fabs(r.coef[k].second) > std::fabs(r.coef[pick].second)) pick = k;
    }
    const std::size_t col = r.coef[pick].first;
    T inv = T{1} / r.coef[pick].second;
    for (auto& [k, v] : r.coef) v *= inv;
    r.coef[pick].second = T{1};
    r.rhs *= inv;
    Pivot pivot{col, std::make_shared<const Row>(std::move(r))};
    for (Pivot& p : s.pivots) {
      if (find(*p.row, col) == nullptr) continue;
      auto copy = std::make_shared<Row>(*p.row);
      eliminate(*copy, pivot);
      p.row = std::move(copy);
    }
    std::vector<RowPtr> kept;
    kept.reserve(s.ineqs.size());
    for (RowPtr& q : s.ineqs) {
      if (find(*q, col) != nullptr) {
        auto copy = std::make_shared<Row>(*q);
        eliminate(*copy, pivot);
        if (constant(*copy)) {
          if (!constant_holds(*copy)) return false;
          continue;
        }
        q = std::move(copy);
      }
      kept.push_back(std::move(q));
    }
    s.ineqs = std::move(kept);
    s.pivots.push_back(std::move(pivot));
    return true;
  }

  std::optional<SearchResult> dfs(std::size_t depth, const State& state) {
    if (depth == base_.disjunctions.size()) return leaf();
    for (std::size_t b : strategy_.order(base_.disjunctions[depth])) {
      choice_[depth] = b;
      State next = state;
      bool ok = true;
      for (const Row& r : branch_rows_[depth][b]) {
        ok = add(next, r);
        if (!ok) break;
      }
      if (depth + 1 < base_.disjunctions.size()) ++stats_.nodes_visited;
      if (!ok) {
        ++stats_.branches_explored;
        ++stats_.branches_pruned;
        continue;
      }
      if (auto found = dfs(depth + 1, next)) return found;
    }
    return std::nullopt;
  }

  std::optional<SearchResult> leaf() {
    ++stats_.branches_explored;
    ++stats_.solves_performed;
    ModeAssignment mode = ir::make_mode(original_, choice_);
    Feasibility f = check_branch(original_, mode, options_.check);
    if (!f.feasible()) return std::nullopt;
    return SearchResult{std::move(mode), std::move(f.assignment), std::move(f.exact), {}};
  }

  const ConstraintSystem& original_;
  const ConstraintSystem& base_;
  const Strategy& strategy_;
  const SearchOptions& options_;
  AffineReduction<T> red_;
  State root_;
  std::vector<std::vector<std::vector<Row>>> branch_rows_;
  std::vector<Row> hull_;
  std::vector<std::size_t> choice_;
  SearchStats stats_;
};

template <typename T>
SearchResult search_impl(const ConstraintSystem& system, const ConstraintSystem& base, const Strategy& strategy,
                         const SearchOptions& options) {
  Searcher<T> searcher(system, base, strategy, options);
  auto found = searcher.run();
  if (!found)
    throw Unsatisfiable("no feasible mode for " + (system.name.empty() ? std::string("system") : system.name) +
                        " (" + std::to_string(searcher.stats().branches_explored) + " branches explored)");
  found->stats = searcher.stats();
  return std::move(*found);
}

}  // namespace

SearchStats& SearchStats::operator+=(const SearchStats& other) {
  branches_explored += other.branches_explored;
  branches_pruned += other.branches_pruned;
  solves_performed += other.solves_performed;
  nodes_visited += other.nodes_visited;
  wall_time += other.wall_time;
  return *this;
}

Feasibility check_conjunctive(const ConstraintSystem& system, const CheckOptions& options) {
  if (!system.disjunctions.empty())
    throw HasDisjunctions("system " + system.name + " has disjunctions; use check_branch");
  ir::Presolved pre = prepare(system);
  return use_exact(pre.system, options) ? check_impl<Scalar>(system, pre) : check_impl<double>(system, pre);
}

Feasibility check_branch(const ConstraintSystem& system, const ModeAssignment& mode, const CheckOptions& options) {
  if (mode.size() != system.disjunctions.size())
    throw DimensionMismatch("mode assigns " + std::to_string(mode.size()) + " of " +
                            std::to_string(system.disjunctions.size()) + " disjunctions");
  for (std::size_t d = 0; d < mode.size(); ++d) {
    if (mode[d].label != system.disjunctions[d].label || mode[d].branch >= system.disjunctions[d].branches.size())
      throw DimensionMismatch("mode entry " + mode[d].label + " does not match disjunction " +
                              system.disjunctions[d].label);
  }
  return check_conjunctive(ir::instantiate(system, mode), options);
}

std::vector<FeasibleLeaf> enumerate_feasible(const ConstraintSystem& system, const EnumerateOptions& options) {
  const unsigned long long count = ir::branches(system).size();
  if (count > options.cap)
    throw ExplosionGuard((count == std::numeric_limits<unsigned long long>::max() ? std::string("more than 2^64")
                                                                                  : std::to_string(count)) +
                             " branches exceed the enumeration cap of " + std::to_string(options.cap) +
                             "; search_first (the modes command) finds one mode without enumerating",
                         count);
  std::vector<std::optional<FeasibleLeaf>> found(count);
  auto work = [&](unsigned long long begin, unsigned long long end) {
    for (unsigned long long k = begin; k < end; ++k) {
      ModeAssignment mode = ir::make_mode(system, decode(system, k));
      Feasibility f = check_branch(system, mode, options.check);
      if (f.feasible()) found[k] = FeasibleLeaf{std::move(mode), std::move(f.assignment), std::move(f.exact)};
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    unsigned long long chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      unsigned long long b = t * chunk, e = std::min(count, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  std::vector<FeasibleLeaf> out;
  for (auto& leaf : found) {
    if (!leaf) continue;
    bool dup = std::any_of(out.begin(), out.end(), [&](const FeasibleLeaf& o) { return same_solution(o, *leaf); });
    if (!dup) out.push_back(std::move(*leaf));
  }
  return out;
}

Strategy Strategy::standard() {
  Strategy s;
  s.name = "standard";
  s.preferred = {{"D1", "Blocking"}, {"D4", "Conducting"}};
  return s;
}

Strategy Strategy::declaration() {
  Strategy s;
  s.name = "declaration";
  return s;
}

Strategy Strategy::pessimal() {
  Strategy s = standard();
  s.name = "pessimal";
  s.reverse = true;
  return s;
}

std::vector<std::size_t> Strategy::order(const ir::Disjunction& d) const {
  auto tag_index = [&](const std::string& tag) -> std::optional<std::size_t> {
    for (std::size_t b = 0; b < d.branch_tags.size(); ++b)
      if (d.branch_tags[b] == tag) return b;
    return std::nullopt;
  };
  if (auto pin = pins.find(d.label); pin != pins.end()) {
    auto b = tag_index(pin->second);
    if (!b) throw InvalidSpec("pin " + d.label + "=" + pin->second + " names no branch of " + d.label);
    return {*b};
  }
  std::vector<std::size_t> out(d.branches.size());
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = b;
  auto pref = preferred.find(d.label.substr(0, d.label.find('_')));
  if (pref != preferred.end()) {
    if (auto b = tag_index(pref->second)) std::rotate(out.begin(), out.begin() + static_cast<long>(*b), out.begin() + static_cast<long>(*b) + 1);
  }
  if (reverse) std::reverse(out.begin(), out.end());
  return out;
}

SearchResult search_first(const ConstraintSystem& system, const Strategy& strategy, const SearchOptions& options) {
  auto start = std::chrono::steady_clock::now();
  ir::Presolved pre = prepare(system);
  SearchResult result = use_exact(pre.system, options.check)
                            ? search_impl<Scalar>(system, pre.system, strategy, options)
                            : search_impl<double>(system, pre.system, strategy, options);
  result.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

IntervalBranch solve_branch_interval(const ConstraintSystem& system, const ModeAssignment& mode,
                                     const interval::IntervalOptions& options) {
  using interval::Interval;
  ConstraintSystem inst = ir::instantiate(system, mode);
  std::vector<ir::LinearConstraint> inequalities;
  std::vector<ir::LinearConstraint> equations;
  for (auto& c : inst.conjuncts) (c.relation == ir::Relation::EQ ? equations : inequalities).push_back(std::move(c));
  inst.conjuncts = std::move(equations);

  IntervalBranch out;
  out.enclosure = interval::solve_interval(inst, options);
  for (const auto& c : inequalities) {
    Interval lhs(0);
    for (const auto& [name, coef] : c.terms) {
      auto iv = c.interval_coeffs.find(name);
      Interval a = iv == c.interval_coeffs.end() ? Interval::from_scalar(coef) : Interval::hull(iv->second.lo, iv->second.hi);
      lhs += a * out.enclosure.at(name);
    }
    for (const auto& p : c.products)
      lhs += Interval::from_scalar(p.coef) * out.enclosure.at(p.first) * out.enclosure.at(p.second);
    Interval rhs = Interval::from_scalar(c.rhs);
    bool holds = false;
    switch (c.relation) {
      case ir::Relation::GE: holds = lhs.lo() >= rhs.hi(); break;
      case ir::Relation::GT: holds = lhs.lo() > rhs.hi(); break;
      case ir::Relation::LE: holds = lhs.hi() <= rhs.lo(); break;
      case ir::Relation::LT: holds = lhs.hi() < rhs.lo(); break;
      case ir::Relation::EQ: holds = true; break;
    }
    if (!holds) out.uncertain.push_back(ir::to_string(c) + " [" + c.label + "]");
  }
  return out;
}

}  // namespace circbench::modes

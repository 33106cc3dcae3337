#include "circbench/opt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "circbench/detail/affine.hpp"
#include "circbench/detail/hull.hpp"
#include "circbench/detail/inequalities.hpp"
#include "circbench/errors.hpp"
#include "circbench/interval.hpp"

namespace circbench::opt {

namespace {

using detail::AffineReduction;
using detail::LpRow;
using ir::ConstraintSystem;
using ir::LinearConstraint;
using ir::Relation;

template <typename F>
void for_each_constraint(const ConstraintSystem& s, F&& f) {
  for (const auto& c : s.conjuncts) f(c);
  for (const auto& d : s.disjunctions)
    for (const auto& b : d.branches)
      for (const auto& c : b) f(c);
}

bool has_products(const ConstraintSystem& s) {
  bool any = false;
  for_each_constraint(s, [&](const LinearConstraint& c) { any = any || !c.products.empty(); });
  return any;
}

void check_objective(const ConstraintSystem& s, const ir::Objective& objective) {
  for (const auto& [name, coef] : objective.terms)
    if (!s.has_variable(name)) throw MissingVariable("objective refers to unknown variable " + name);
}

void reject_features(const ConstraintSystem& s) {
  if (!s.parameters.empty()) throw UnsupportedFeature("symbolic parameters need the symbolic solver");
  for_each_constraint(s, [](const LinearConstraint& c) {
    if (!c.interval_coeffs.empty())
      throw UnsupportedFeature("interval coefficients in " + c.label + "; use optimize_interval");
  });
}

// The system with the objective attached, presolved so that both lose the
// definitional unknowns together.
ir::Presolved prepare(const ConstraintSystem& system, const ir::Objective& objective) {
  check_objective(system, objective);
  ConstraintSystem s = system;
  s.objective = objective;
  ir::Presolved pre = has_products(s) ? ir::presolve_with_postsolve(s) : ir::Presolved{std::move(s), {}};
  reject_features(pre.system);
  return pre;
}

bool use_exact(const ConstraintSystem& s, const modes::CheckOptions& o) {
  if (o.backend == modes::Backend::Exact) return true;
  if (o.backend == modes::Backend::Float) return false;
  return s.variables.size() <= o.exact_limit;
}

LinearConstraint objective_form(const ir::Objective& o) {
  LinearConstraint c;
  c.terms = o.terms;
  c.label = "objective";
  return c;
}

template <typename T>
double as_double(const T& v) {
  if constexpr (std::is_same_v<T, double>)
    return v;
  else
    return to_double(v);
}

template <typename T>
bool better(const T& candidate, const T& incumbent, ir::Sense sense) {
  return sense == ir::Sense::Minimize ? candidate < incumbent : candidate > incumbent;
}

// Optimum of a conjunctive, product-free system. With `allow_strict` the
// strict relations are relaxed to their closure and checked on the optimal
// point afterwards.
template <typename T>
OptResult solve_conjunctive(const ir::Presolved& pre, bool allow_strict) {
  const ConstraintSystem& sys = pre.system;
  const ir::Objective& objective = *sys.objective;
  std::vector<const LinearConstraint*> eqs, ineqs;
  for (const auto& c : sys.conjuncts) {
    if (ir::is_strict(c.relation) && !allow_strict)
      throw UnsupportedStrict("strict relation in " + c.label +
                              ": the simplex back end handles only EQ/LE/GE (problem BLO4)");
    (c.relation == Relation::EQ ? eqs : ineqs).push_back(&c);
  }
  OptResult out;
  AffineReduction<T> red(sys.variables, eqs);
  if (!red.consistent()) return out;

  std::vector<T> t;
  if (red.dim() > 0) {
    detail::LpProblem<T> lp;
    lp.num_vars = red.dim();
    for (const LinearConstraint* c : ineqs) lp.rows.push_back(red.map(*c));
    LpRow<T> obj = red.map(objective_form(objective));
    lp.objective = std::move(obj.coef);
    lp.maximize = objective.sense == ir::Sense::Maximize;
    auto sol = detail::solve_lp(lp);
    out.stats.solves_performed = 1;
    if (sol.status == detail::LpStatus::Infeasible) return out;
    if (sol.status == detail::LpStatus::Unbounded) {
      out.status = Status::Unbounded;
      return out;
    }
    t = std::move(sol.x);
  }
  std::vector<T> x = red.point(t);
  auto index = sys.variable_index();
  std::vector<std::string> bad = detail::violations<T>(ineqs, index, x);
  if (!bad.empty()) {
    if (red.dim() == 0) return out;  // a single point that breaks an inequality
    throw UnsupportedStrict("the optimum lies on the boundary of a strict relation: " + bad.front());
  }
  T value = detail::convert<T>(objective.constant);
  for (const auto& [name, coef] : objective.terms) value += detail::convert<T>(coef) * x[index.at(name)];
  out.status = Status::Optimal;
  out.value = as_double(value);
  if constexpr (std::is_same_v<T, double>) {
    std::map<std::string, double> values;
    for (std::size_t v = 0; v < x.size(); ++v) values.emplace(sys.variables[v], x[v]);
    ir::postsolve(pre.substitutions, values);
    out.argpoint.values = std::move(values);
  } else {
    out.exact_value = value;
    linsolve::ExactAssignment exact;
    for (std::size_t v = 0; v < x.size(); ++v) exact.values.emplace(sys.variables[v], x[v]);
    ir::postsolve(pre.substitutions, exact.values);
    out.argpoint = exact.to_float();
    out.exact = std::move(exact);
  }
  return out;
}

OptResult solve_leaf(const ConstraintSystem& system, const ir::Objective& objective, const modes::CheckOptions& check,
                     bool allow_strict) {
  ir::Presolved pre = prepare(system, objective);
  return use_exact(pre.system, check) ? solve_conjunctive<Scalar>(pre, allow_strict)
                                      : solve_conjunctive<double>(pre, allow_strict);
}

template <typename T>
class BranchAndBound {
 public:
  BranchAndBound(const ConstraintSystem& system, const ir::Objective& objective, const ir::Presolved& pre,
                 const OptOptions& options)
      : system_(system), objective_in_(objective), base_(pre.system), options_(options), red_(base_.variables, equations(base_)) {
    objective_ = red_.map(objective_form(*base_.objective));
    for (const auto& c : base_.conjuncts)
      if (c.relation != Relation::EQ) base_rows_.push_back(red_.map(c));
    for (const auto& d : base_.disjunctions) {
      std::vector<std::vector<LpRow<T>>> rows;
      for (const auto& b : d.branches) {
        std::vector<LpRow<T>> br;
        for (const auto& c : b) br.push_back(red_.map(c));
        rows.push_back(std::move(br));
      }
      branch_rows_.push_back(std::move(rows));
      std::vector<LpRow<T>> hull;
      for (const auto& h : detail::hull_rows(d)) hull.push_back(red_.map(h));
      hull_.push_back(std::move(hull));
    }
  }

  OptResult run() {
    choice_.assign(base_.disjunctions.size(), 0);
    if (red_.consistent()) {
      std::vector<LpRow<T>> rows = base_rows_;
      if (relaxation_admits(rows, 0)) dfs(0, rows);
    }
    if (!best_) {
      if (unbounded_) return *unbounded_;
      throw Unsatisfiable("no feasible leaf for " + (system_.name.empty() ? std::string("system") : system_.name) +
                          " (" + std::to_string(stats_.branches_explored) + " branches explored)");
    }
    best_->stats = stats_;
    return *best_;
  }

 private:
  static std::vector<const LinearConstraint*> equations(const ConstraintSystem& s) {
    std::vector<const LinearConstraint*> out;
    for (const auto& c : s.conjuncts)
      if (c.relation == Relation::EQ) out.push_back(&c);
    return out;
  }

  // LP over the chosen rows plus the hulls of disjunctions from `open` on.
  // False when the subtree can be cut.
  bool relaxation_admits(const std::vector<LpRow<T>>& rows, std::size_t open) {
    ++stats_.nodes_visited;
    detail::LpProblem<T> lp;
    lp.num_vars = red_.dim();
    lp.rows = rows;
    for (std::size_t d = open; d < hull_.size(); ++d)
      lp.rows.insert(lp.rows.end(), hull_[d].begin(), hull_[d].end());
    lp.objective = objective_.coef;
    lp.maximize = base_.objective->sense == ir::Sense::Maximize;
    if (lp.num_vars == 0) {
      // every row is a constant: 0 <rel> rhs
      for (const auto& r : lp.rows) {
        double scale = 1;
        if constexpr (std::is_same_v<T, double>) scale = std::max(1.0, std::fabs(r.rhs));
        if (!detail::holds<T>(r.relation, T(-r.rhs), scale)) return false;
      }
      return true;
    }
    auto sol = detail::solve_lp(lp);
    if (sol.status == detail::LpStatus::Infeasible) return false;
    if (sol.status == detail::LpStatus::Unbounded || !best_) return true;
    // objective over t is coef . t - rhs
    T bound = sol.value - objective_.rhs + detail::convert<T>(base_.objective->constant);
    return better(bound, incumbent_, base_.objective->sense);
  }

  void dfs(std::size_t depth, const std::vector<LpRow<T>>& rows) {
    if (unbounded_) return;
    if (depth == base_.disjunctions.size()) {
      leaf();
      return;
    }
    for (std::size_t b : options_.strategy.order(base_.disjunctions[depth])) {
      choice_[depth] = b;
      std::vector<LpRow<T>> next = rows;
      next.insert(next.end(), branch_rows_[depth][b].begin(), branch_rows_[depth][b].end());
      if (!relaxation_admits(next, depth + 1)) {
        ++stats_.branches_explored;
        ++stats_.branches_pruned;
        continue;
      }
      dfs(depth + 1, next);
      if (unbounded_) return;
    }
  }

  void leaf() {
    ++stats_.branches_explored;
    ++stats_.solves_performed;
    ir::ModeAssignment mode = ir::make_mode(system_, choice_);
    OptResult r = solve_leaf(ir::instantiate(system_, mode), objective_in_, options_.check, true);
    if (r.status == Status::Infeasible) return;
    r.mode = mode;
    if (r.status == Status::Unbounded) {
      unbounded_ = std::move(r);
      unbounded_->stats = stats_;
      return;
    }
    T value;
    if constexpr (std::is_same_v<T, double>)
      value = r.value;
    else
      value = r.exact_value ? *r.exact_value : from_double(r.value);
    if (!best_ || better(value, incumbent_, base_.objective->sense)) {
      incumbent_ = value;
      best_ = std::move(r);
    }
  }

  const ConstraintSystem& system_;
  const ir::Objective& objective_in_;
  const ConstraintSystem& base_;
  const OptOptions& options_;
  AffineReduction<T> red_;
  LpRow<T> objective_;
  std::vector<LpRow<T>> base_rows_;
  std::vector<std::vector<std::vector<LpRow<T>>>> branch_rows_;
  std::vector<std::vector<LpRow<T>>> hull_;
  std::vector<std::size_t> choice_;
  std::optional<OptResult> best_;
  std::optional<OptResult> unbounded_;
  T incumbent_{};
  modes::SearchStats stats_;
};

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Unbounded: return "unbounded";
    case Status::Infeasible: return "infeasible";
  }
  return "?";
}

ir::Objective minimize(const std::string& variable) {
  ir::Objective o;
  o.terms.emplace(variable, Scalar(1));
  o.sense = ir::Sense::Minimize;
  return o;
}

ir::Objective maximize(const std::string& variable) {
  ir::Objective o = minimize(variable);
  o.sense = ir::Sense::Maximize;
  return o;
}

OptResult optimize(const ConstraintSystem& system, const ir::Objective& objective, const OptOptions& options) {
  if (!system.disjunctions.empty())
    throw HasDisjunctions("system " + system.name + " has disjunctions; use optimize_disjunctive");
  return solve_leaf(system, objective, options.check, false);
}

OptResult optimize_disjunctive(const ConstraintSystem& system, const ir::Objective& objective,
                               const OptOptions& options) {
  auto start = std::chrono::steady_clock::now();
  if (system.disjunctions.empty()) {
    OptResult r = solve_leaf(system, objective, options.check, true);
    if (r.status == Status::Infeasible)
      throw Unsatisfiable("system " + system.name + " is infeasible");
    r.stats.branches_explored = 1;
    return r;
  }
  const unsigned long long count = ir::branches(system).size();
  if (count > options.cap)
    throw ExplosionGuard(std::to_string(count) + " leaves exceed the cap of " + std::to_string(options.cap), count);
  ir::Presolved pre = prepare(system, objective);
  OptResult r = use_exact(pre.system, options.check) ? BranchAndBound<Scalar>(system, objective, pre, options).run()
                                                     : BranchAndBound<double>(system, objective, pre, options).run();
  r.stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

OptResult optimize_interval(const ConstraintSystem& system, const ir::Objective& objective) {
  check_objective(system, objective);
  ir::Presolved pre = ir::presolve_with_postsolve(system);
  const ConstraintSystem& sys = pre.system;
  struct Slot {
    std::size_t constraint;
    std::string variable;
    ir::CoeffInterval range;
  };
  std::vector<Slot> slots;
  for (std::size_t k = 0; k < sys.conjuncts.size(); ++k)
    for (const auto& [name, iv] : sys.conjuncts[k].interval_coeffs) slots.push_back({k, name, iv});
  if (slots.empty()) return optimize(system, objective);
  if (slots.size() > 12)
    throw UnsupportedFeature(std::to_string(slots.size()) + " interval coefficients; at most 12 are enumerated");
  if (!sys.is_square())
    throw UnsupportedFeature("interval optimization needs a square equation system (problem BLO2)");

  std::optional<OptResult> best;
  Scalar best_value, lo, hi;
  for (unsigned long long mask = 0; mask < (1ull << slots.size()); ++mask) {
    ConstraintSystem vertex = sys;
    for (std::size_t s = 0; s < slots.size(); ++s) {
      LinearConstraint& c = vertex.conjuncts[slots[s].constraint];
      c.terms[slots[s].variable] = (mask >> s) & 1 ? slots[s].range.hi : slots[s].range.lo;
      if (c.terms[slots[s].variable] == 0) c.terms.erase(slots[s].variable);
    }
    for (auto& c : vertex.conjuncts) c.interval_coeffs.clear();
    ir::Presolved vp{vertex, {}};
    vp.system.objective = objective;
    OptResult r = solve_conjunctive<Scalar>(vp, false);
    if (r.status != Status::Optimal) continue;
    const Scalar& v = *r.exact_value;
    if (!best) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!best || better(v, best_value, objective.sense)) {
      best_value = v;
      ir::postsolve(pre.substitutions, r.exact->values);
      r.argpoint = r.exact->to_float();
      best = std::move(r);
    }
  }
  if (!best) throw Unsatisfiable("no vertex of the coefficient box is solvable");

  // The vertex optimum is the true optimum when the enclosure of the
  // objective does not reach beyond the vertex hull.
  interval::IntervalAssignment box;
  try {
    box = interval::solve_interval(system);
  } catch (const Error& e) {
    throw UnsupportedFeature(std::string("interval enclosure unavailable: ") + e.what());
  }
  interval::Interval enclosure = interval::Interval::from_scalar(objective.constant);
  for (const auto& [name, coef] : objective.terms) enclosure += interval::Interval::from_scalar(coef) * box.at(name);
  double slack = 1e-9 * std::max({1.0, std::fabs(to_double(lo)), std::fabs(to_double(hi))});
  if (enclosure.lo() < to_double(lo) - slack || enclosure.hi() > to_double(hi) + slack)
    throw UnsupportedFeature("objective range not confirmed by the interval enclosure (problem BLO2, general case)");
  return *best;
}

DiagnosisModel DiagnosisModel::instrument_all(const ConstraintSystem& system) {
  DiagnosisModel m;
  std::set<std::string> seen;
  for (const auto& d : system.disjunctions) {
    if (std::find(d.branch_tags.begin(), d.branch_tags.end(), "Conducting") == d.branch_tags.end()) continue;
    if (seen.insert(d.label).second) m.components.push_back(d.label);
  }
  for (const auto& c : system.conjuncts) {
    auto slash = c.label.rfind("/law");
    if (slash == std::string::npos || slash + 4 != c.label.size()) continue;
    std::string id = c.label.substr(0, slash);
    if (seen.insert(id).second) m.components.push_back(id);
  }
  return m;
}

void DiagnosisModel::measure(const std::string& variable, const Scalar& value) {
  measurements.push_back(ir::make_constraint({{variable, 1}}, Relation::EQ, value, "measure/" + variable));
}

ConstraintSystem diagnosis_system(const ConstraintSystem& base, const DiagnosisModel& model) {
  for (const Scalar* w : {&model.correct_weight, &model.faulty_weight})
    if (*w <= 0 || *w >= 1) throw InvalidSpec("diagnosis weights must lie in (0, 1), got " + format_scalar(*w));
  ConstraintSystem sys = base;
  std::set<std::string> seen;
  for (const std::string& id : model.components) {
    if (!seen.insert(id).second) throw InvalidSpec("component " + id + " instrumented twice");
    std::string current = "i1_" + id;
    if (!sys.has_variable(current)) throw InvalidSpec("no component " + id + " (missing " + current + ")");
    LinearConstraint open = ir::make_constraint({{current, 1}}, Relation::EQ, 0, id + "/open");

    auto d = std::find_if(sys.disjunctions.begin(), sys.disjunctions.end(),
                          [&](const ir::Disjunction& x) { return x.label == id; });
    if (d != sys.disjunctions.end()) {
      d->branch_weights.assign(d->branches.size(), model.correct_weight);
      d->branches.push_back({open});
      d->branch_tags.resize(d->branches.size() - 1);
      d->branch_tags.push_back("Faulty");
      d->branch_weights.push_back(model.faulty_weight);
      continue;
    }
    std::vector<LinearConstraint> law;
    std::erase_if(sys.conjuncts, [&](const LinearConstraint& c) {
      if (c.label != id + "/law") return false;
      law.push_back(c);
      return true;
    });
    if (law.empty()) throw InvalidSpec("component " + id + " has no law to instrument");
    ir::Disjunction dj;
    dj.label = id;
    dj.branches = {law, {open}};
    dj.branch_tags = {"Correct", "Faulty"};
    dj.branch_weights = {model.correct_weight, model.faulty_weight};
    sys.disjunctions.push_back(std::move(dj));
  }
  for (const auto& m : model.measurements) sys.conjuncts.push_back(m);
  sys.validate();
  return sys;
}

namespace {

class DiagnosisSearch {
 public:
  DiagnosisSearch(const ConstraintSystem& sys, const modes::CheckOptions& options) : sys_(sys), options_(options) {
    const modes::Strategy strategy = modes::Strategy::standard();
    for (const auto& d : sys.disjunctions) {
      std::vector<std::size_t> order = strategy.order(d);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return weight(d, a) > weight(d, b); });
      orders_.push_back(std::move(order));
      Scalar top = 0;
      for (std::size_t b = 0; b < d.branches.size(); ++b) top = std::max(top, weight(d, b));
      best_rest_.push_back(top);
    }
    // best_rest_[d] = product of the best weights of disjunctions d..end
    best_rest_.push_back(Scalar(1));
    for (std::size_t d = sys.disjunctions.size(); d-- > 0;) best_rest_[d] *= best_rest_[d + 1];
  }

  std::optional<Diagnosis> run() {
    choice_.assign(sys_.disjunctions.size(), 0);
    dfs(0, Scalar(1), {});
    if (best_) best_->stats = stats_;
    return best_;
  }

 private:
  static Scalar weight(const ir::Disjunction& d, std::size_t b) {
    return d.branch_weights.empty() ? Scalar(1) : d.branch_weights[b];
  }

  static bool is_fault(const ir::Disjunction& d, std::size_t b) {
    return b < d.branch_tags.size() && d.branch_tags[b] == "Faulty";
  }

  // Whether a subtree reaching `bound` with at least `faults` could win.
  bool promising(const Scalar& bound, const std::vector<std::string>& faults) const {
    if (!best_) return true;
    if (bound != best_->probability) return bound > best_->probability;
    std::vector<std::string> sorted = faults;
    std::sort(sorted.begin(), sorted.end());
    return sorted < best_->faults;
  }

  void dfs(std::size_t depth, const Scalar& prob, std::vector<std::string> faults) {
    if (depth == sys_.disjunctions.size()) {
      leaf(prob, std::move(faults));
      return;
    }
    const ir::Disjunction& d = sys_.disjunctions[depth];
    for (std::size_t b : orders_[depth]) {
      Scalar p = prob * weight(d, b);
      std::vector<std::string> f = faults;
      if (is_fault(d, b)) f.push_back(d.label);
      if (!promising(p * best_rest_[depth + 1], f)) {
        ++stats_.branches_explored;
        ++stats_.branches_pruned;
        continue;
      }
      choice_[depth] = b;
      dfs(depth + 1, p, std::move(f));
    }
  }

  void leaf(const Scalar& prob, std::vector<std::string> faults) {
    ++stats_.branches_explored;
    ++stats_.solves_performed;
    ir::ModeAssignment mode = ir::make_mode(sys_, choice_);
    modes::Feasibility f = modes::check_branch(sys_, mode, options_);
    if (!f.feasible()) return;
    std::sort(faults.begin(), faults.end());
    if (!promising(prob, faults)) return;
    Diagnosis dx;
    dx.mode = std::move(mode);
    dx.faults = std::move(faults);
    dx.probability = prob;
    for (std::size_t d = 0; d < choice_.size(); ++d)
      dx.log_probability += std::log(to_double(weight(sys_.disjunctions[d], choice_[d])));
    dx.assignment = std::move(f.assignment);
    best_ = std::move(dx);
  }

  const ConstraintSystem& sys_;
  const modes::CheckOptions& options_;
  std::vector<std::vector<std::size_t>> orders_;
  std::vector<Scalar> best_rest_;
  std::vector<std::size_t> choice_;
  std::optional<Diagnosis> best_;
  modes::SearchStats stats_;
};

}  // namespace

Diagnosis diagnose(const ConstraintSystem& base, const DiagnosisModel& model, const modes::CheckOptions& options) {
  auto start = std::chrono::steady_clock::now();
  ConstraintSystem sys = diagnosis_system(base, model);
  auto found = DiagnosisSearch(sys, options).run();
  if (!found) throw Unsatisfiable("the measurements contradict every fault hypothesis");
  found->stats.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return std::move(*found);
}

}  // namespace circbench::opt

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::ir {

namespace {

struct FixedValue {
  Scalar point;
  std::optional<CoeffInterval> range;
};

// Adds coef * [lo, hi] to the coefficient of `name`, keeping the point
// coefficient at the value taken at the definitional point.
void add_interval(LinearConstraint& c, const std::string& name, const Scalar& point, const CoeffInterval& iv) {
  auto existing = c.interval_coeffs.find(name);
  CoeffInterval base;
  if (existing != c.interval_coeffs.end()) {
    base = existing->second;
  } else {
    auto t = c.terms.find(name);
    Scalar p = t == c.terms.end() ? Scalar(0) : t->second;
    base = {p, p};
  }
  c.add(name, point);
  c.interval_coeffs[name] = {base.lo + iv.lo, base.hi + iv.hi};
}

template <typename F>
void for_each_constraint(ConstraintSystem& sys, F&& f) {
  for (auto& c : sys.conjuncts) f(c);
  for (auto& d : sys.disjunctions)
    for (auto& b : d.branches)
      for (auto& c : b) f(c);
}

// Fixes unknowns defined by single-term equations and substitutes them into
// product terms. Definitions that become unused are dropped.
void substitute_definitions(ConstraintSystem& sys, std::vector<Substitution>& subs) {
  std::unordered_set<std::string> variables(sys.variables.begin(), sys.variables.end());

  std::map<std::string, FixedValue> fixed;
  std::map<std::string, std::size_t> definition_of;
  for (std::size_t k = 0; k < sys.conjuncts.size(); ++k) {
    const LinearConstraint& c = sys.conjuncts[k];
    if (c.relation != Relation::EQ || c.terms.size() != 1 || !c.products.empty()) continue;
    const auto& [name, coef] = *c.terms.begin();
    if (fixed.count(name)) continue;
    FixedValue v{c.rhs / coef, std::nullopt};
    auto iv = c.interval_coeffs.find(name);
    if (iv != c.interval_coeffs.end()) {
      if (iv->second.lo <= 0 && iv->second.hi >= 0) continue;
      Scalar a = c.rhs / iv->second.lo, b = c.rhs / iv->second.hi;
      v.range = CoeffInterval{std::min(a, b), std::max(a, b)};
    }
    fixed.emplace(name, v);
    definition_of.emplace(name, k);
  }

  std::vector<std::string> residue;
  for_each_constraint(sys, [&](LinearConstraint& c) {
    std::vector<ProductTerm> kept;
    for (const ProductTerm& p : c.products) {
      const std::string* fixed_name = nullptr;
      const std::string* other = nullptr;
      if (fixed.count(p.first)) {
        fixed_name = &p.first;
        other = &p.second;
      } else if (fixed.count(p.second)) {
        fixed_name = &p.second;
        other = &p.first;
      }
      if (!fixed_name) {
        if (variables.count(p.first) && variables.count(p.second)) residue.push_back(p.first + "*" + p.second);
        kept.push_back(p);
        continue;
      }
      const FixedValue& v = fixed.at(*fixed_name);
      if (v.range) {
        Scalar a = p.coef * v.range->lo, b = p.coef * v.range->hi;
        add_interval(c, *other, p.coef * v.point, {std::min(a, b), std::max(a, b)});
      } else {
        c.add(*other, p.coef * v.point);
      }
    }
    c.products = std::move(kept);
  });
  if (!residue.empty()) {
    std::string list;
    for (const auto& r : residue) list += (list.empty() ? "" : ", ") + r;
    throw NonlinearResidue("products of unknowns remain after presolve: " + list);
  }

  // Drop definitions whose variable is no longer referenced anywhere else.
  std::map<std::string, int> uses;
  for_each_constraint(sys, [&](LinearConstraint& c) {
    for (const auto& [name, coef] : c.terms) ++uses[name];
    for (const auto& p : c.products) {
      ++uses[p.first];
      ++uses[p.second];
    }
  });
  if (sys.objective)
    for (const auto& [name, coef] : sys.objective->terms) ++uses[name];

  std::set<std::size_t> drop;
  std::set<std::string> removed;
  for (const auto& [name, k] : definition_of) {
    if (uses[name] != 1) continue;
    drop.insert(k);
    removed.insert(name);
    subs.push_back({name, 0, "", fixed.at(name).point});
  }
  if (drop.empty()) return;
  std::vector<LinearConstraint> conj;
  conj.reserve(sys.conjuncts.size() - drop.size());
  for (std::size_t k = 0; k < sys.conjuncts.size(); ++k)
    if (!drop.count(k)) conj.push_back(std::move(sys.conjuncts[k]));
  sys.conjuncts = std::move(conj);
  std::erase_if(sys.variables, [&](const std::string& v) { return removed.count(v) > 0; });
}

class PairEliminator {
 public:
  PairEliminator(ConstraintSystem& sys, std::vector<Substitution>& subs) : sys_(sys), subs_(subs) {}

  void run() {
    auto index = sys_.variable_index();
    std::unordered_set<std::string> blocked(sys_.binaries.begin(), sys_.binaries.end());
    for_each_constraint(sys_, [&](LinearConstraint& c) {
      for (const auto& p : c.products) {
        blocked.insert(p.first);
        blocked.insert(p.second);
      }
      for (const auto& [name, iv] : c.interval_coeffs) blocked.insert(name);
    });

    std::vector<bool> removed(sys_.conjuncts.size(), false);
    for (std::size_t k = 0; k < sys_.conjuncts.size(); ++k) {
      LinearConstraint& c = sys_.conjuncts[k];
      if (c.relation != Relation::EQ || !c.products.empty() || !c.interval_coeffs.empty()) continue;
      if (c.terms.size() > 2) continue;
      rewrite(c);
      if (c.terms.size() > 2) continue;
      auto eligible = [&](const std::string& v) { return !blocked.count(v) && index.count(v) && !sub_.count(v); };
      if (c.terms.empty()) {
        if (c.rhs == 0) removed[k] = true;
        continue;
      }
      if (c.terms.size() == 1) {
        const auto& [x, a] = *c.terms.begin();
        if (!eligible(x)) continue;
        sub_.emplace(x, Link{0, "", c.rhs / a});
      } else {
        // eliminate the later unknown when both qualify
        auto first = c.terms.begin(), second = std::next(first);
        if (!index.count(first->first) || !index.count(second->first)) continue;
        if (index.at(first->first) < index.at(second->first)) std::swap(first, second);
        if (!eligible(first->first)) std::swap(first, second);
        if (!eligible(first->first)) continue;
        const auto& [x, a] = *first;
        const auto& [y, b] = *second;
        sub_.emplace(x, Link{-b / a, y, c.rhs / a});
      }
      removed[k] = true;
    }
    if (sub_.empty()) return;

    std::vector<LinearConstraint> kept;
    for (std::size_t k = 0; k < sys_.conjuncts.size(); ++k)
      if (!removed[k]) kept.push_back(std::move(sys_.conjuncts[k]));
    sys_.conjuncts = std::move(kept);
    for_each_constraint(sys_, [&](LinearConstraint& c) { rewrite(c); });
    if (sys_.objective) {
      std::map<std::string, Scalar> terms;
      for (const auto& [name, coef] : sys_.objective->terms) {
        if (!sub_.count(name)) {
          terms[name] += coef;
          continue;
        }
        Link l = resolve(name);
        if (!l.other.empty()) terms[l.other] += coef * l.scale;
        sys_.objective->constant += coef * l.offset;
      }
      std::erase_if(terms, [](const auto& t) { return t.second == 0; });
      sys_.objective->terms = std::move(terms);
    }
    for (const auto& name : sys_.variables) {
      if (!sub_.count(name)) continue;
      Link l = resolve(name);
      subs_.push_back({name, l.scale, l.other, l.offset});
    }
    std::erase_if(sys_.variables, [&](const std::string& v) { return sub_.count(v) > 0; });
  }

 private:
  struct Link {
    Scalar scale;
    std::string other;
    Scalar offset;
  };

  Link resolve(const std::string& name) {
    Link& l = sub_.at(name);
    if (l.other.empty() || !sub_.count(l.other)) return l;
    Link next = resolve(l.other);
    l = Link{l.scale * next.scale, next.other, l.scale * next.offset + l.offset};
    return l;
  }

  void rewrite(LinearConstraint& c) {
    bool touched = std::any_of(c.terms.begin(), c.terms.end(), [&](const auto& t) { return sub_.count(t.first) > 0; });
    if (!touched) return;
    std::map<std::string, Scalar> old = std::move(c.terms);
    c.terms.clear();
    for (const auto& [name, coef] : old) {
      if (!sub_.count(name)) {
        c.add(name, coef);
        continue;
      }
      Link l = resolve(name);
      if (!l.other.empty()) c.add(l.other, coef * l.scale);
      c.rhs -= coef * l.offset;
    }
  }

  ConstraintSystem& sys_;
  std::vector<Substitution>& subs_;
  std::unordered_map<std::string, Link> sub_;
};

}  // namespace

Presolved presolve_with_postsolve(const ConstraintSystem& system, const PresolveOptions& options) {
  Presolved out{system, {}};
  substitute_definitions(out.system, out.substitutions);
  if (options.eliminate_pairs) PairEliminator(out.system, out.substitutions).run();
  return out;
}

ConstraintSystem presolve(const ConstraintSystem& system, const PresolveOptions& options) {
  return presolve_with_postsolve(system, options).system;
}

void postsolve(const std::vector<Substitution>& subs, std::map<std::string, double>& values) {
  for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
    double v = to_double(it->offset);
    if (!it->other.empty()) v += to_double(it->scale) * values.at(it->other);
    values[it->variable] = v;
  }
}

void postsolve(const std::vector<Substitution>& subs, std::map<std::string, Scalar>& values) {
  for (auto it = subs.rbegin(); it != subs.rend(); ++it) {
    Scalar v = it->offset;
    if (!it->other.empty()) v += it->scale * values.at(it->other);
    values[it->variable] = v;
  }
}

}  // namespace circbench::ir

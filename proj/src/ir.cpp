#include <climits>
#include <set>
#include <sstream>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::ir {

std::string_view to_string(Relation r) {
  switch (r) {
    case Relation::EQ: return "=";
    case Relation::LE: return "<=";
    case Relation::LT: return "<";
    case Relation::GE: return ">=";
    case Relation::GT: return ">";
  }
  return "?";
}

Relation parse_relation(std::string_view text) {
  if (text == "=") return Relation::EQ;
  if (text == "<=") return Relation::LE;
  if (text == "<") return Relation::LT;
  if (text == ">=") return Relation::GE;
  if (text == ">") return Relation::GT;
  throw Error("unknown relation '" + std::string(text) + "'");
}

LinearConstraint& LinearConstraint::add(const std::string& name, const Scalar& coef) {
  if (coef == 0) return *this;
  auto [it, inserted] = terms.try_emplace(name, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0) terms.erase(it);
  }
  return *this;
}

LinearConstraint& LinearConstraint::product(const Scalar& coef, const std::string& first, const std::string& second) {
  if (coef != 0) products.push_back({coef, first, second});
  return *this;
}

LinearConstraint make_constraint(std::initializer_list<std::pair<std::string, Scalar>> terms, Relation rel,
                                 const Scalar& rhs, std::string label) {
  LinearConstraint c;
  for (const auto& [name, coef] : terms) c.add(name, coef);
  c.relation = rel;
  c.rhs = rhs;
  c.label = std::move(label);
  return c;
}

std::unordered_map<std::string, std::size_t> ConstraintSystem::variable_index() const {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(variables.size());
  for (std::size_t i = 0; i < variables.size(); ++i) index.emplace(variables[i], i);
  return index;
}

bool ConstraintSystem::has_variable(const std::string& name) const {
  return std::find(variables.begin(), variables.end(), name) != variables.end();
}

bool ConstraintSystem::has_parameter(const std::string& name) const {
  return std::find(parameters.begin(), parameters.end(), name) != parameters.end();
}

bool ConstraintSystem::is_square() const {
  if (!disjunctions.empty()) return false;
  for (const auto& c : conjuncts)
    if (c.relation != Relation::EQ) return false;
  return conjuncts.size() == variables.size();
}

void ConstraintSystem::validate() const {
  std::set<std::string> names;
  for (const auto& v : variables)
    if (!names.insert(v).second) throw StructuralError("duplicate variable " + v);
  for (const auto& p : parameters)
    if (!names.insert(p).second) throw StructuralError("parameter " + p + " clashes with another name");
  for (const auto& b : binaries)
    if (!has_variable(b)) throw StructuralError("binary " + b + " is not a declared variable");

  auto check = [&](const LinearConstraint& c) {
    for (const auto& [name, coef] : c.terms) {
      if (!names.count(name)) throw StructuralError("constraint references undeclared name " + name);
      if (coef == 0) throw StructuralError("zero coefficient stored for " + name);
    }
    for (const auto& p : c.products) {
      if (!names.count(p.first) || !names.count(p.second))
        throw StructuralError("product references undeclared name " + p.first + "*" + p.second);
    }
    for (const auto& [name, iv] : c.interval_coeffs) {
      if (!names.count(name)) throw StructuralError("interval coefficient on undeclared name " + name);
      if (iv.lo > iv.hi) throw StructuralError("empty coefficient interval on " + name);
    }
  };
  for (const auto& c : conjuncts) check(c);
  for (const auto& d : disjunctions) {
    if (d.branches.size() < 2) throw StructuralError("disjunction " + d.label + " has fewer than two branches");
    if (!d.branch_tags.empty() && d.branch_tags.size() != d.branches.size())
      throw StructuralError("disjunction " + d.label + ": tag count mismatch");
    if (!d.branch_weights.empty()) {
      if (d.branch_weights.size() != d.branches.size())
        throw StructuralError("disjunction " + d.label + ": weight count mismatch");
      for (const auto& w : d.branch_weights)
        if (w <= 0 || w > 1) throw StructuralError("disjunction " + d.label + ": weight outside (0, 1]");
    }
    for (const auto& b : d.branches)
      for (const auto& c : b) check(c);
  }
  if (objective)
    for (const auto& [name, coef] : objective->terms)
      if (!has_variable(name)) throw StructuralError("objective references undeclared variable " + name);
}

std::string to_string(const LinearConstraint& c) {
  std::ostringstream out;
  bool first = true;
  auto emit = [&](const Scalar& coef, const std::string& what) {
    Scalar a = abs(coef);
    if (first)
      out << (coef < 0 ? "-" : "");
    else
      out << (coef < 0 ? " - " : " + ");
    if (a != 1) out << format_scalar(a) << "*";
    out << what;
    first = false;
  };
  for (const auto& [name, coef] : c.terms) {
    auto iv = c.interval_coeffs.find(name);
    if (iv != c.interval_coeffs.end()) {
      out << (first ? "" : " + ") << "[" << format_scalar(iv->second.lo) << ", " << format_scalar(iv->second.hi)
          << "]*" << name;
      first = false;
    } else {
      emit(coef, name);
    }
  }
  for (const auto& p : c.products) emit(p.coef, p.first + "*" + p.second);
  if (first) out << "0";
  out << " " << to_string(c.relation) << " " << format_scalar(c.rhs);
  return out.str();
}

ModeAssignment make_mode(const ConstraintSystem& system, const std::vector<std::size_t>& choice) {
  if (choice.size() != system.disjunctions.size())
    throw DimensionMismatch("mode covers " + std::to_string(choice.size()) + " of " +
                            std::to_string(system.disjunctions.size()) + " disjunctions");
  ModeAssignment mode;
  mode.reserve(choice.size());
  for (std::size_t d = 0; d < choice.size(); ++d) {
    const Disjunction& dis = system.disjunctions[d];
    if (choice[d] >= dis.branches.size())
      throw DimensionMismatch("branch index out of range for " + dis.label);
    std::string tag = dis.branch_tags.empty() ? std::to_string(choice[d]) : dis.branch_tags[choice[d]];
    mode.push_back({dis.label, choice[d], std::move(tag)});
  }
  return mode;
}

std::string to_string(const ModeAssignment& mode) {
  std::ostringstream out;
  for (std::size_t i = 0; i < mode.size(); ++i) out << (i ? " " : "") << mode[i].label << "=" << mode[i].tag;
  return out.str();
}

ConstraintSystem instantiate(const ConstraintSystem& system, const std::vector<std::size_t>& choice) {
  if (choice.size() != system.disjunctions.size())
    throw DimensionMismatch("mode does not cover every disjunction");
  ConstraintSystem out;
  out.name = system.name;
  out.variables = system.variables;
  out.parameters = system.parameters;
  out.binaries = system.binaries;
  out.objective = system.objective;
  out.conjuncts = system.conjuncts;
  for (std::size_t d = 0; d < choice.size(); ++d) {
    const auto& branch = system.disjunctions[d].branches.at(choice[d]);
    out.conjuncts.insert(out.conjuncts.end(), branch.begin(), branch.end());
  }
  return out;
}

ConstraintSystem instantiate(const ConstraintSystem& system, const ModeAssignment& mode) {
  if (mode.size() != system.disjunctions.size())
    throw DimensionMismatch("mode does not cover every disjunction");
  std::vector<std::size_t> choice;
  choice.reserve(mode.size());
  for (std::size_t d = 0; d < mode.size(); ++d) {
    if (mode[d].label != system.disjunctions[d].label)
      throw DimensionMismatch("mode entry " + mode[d].label + " does not match disjunction " +
                              system.disjunctions[d].label);
    choice.push_back(mode[d].branch);
  }
  return instantiate(system, choice);
}

BranchSequence::BranchSequence(const ConstraintSystem& system) : system_(&system) {}

BranchSequence::iterator BranchSequence::begin() const {
  iterator it;
  it.system_ = system_;
  it.choice_.assign(system_->disjunctions.size(), 0);
  it.done_ = false;
  return it;
}

unsigned long long BranchSequence::size() const {
  unsigned long long total = 1;
  for (const auto& d : system_->disjunctions) {
    unsigned long long k = d.branches.size();
    if (k != 0 && total > ULLONG_MAX / k) return ULLONG_MAX;
    total *= k;
  }
  return total;
}

BranchSequence::iterator::value_type BranchSequence::iterator::operator*() const {
  return {instantiate(*system_, choice_), make_mode(*system_, choice_)};
}

BranchSequence::iterator& BranchSequence::iterator::operator++() {
  if (done_) return *this;
  for (std::size_t d = choice_.size(); d-- > 0;) {
    if (++choice_[d] < system_->disjunctions[d].branches.size()) return *this;
    choice_[d] = 0;
  }
  done_ = true;
  choice_.clear();
  return *this;
}

BranchSequence branches(const ConstraintSystem& system) { return BranchSequence(system); }

}  // namespace circbench::ir

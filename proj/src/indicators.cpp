#include <cctype>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::ir {

namespace {

std::string sanitize(const std::string& label) {
  std::string out;
  for (char ch : label) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return out;
}

}  // namespace

ConstraintSystem encode_indicators(const ConstraintSystem& system, const Scalar& big_m) {
  if (big_m <= 0) throw InvalidSpec("big-M must be positive");
  ConstraintSystem out = system;
  out.disjunctions.clear();

  for (std::size_t d = 0; d < system.disjunctions.size(); ++d) {
    const Disjunction& dis = system.disjunctions[d];
    LinearConstraint select;
    select.relation = Relation::GE;
    select.rhs = 1;
    select.label = dis.label + "/select";
    for (std::size_t b = 0; b < dis.branches.size(); ++b) {
      std::string y = "y_" + sanitize(dis.label) + "_" + std::to_string(b + 1);
      if (out.has_variable(y)) throw StructuralError("indicator name " + y + " already in use");
      out.variables.push_back(y);
      out.binaries.push_back(y);
      select.add(y, 1);
      for (const LinearConstraint& c : dis.branches[b]) {
        if (is_strict(c.relation))
          throw UnsupportedStrict("strict relation in disjunction " + dis.label +
                                  " cannot be encoded with indicators");
        // active when y = 1: lhs - rhs within M * (1 - y) of the bound
        if (c.relation == Relation::EQ || c.relation == Relation::LE) {
          LinearConstraint le = c;
          le.relation = Relation::LE;
          le.add(y, big_m);
          le.rhs += big_m;
          out.conjuncts.push_back(std::move(le));
        }
        if (c.relation == Relation::EQ || c.relation == Relation::GE) {
          LinearConstraint ge = c;
          ge.relation = Relation::GE;
          ge.add(y, -big_m);
          ge.rhs -= big_m;
          out.conjuncts.push_back(std::move(ge));
        }
      }
    }
    out.conjuncts.push_back(std::move(select));
  }
  return out;
}

}  // namespace circbench::ir

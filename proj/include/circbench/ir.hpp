#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "circbench/netgen.hpp"
#include "circbench/scalar.hpp"

namespace circbench::ir {

enum class Relation { EQ, LE, LT, GE, GT };

std::string_view to_string(Relation r);
Relation parse_relation(std::string_view text);
inline bool is_strict(Relation r) { return r == Relation::LT || r == Relation::GT; }

struct CoeffInterval {
  Scalar lo;
  Scalar hi;
  bool operator==(const CoeffInterval&) const = default;
};

/// coef * first * second. `first` may name a parameter or a variable.
struct ProductTerm {
  Scalar coef;
  std::string first;
  std::string second;
  bool operator==(const ProductTerm&) const = default;
};

/// sum(terms) + sum(products)  <relation>  rhs
struct LinearConstraint {
  std::map<std::string, Scalar> terms;
  std::vector<ProductTerm> products;
  Relation relation = Relation::EQ;
  Scalar rhs;
  /// Overrides the point coefficient of a term with an interval.
  std::map<std::string, CoeffInterval> interval_coeffs;
  /// Origin, e.g. "R3_B1/law", "N2_B1/kcl", "wire".
  std::string label;

  /// Accumulates into terms, erasing the entry if it cancels to zero.
  LinearConstraint& add(const std::string& name, const Scalar& coef);
  LinearConstraint& product(const Scalar& coef, const std::string& first, const std::string& second);

  bool operator==(const LinearConstraint&) const = default;
};

LinearConstraint make_constraint(std::initializer_list<std::pair<std::string, Scalar>> terms, Relation rel,
                                 const Scalar& rhs, std::string label = {});

struct Disjunction {
  std::string label;
  std::vector<std::vector<LinearConstraint>> branches;
  std::vector<std::string> branch_tags;
  /// Empty, or one weight in (0, 1] per branch.
  std::vector<Scalar> branch_weights;

  bool operator==(const Disjunction&) const = default;
};

enum class Sense { Minimize, Maximize };

struct Objective {
  std::map<std::string, Scalar> terms;
  Scalar constant;
  Sense sense = Sense::Minimize;
  bool operator==(const Objective&) const = default;
};

struct ConstraintSystem {
  std::string name;
  std::vector<std::string> variables;
  std::vector<std::string> parameters;
  /// 0/1 indicator variables introduced by encode_indicators.
  std::vector<std::string> binaries;
  std::vector<LinearConstraint> conjuncts;
  std::vector<Disjunction> disjunctions;
  std::optional<Objective> objective;

  bool operator==(const ConstraintSystem&) const = default;

  std::unordered_map<std::string, std::size_t> variable_index() const;
  bool has_variable(const std::string& name) const;
  bool has_parameter(const std::string& name) const;

  /// No disjunctions, every conjunct EQ and #conjuncts == #variables.
  bool is_square() const;

  /// Unique names, referenced names declared, weights in (0, 1],
  /// at least two branches per disjunction.
  void validate() const;
};

/// Human-readable one-line rendering, "u1_R - u2_R - 100*i1_R = 0".
std::string to_string(const LinearConstraint& c);

struct ModeChoice {
  std::string label;
  std::size_t branch = 0;
  std::string tag;
  bool operator==(const ModeChoice&) const = default;
};

/// One branch per disjunction, in declaration order.
using ModeAssignment = std::vector<ModeChoice>;

ModeAssignment make_mode(const ConstraintSystem& system, const std::vector<std::size_t>& choice);
std::string to_string(const ModeAssignment& mode);

/// Conjunctive system obtained by fixing every disjunction to the chosen
/// branch. Branch constraints are appended after the conjuncts.
ConstraintSystem instantiate(const ConstraintSystem& system, const ModeAssignment& mode);
ConstraintSystem instantiate(const ConstraintSystem& system, const std::vector<std::size_t>& choice);

// ---------------------------------------------------------------- lowering

ConstraintSystem lower(const netgen::Netlist& netlist);

// ---------------------------------------------------------------- presolve

struct PresolveOptions {
  /// Substitute away two-term equalities (wire and tie relations).
  bool eliminate_pairs = false;
};

/// x = scale * other + offset, for a variable removed by presolve.
struct Substitution {
  std::string variable;
  Scalar scale;
  std::string other;  // empty when the variable was fixed to a constant
  Scalar offset;
};

struct Presolved {
  ConstraintSystem system;
  /// In elimination order; apply in reverse to recover removed values.
  std::vector<Substitution> substitutions;
};

ConstraintSystem presolve(const ConstraintSystem& system, const PresolveOptions& options = {});
Presolved presolve_with_postsolve(const ConstraintSystem& system, const PresolveOptions& options = {});

/// Values of removed variables from values of the kept ones.
void postsolve(const std::vector<Substitution>& subs, std::map<std::string, double>& values);
void postsolve(const std::vector<Substitution>& subs, std::map<std::string, Scalar>& values);

// ---------------------------------------------------------------- branches

/// Lazy Cartesian product over disjunction branches: disjunctions in
/// declaration order, the last disjunction varying fastest, branch 0 first.
class BranchSequence {
 public:
  explicit BranchSequence(const ConstraintSystem& system);

  class iterator {
   public:
    using value_type = std::pair<ConstraintSystem, ModeAssignment>;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    value_type operator*() const;
    iterator& operator++();
    iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    bool operator==(const iterator& other) const { return done_ == other.done_ && (done_ || choice_ == other.choice_); }
    const std::vector<std::size_t>& choice() const { return choice_; }

   private:
    friend class BranchSequence;
    const ConstraintSystem* system_ = nullptr;
    std::vector<std::size_t> choice_;
    bool done_ = true;
  };

  iterator begin() const;
  iterator end() const { return iterator{}; }
  /// Product of branch counts (saturates at ULLONG_MAX).
  unsigned long long size() const;

 private:
  const ConstraintSystem* system_;
};

BranchSequence branches(const ConstraintSystem& system);

// --------------------------------------------------------------- indicators

/// Big-M encoding of every disjunction with 0/1 indicators. Rejects strict
/// relations inside branches with UnsupportedStrict.
ConstraintSystem encode_indicators(const ConstraintSystem& system, const Scalar& big_m = Scalar(1000000));

// ---------------------------------------------------------------------- I/O

inline constexpr int kInstanceFormatVersion = 1;

std::string to_instance_text(const ConstraintSystem& system);
ConstraintSystem from_instance_text(std::string_view text);
void save_instance(const ConstraintSystem& system, const std::filesystem::path& path);
ConstraintSystem load_instance(const std::filesystem::path& path);

/// CPLEX-style LP text. Rejects strict relations, interval coefficients,
/// products and disjunctions with UnsupportedFeature / UnsupportedStrict.
std::string to_lp_text(const ConstraintSystem& system);
void export_lp(const ConstraintSystem& system, const std::filesystem::path& path);

}  // namespace circbench::ir

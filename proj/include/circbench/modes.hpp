#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "circbench/interval.hpp"
#include "circbench/ir.hpp"
#include "circbench/linsolve.hpp"

namespace circbench::modes {

using ir::ModeAssignment;

struct SearchStats {
  /// Leaves examined plus subtrees cut off before reaching a leaf.
  unsigned long long branches_explored = 0;
  unsigned long long branches_pruned = 0;
  /// Leaf systems handed to a linear solver.
  unsigned long long solves_performed = 0;
  /// Partial assignments checked by propagation.
  unsigned long long nodes_visited = 0;
  double wall_time = 0;

  SearchStats& operator+=(const SearchStats& other);
};

enum class Backend { Auto, Exact, Float };

struct CheckOptions {
  Backend backend = Backend::Auto;
  /// Auto selects the exact backend up to this many unknowns (SE(50)).
  std::size_t exact_limit = 2204;
};

struct Feasibility {
  enum class Kind { Feasible, InfeasibleEquality, InfeasibleInequality };

  Kind kind = Kind::InfeasibleEquality;
  linsolve::Assignment assignment;
  /// Present when the exact backend decided the branch.
  std::optional<linsolve::ExactAssignment> exact;
  /// Rendered constraints that failed, with their labels.
  std::vector<std::string> violated;
  /// The equations left some unknowns free; a feasibility LP picked the point.
  bool underdetermined = false;

  bool feasible() const { return kind == Kind::Feasible; }
};

/// Fixes every disjunction to the given branch, solves the equations and
/// checks the inequalities. Non-strict relations allow 1e-9 * scale of
/// slack on the float backend; strict relations must hold with a margin
/// larger than that (exactly, on the exact backend).
Feasibility check_branch(const ir::ConstraintSystem& system, const ModeAssignment& mode,
                         const CheckOptions& options = {});

/// The same check on a system without disjunctions.
Feasibility check_conjunctive(const ir::ConstraintSystem& system, const CheckOptions& options = {});

struct FeasibleLeaf {
  ModeAssignment mode;
  linsolve::Assignment assignment;
  std::optional<linsolve::ExactAssignment> exact;
};

struct EnumerateOptions {
  unsigned long long cap = 65536;  // 4^8
  unsigned threads = 1;
  CheckOptions check;
};

/// Every feasible leaf in branch-iteration order. A solution already
/// produced by an earlier leaf is not repeated.
std::vector<FeasibleLeaf> enumerate_feasible(const ir::ConstraintSystem& system, const EnumerateOptions& options = {});

struct Strategy {
  std::string name = "standard";
  /// Component prefix of a disjunction label (text before the first '_')
  /// -> tag tried first.
  std::map<std::string, std::string> preferred;
  /// Try branches in the reverse of the preferred order.
  bool reverse = false;
  /// Disjunction label -> the only tag allowed.
  std::map<std::string, std::string> pins;

  /// Blocking first at D1 positions, Conducting first at D4 positions.
  static Strategy standard();
  /// Branches in declaration order.
  static Strategy declaration();
  /// The reverse of standard(): the expected mode is tried last.
  static Strategy pessimal();

  /// Branch indices of `d` in the order they are tried.
  std::vector<std::size_t> order(const ir::Disjunction& d) const;
};

struct SearchOptions {
  CheckOptions check;
};

struct SearchResult {
  ModeAssignment mode;
  linsolve::Assignment assignment;
  std::optional<linsolve::ExactAssignment> exact;
  SearchStats stats;
};

/// Depth-first search over the disjunctions in declaration order. After
/// each choice the branch equations are eliminated over the affine
/// solution set of the conjuncts; a constraint that becomes constant and
/// false prunes the subtree. Returns the first feasible leaf in strategy
/// order. Throws Unsatisfiable when there is none.
SearchResult search_first(const ir::ConstraintSystem& system, const Strategy& strategy = Strategy::standard(),
                          const SearchOptions& options = {});

struct IntervalBranch {
  interval::IntervalAssignment enclosure;
  /// Inequalities of the branch not proven over the whole enclosure.
  std::vector<std::string> uncertain;

  /// Every inequality holds for every point of the enclosure, so the
  /// branch stays valid for every coefficient choice.
  bool certified() const { return uncertain.empty(); }
};

/// Enclosure of the branch equations of a system whose coefficients may
/// be intervals, with the branch inequalities checked by interval
/// evaluation over the enclosure.
IntervalBranch solve_branch_interval(const ir::ConstraintSystem& system, const ModeAssignment& mode,
                                     const interval::IntervalOptions& options = {});

}  // namespace circbench::modes

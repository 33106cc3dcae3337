#pragma once

#include <optional>
#include <string>
#include <vector>

#include "circbench/ir.hpp"
#include "circbench/linsolve.hpp"
#include "circbench/modes.hpp"
#include "circbench/scalar.hpp"

namespace circbench::opt {

enum class Status { Optimal, Unbounded, Infeasible };

std::string_view to_string(Status s);

struct OptResult {
  Status status = Status::Infeasible;
  double value = 0;
  /// Set when the exact backend produced the optimum.
  std::optional<Scalar> exact_value;
  linsolve::Assignment argpoint;
  std::optional<linsolve::ExactAssignment> exact;
  /// The leaf attaining the optimum, for systems with disjunctions.
  std::optional<ir::ModeAssignment> mode;
  modes::SearchStats stats;
};

struct OptOptions {
  modes::CheckOptions check;
  /// Largest number of leaves optimize_disjunctive accepts.
  unsigned long long cap = 65536;
  modes::Strategy strategy = modes::Strategy::standard();
};

ir::Objective minimize(const std::string& variable);
ir::Objective maximize(const std::string& variable);

/// Two-phase simplex (Bland's rule) over the affine solution set of the
/// equations. Rational pivoting up to the exact-backend size limit.
/// Rejects disjunctions, parameters, interval coefficients and strict
/// relations.
OptResult optimize(const ir::ConstraintSystem& system, const ir::Objective& objective, const OptOptions& options = {});

/// Branch and bound over the disjunctions in strategy order. Each node is
/// bounded by the LP over the chosen branches plus the closed hull of the
/// open disjunctions. Strict relations in leaves are checked on the
/// optimal point. Ties keep the first leaf in search order. Throws
/// Unsatisfiable when no leaf is feasible.
OptResult optimize_disjunctive(const ir::ConstraintSystem& system, const ir::Objective& objective,
                               const OptOptions& options = {});

/// Optimization over a square system with interval coefficients: exact
/// optima at every vertex of the coefficient box (at most 12 interval
/// coefficients). The vertex optimum is reported only when the interval
/// enclosure of the objective confirms that no interior coefficient choice
/// leaves the vertex hull; otherwise UnsupportedFeature.
OptResult optimize_interval(const ir::ConstraintSystem& system, const ir::Objective& objective);

struct DiagnosisModel {
  /// Component ids to instrument, e.g. "R", "R3_B1", "D1_B2".
  std::vector<std::string> components;
  Scalar correct_weight = ratio(9, 10);
  Scalar faulty_weight = ratio(1, 10);
  /// Observed values, appended to the conjuncts.
  std::vector<ir::LinearConstraint> measurements;

  /// Every resistor (component with a "/law" constraint) and every diode.
  static DiagnosisModel instrument_all(const ir::ConstraintSystem& system);
  void measure(const std::string& variable, const Scalar& value);
};

struct Diagnosis {
  ir::ModeAssignment mode;
  /// Components on their Faulty branch, sorted.
  std::vector<std::string> faults;
  Scalar probability;
  double log_probability = 0;
  linsolve::Assignment assignment;
  modes::SearchStats stats;
};

/// The system with each instrumented component as a disjunction: Correct
/// (its law, weight correct_weight) or Faulty (open, i1 = 0, weight
/// faulty_weight). A diode keeps its Conducting and Blocking branches at
/// correct_weight and gains the Faulty branch.
ir::ConstraintSystem diagnosis_system(const ir::ConstraintSystem& base, const DiagnosisModel& model);

/// Most probable consistent assignment of branches, probabilities
/// multiplied over components. Ties go to the lexicographically smallest
/// fault set. Throws Unsatisfiable when no hypothesis fits the measurements.
Diagnosis diagnose(const ir::ConstraintSystem& base, const DiagnosisModel& model,
                   const modes::CheckOptions& options = {});

}  // namespace circbench::opt

#pragma once

#include <map>
#include <string>

#include "circbench/ir.hpp"
#include "circbench/scalar.hpp"

namespace circbench::linsolve {

struct Assignment {
  std::map<std::string, double> values;
  /// max |lhs - rhs| over the EQ constraints, as measured after solving.
  double residual_norm = 0;

  double at(const std::string& name) const;
};

struct ExactAssignment {
  std::map<std::string, Scalar> values;

  const Scalar& at(const std::string& name) const;
  Assignment to_float() const;
};

/// Sparse LU with partial pivoting. Product terms fixed by definitional
/// equations are presolved away first and restored afterwards.
Assignment solve_f64(const ir::ConstraintSystem& system);

/// Rational elimination; the result satisfies every equation exactly.
ExactAssignment solve_exact(const ir::ConstraintSystem& system);

/// max |lhs - rhs| over EQ constraints, point coefficients only.
double residual(const ir::ConstraintSystem& system, const std::map<std::string, double>& values);
Scalar residual(const ir::ConstraintSystem& system, const std::map<std::string, Scalar>& values);
inline double residual(const ir::ConstraintSystem& system, const Assignment& a) { return residual(system, a.values); }
inline Scalar residual(const ir::ConstraintSystem& system, const ExactAssignment& a) {
  return residual(system, a.values);
}

/// max(1, |rhs|, |coef * value|) over the EQ constraints; the reference
/// magnitude for relative tolerances.
double residual_scale(const ir::ConstraintSystem& system, const std::map<std::string, double>& values);

}  // namespace circbench::linsolve

#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>

#include "circbench/ir.hpp"
#include "circbench/netgen.hpp"
#include "circbench/scalar.hpp"

namespace circbench::interval {

/// Closed interval of doubles. Every arithmetic result is widened by one
/// ulp on each side, so the true real result is always enclosed.
class Interval {
 public:
  Interval() = default;
  Interval(double point);  // NOLINT(google-explicit-constructor)
  Interval(double lo, double hi);

  /// Smallest double interval containing the rational.
  static Interval from_scalar(const Scalar& v);
  static Interval hull(const Scalar& lo, const Scalar& hi);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double mid() const { return lo_ + 0.5 * (hi_ - lo_); }
  double width() const { return hi_ - lo_; }
  double mag() const;
  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains(const Scalar& x) const;
  bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }
  bool contains_zero() const { return lo_ <= 0 && 0 <= hi_; }

  /// Throws DivergentEnclosure when the intersection is empty.
  Interval intersect(const Interval& other) const;
  Interval join(const Interval& other) const;

  Interval operator-() const { return {-hi_, -lo_}; }
  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  Interval& operator/=(const Interval& o);

  friend Interval operator+(Interval a, const Interval& b) { return a += b; }
  friend Interval operator-(Interval a, const Interval& b) { return a -= b; }
  friend Interval operator*(Interval a, const Interval& b) { return a *= b; }
  /// Throws DivergentEnclosure when the divisor contains zero.
  friend Interval operator/(Interval a, const Interval& b) { return a /= b; }

  bool operator==(const Interval&) const = default;

 private:
  double lo_ = 0;
  double hi_ = 0;
};

std::ostream& operator<<(std::ostream& out, const Interval& iv);

struct IntervalAssignment {
  enum class Semantics { Enclosure };

  std::map<std::string, Interval> values;
  Semantics semantics = Semantics::Enclosure;

  const Interval& at(const std::string& name) const;
};

struct IntervalOptions {
  /// Largest dense core (after pair elimination) handled by elimination.
  std::size_t max_dimension = 1000;
  int refinement_sweeps = 30;
};

/// Outer enclosure of the united solution set of a square EQ system whose
/// coefficients may be intervals. Pair equalities are eliminated exactly,
/// the remaining core is preconditioned with the inverse midpoint matrix,
/// solved by interval Gaussian elimination and contracted with Gauss-Seidel
/// sweeps on both the preconditioned and the original rows.
IntervalAssignment solve_interval(const ir::ConstraintSystem& system, const IntervalOptions& options = {});

/// Hull of exact solutions over every vertex of the coefficient box. For a
/// regular interval matrix this is the hull of the united solution set.
/// Limited to 12 interval coefficients.
IntervalAssignment solve_interval_vertices(const ir::ConstraintSystem& system);

struct ExactRange {
  Scalar lo;
  Scalar hi;
};

/// Inner approximation of each unknown's range when every resistor value
/// varies within the tolerance: exact solves at all corners of the
/// per-position resistance box plus seeded uniform samples. Systems with
/// diodes use the first feasible mode of each sample.
std::map<std::string, ExactRange> range_oracle(const netgen::FamilySpec& spec, const Scalar& tolerance,
                                               int num_samples, std::uint64_t seed);

}  // namespace circbench::interval

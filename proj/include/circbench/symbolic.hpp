#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circbench/interval.hpp"
#include "circbench/ir.hpp"
#include "circbench/scalar.hpp"

namespace circbench::symbolic {

/// Exponent per declared parameter.
using Monomial = std::vector<unsigned>;

/// Graded lexicographic order: total degree first, then the earlier
/// parameter with the larger exponent wins.
struct GrlexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

/// Sparse polynomial with rational coefficients over a declared parameter
/// list. Zero coefficients are never stored.
class MultivarPoly {
 public:
  using Terms = std::map<Monomial, Scalar, GrlexLess>;

  MultivarPoly() = default;
  explicit MultivarPoly(std::vector<std::string> parameters);
  static MultivarPoly constant(std::vector<std::string> parameters, const Scalar& value);
  static MultivarPoly parameter(std::vector<std::string> parameters, const std::string& name);

  const std::vector<std::string>& parameters() const { return params_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Constant term (0 when absent).
  Scalar constant_term() const;
  unsigned degree() const;
  /// Greatest term in graded lexicographic order. Requires a nonzero poly.
  const std::pair<const Monomial, Scalar>& leading() const { return *terms_.rbegin(); }

  /// Adds coef * monomial.
  void add_term(const Monomial& m, const Scalar& coef);

  Scalar evaluate(const std::map<std::string, Scalar>& point) const;
  interval::Interval evaluate(const std::map<std::string, interval::Interval>& box) const;
  /// Fixes the named parameters; the parameter list is unchanged.
  MultivarPoly substitute(const std::map<std::string, Scalar>& values) const;

  /// Positive rational c such that this / c has coprime integer coefficients
  /// (1 for the zero polynomial).
  Scalar content() const;
  /// Componentwise minimum exponent over all terms.
  Monomial monomial_content() const;
  /// Divides every term by coef * m; m must divide every monomial.
  MultivarPoly divided_by_term(const Monomial& m, const Scalar& coef) const;
  /// Quotient when `divisor` divides this exactly, else nullopt.
  std::optional<MultivarPoly> exact_divide(const MultivarPoly& divisor) const;

  MultivarPoly operator-() const;
  MultivarPoly& operator+=(const MultivarPoly& o);
  MultivarPoly& operator-=(const MultivarPoly& o);
  MultivarPoly& operator*=(const Scalar& s);
  friend MultivarPoly operator+(MultivarPoly a, const MultivarPoly& b) { return a += b; }
  friend MultivarPoly operator-(MultivarPoly a, const MultivarPoly& b) { return a -= b; }
  friend MultivarPoly operator*(const MultivarPoly& a, const MultivarPoly& b);
  friend MultivarPoly operator*(MultivarPoly a, const Scalar& s) { return a *= s; }

  bool operator==(const MultivarPoly& o) const;

  /// Terms in descending order, "R1*R3 + 2*R2^2 - 5".
  std::string to_string() const;

 private:
  void adopt(const MultivarPoly& other);

  std::vector<std::string> params_;
  Terms terms_;
};

/// Greatest common divisor, primitive with a positive leading coefficient
/// (recursive primitive remainder sequence).
MultivarPoly gcd(const MultivarPoly& a, const MultivarPoly& b);

/// numerator / denominator in lowest terms: common polynomial factors
/// cancelled, integer coefficients without a common factor and a positive
/// leading denominator coefficient. Equal functions therefore compare
/// equal structurally.
class RationalFunction {
 public:
  RationalFunction() = default;
  RationalFunction(MultivarPoly numerator, MultivarPoly denominator);
  static RationalFunction from_poly(MultivarPoly p);

  const MultivarPoly& numerator() const { return num_; }
  const MultivarPoly& denominator() const { return den_; }
  std::vector<std::string> parameters() const { return num_.parameters(); }

  RationalFunction& operator+=(const RationalFunction& o);
  RationalFunction& operator-=(const RationalFunction& o);
  RationalFunction& operator*=(const RationalFunction& o);
  RationalFunction& operator/=(const RationalFunction& o);
  friend RationalFunction operator+(RationalFunction a, const RationalFunction& b) { return a += b; }
  friend RationalFunction operator-(RationalFunction a, const RationalFunction& b) { return a -= b; }
  friend RationalFunction operator*(RationalFunction a, const RationalFunction& b) { return a *= b; }
  friend RationalFunction operator/(RationalFunction a, const RationalFunction& b) { return a /= b; }

  RationalFunction substitute(const std::map<std::string, Scalar>& values) const {
    return {num_.substitute(values), den_.substitute(values)};
  }

  /// Structural equality of the normalized representation.
  bool operator==(const RationalFunction& o) const { return num_ == o.num_ && den_ == o.den_; }

  /// "u_SRC*(R1*R3 + R1*R4)/(R1*R2*R3 + ...)"; a common monomial factor of
  /// the numerator is pulled in front.
  std::string to_string() const;

 private:
  void normalize();

  MultivarPoly num_;
  MultivarPoly den_;
};

/// Parses "+ - * / ^", parentheses, decimal numbers and parameter names.
RationalFunction parse_rational_function(const std::vector<std::string>& parameters, std::string_view text);

/// Exact value; DenominatorZero when the denominator vanishes.
Scalar rf_eval(const RationalFunction& rf, const std::map<std::string, Scalar>& point);

/// Randomized identity test: equal values at `trials` seeded points with
/// integer coordinates in [10^3, 10^6]. Never wrong when it answers false;
/// a false "true" needs every point to hit a root of the difference, which
/// for numerator degree d has probability at most (d / 999001) per trial.
bool rf_equivalent(const RationalFunction& f, const RationalFunction& g, int trials = 20, std::uint64_t seed = 1);

/// Natural interval evaluation; DenominatorStraddlesZero when the
/// denominator enclosure contains 0.
interval::Interval rf_interval_eval(const RationalFunction& rf, const std::map<std::string, interval::Interval>& box);

struct SymbolicOptions {
  /// FE(5) has 223 unknowns.
  std::size_t max_variables = 223;
};

/// Every unknown of a square EQ system whose coefficients are polynomial in
/// the parameters. Unknowns with a constant coefficient are eliminated
/// first with polynomial arithmetic only; the remaining core is eliminated
/// sparsely over rational functions kept in lowest terms.
std::map<std::string, RationalFunction> solve_symbolic(const ir::ConstraintSystem& system,
                                                      const SymbolicOptions& options = {});

struct SymbolicBranch {
  ir::ModeAssignment mode;
  std::map<std::string, RationalFunction> solution;
  /// The inequalities of the branch restated over the parameters,
  /// "<rational function> >= 0". They are reported, not decided.
  std::vector<std::string> conditions;
};

/// solve_symbolic on the equations of one branch of a disjunctive system.
SymbolicBranch solve_symbolic_branch(const ir::ConstraintSystem& system, const ir::ModeAssignment& mode,
                                     const SymbolicOptions& options = {});

struct AlternateSolution {
  /// "R=90", one entry per resistor parameter with alternates.
  std::string tag;
  std::map<std::string, Scalar> fixed;
  std::map<std::string, RationalFunction> solution;
};

/// One symbolic solution per combination of resistor alternates: the
/// network is solved with every resistance symbolic, then each combination
/// is substituted. A spec without alternates yields a single entry.
std::vector<AlternateSolution> solve_symbolic_alternates(const netgen::FamilySpec& spec,
                                                         const SymbolicOptions& options = {});

}  // namespace circbench::symbolic

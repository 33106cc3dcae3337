#include <gtest/gtest.h>

#include <random>

#include "circbench/errors.hpp"
#include "circbench/interval.hpp"
#include "circbench/linsolve.hpp"
#include "circbench/modes.hpp"
#include "circbench/symbolic.hpp"

using namespace circbench;
using namespace circbench::symbolic;
using netgen::FamilySpec;

namespace {

const std::vector<std::string> kFirstParams{"u_SRC", "R1", "R2", "R3", "R4", "R5"};

// FE(1) current through the ground in reference form.
const char* const kFirstFormula =
    "u_SRC*(R1*R3 + R1*R4 + R1*R5 + R2*R3 + R2*R4 + R2*R5 + R3*R5 + R4*R5)"
    " / (R1*R2*R3 + R1*R2*R4 + R1*R2*R5 + R1*R3*R4 + R1*R4*R5 + R2*R3*R4 + R2*R3*R5 + R3*R4*R5)";

ir::ConstraintSystem symbolic_system(FamilySpec spec) {
  spec.symbolic_resistors = true;
  return ir::lower(netgen::build(spec));
}

std::map<std::string, Scalar> reference_point() {
  return {{"u_SRC", 12}, {"R1", 100}, {"R2", 200}, {"R3", 300}, {"R4", 400}, {"R5", 500}};
}

MultivarPoly var(const std::string& name) { return MultivarPoly::parameter({"x", "y"}, name); }

}  // namespace

TEST(MultivarPoly, GrlexOrderAndRendering) {
  MultivarPoly p = var("x") * var("y") + var("y") * var("y") * Scalar(2) - MultivarPoly::constant({"x", "y"}, 5);
  EXPECT_EQ(p.to_string(), "x*y + 2*y^2 - 5");
  EXPECT_EQ(p.degree(), 2u);
  EXPECT_EQ(p.leading().first, (Monomial{1, 1}));
}

TEST(MultivarPoly, ExactDivisionAndGcd) {
  MultivarPoly sum = var("x") + var("y"), diff = var("x") - var("y");
  EXPECT_EQ(*(sum * diff).exact_divide(diff), sum);
  EXPECT_FALSE((sum * diff + var("x")).exact_divide(diff).has_value());
  EXPECT_EQ(gcd(sum * diff * Scalar(6), sum * sum * Scalar(4)), sum);
  EXPECT_TRUE(gcd(sum, diff).is_constant());
  EXPECT_EQ(gcd(var("x") * var("y"), var("x") * var("x") + var("x")), var("x"));
}

TEST(RationalFunction, NormalizationIsIdempotent) {
  std::vector<RationalFunction> samples = {
      parse_rational_function(kFirstParams, kFirstFormula),
      parse_rational_function(kFirstParams, "(2*R1^2 - 2*R2^2)/(4*R1 + 4*R2)"),
      parse_rational_function(kFirstParams, "-u_SRC/(3*R1)"),
      parse_rational_function(kFirstParams, "0/R1"),
  };
  for (const auto& f : samples) {
    RationalFunction again(f.numerator(), f.denominator());
    EXPECT_EQ(again, f) << f.to_string();
    EXPECT_EQ(parse_rational_function(kFirstParams, f.to_string()), f) << f.to_string();
    EXPECT_GT(f.denominator().leading().second, 0);
  }
  EXPECT_EQ(samples[1].to_string(), "(R1 - R2)/2");
  EXPECT_EQ(samples[2].to_string(), "-u_SRC/(3*R1)");
  EXPECT_EQ(samples[3].to_string(), "0");
}

TEST(RationalFunction, ParseErrors) {
  EXPECT_THROW(parse_rational_function(kFirstParams, "R9 + 1"), ParseError);
  EXPECT_THROW(parse_rational_function(kFirstParams, "(R1 + 1"), ParseError);
  EXPECT_THROW(parse_rational_function(kFirstParams, "R1/0"), DenominatorZero);
}

TEST(SolveSymbolic, BabyExample) {
  auto sol = solve_symbolic(symbolic_system(FamilySpec::baby()));
  EXPECT_EQ(sol.at("i_GND").to_string(), "u_SRC/R");
  EXPECT_EQ(rf_eval(sol.at("i_GND"), {{"u_SRC", 12}, {"R", 100}}), ratio(3, 25));
  EXPECT_THROW(rf_eval(sol.at("i_GND"), {{"u_SRC", 12}, {"R", 0}}), DenominatorZero);
  EXPECT_EQ(rf_eval(sol.at("u_GND"), {{"u_SRC", 12}, {"R", 7}}), 0);
}

TEST(SolveSymbolic, FirstFamilyMatchesReferenceFormula) {
  auto sol = solve_symbolic(symbolic_system(FamilySpec::first(1)));
  RationalFunction reference = parse_rational_function(kFirstParams, kFirstFormula);
  const RationalFunction& i = sol.at("i_GND");
  EXPECT_EQ(i.numerator().size(), 8u);
  EXPECT_EQ(i.denominator().size(), 8u);
  EXPECT_TRUE(rf_equivalent(i, reference, 20, 11));
  EXPECT_EQ(i, reference);
  EXPECT_EQ(i.to_string(),
            "u_SRC*(R1*R3 + R1*R4 + R1*R5 + R2*R3 + R2*R4 + R2*R5 + R3*R5 + R4*R5)/(R1*R2*R3 + R1*R2*R4 + R1*R2*R5 + "
            "R1*R3*R4 + R1*R4*R5 + R2*R3*R4 + R2*R3*R5 + R3*R4*R5)");
  EXPECT_EQ(rf_eval(i, reference_point()), ratio(213, 4250));
}

TEST(SolveSymbolic, AgreesWithExactSolveAtRandomPoints) {
  auto sol = solve_symbolic(symbolic_system(FamilySpec::first(1)));
  std::mt19937_64 rng(424242);
  std::uniform_int_distribution<long> num(1, 1000000), den(1, 1000);
  for (int trial = 0; trial < 20; ++trial) {
    FamilySpec spec = FamilySpec::first(1);
    std::map<std::string, Scalar> point;
    spec.source_voltage = ratio(num(rng), den(rng));
    point["u_SRC"] = spec.source_voltage;
    for (int j = 0; j < 5; ++j) {
      spec.resistors[j].nominal = ratio(num(rng), den(rng));
      point["R" + std::to_string(j + 1)] = spec.resistors[j].nominal;
    }
    linsolve::ExactAssignment x = linsolve::solve_exact(ir::lower(netgen::build(spec)));
    for (const auto& [name, v] : x.values) {
      if (name == "u_SRC") continue;
      ASSERT_EQ(rf_eval(sol.at(name), point), v) << name << " trial " << trial;
    }
  }
}

TEST(SolveSymbolic, ChainScalingIdentity) {
  RationalFunction one = solve_symbolic(symbolic_system(FamilySpec::first(1))).at("i_GND");
  for (int n = 2; n <= 5; ++n) {
    RationalFunction i = solve_symbolic(symbolic_system(FamilySpec::first(n))).at("i_GND");
    RationalFunction scaled = i * RationalFunction::from_poly(MultivarPoly::constant(kFirstParams, n));
    EXPECT_TRUE(rf_equivalent(scaled, one, 20, 100 + n)) << "n=" << n;
    EXPECT_EQ(scaled, one) << "n=" << n;
  }
}

TEST(SolveSymbolic, SizeCapAndStructuralErrors) {
  EXPECT_THROW(solve_symbolic(symbolic_system(FamilySpec::first(6))), SizeCap);
  EXPECT_THROW(solve_symbolic(symbolic_system(FamilySpec::second(1))), HasDisjunctions);

  ir::ConstraintSystem s;
  s.variables = {"x", "y"};
  s.parameters = {"a"};
  s.conjuncts = {ir::make_constraint({{"x", 1}, {"y", 1}}, ir::Relation::EQ, 1, "first"),
                 ir::make_constraint({{"x", 2}, {"y", 2}}, ir::Relation::EQ, 2, "second")};
  EXPECT_THROW(solve_symbolic(s), SingularSymbolic);
  s.conjuncts[1] = ir::make_constraint({{"x", 1}}, ir::Relation::EQ, 0, "second");
  s.conjuncts[1].product(1, "a", "y");
  auto sol = solve_symbolic(s);
  EXPECT_EQ(sol.at("y").to_string(), "-1/(a - 1)");
}

TEST(SolveSymbolic, SecondFamilyChosenBranch) {
  for (int n = 1; n <= 2; ++n) {
    ir::ConstraintSystem numeric = ir::lower(netgen::build(FamilySpec::second(n)));
    modes::SearchResult r = modes::search_first(numeric);
    SymbolicBranch b = solve_symbolic_branch(symbolic_system(FamilySpec::second(n)), r.mode);
    RationalFunction expected = parse_rational_function(b.solution.at("i_GND").parameters(),
                                                        n == 1 ? "u_SRC/R2" : "u_SRC/(2*R2)");
    EXPECT_EQ(b.solution.at("i_GND"), expected) << b.solution.at("i_GND").to_string();
    EXPECT_EQ(b.conditions.size(), static_cast<std::size_t>(2 * n));
  }
}

TEST(SolveSymbolicAlternates, OneSolutionPerValue) {
  FamilySpec s = FamilySpec::baby();
  s.resistors[0].alternates = {Scalar(90), Scalar(110)};
  auto list = solve_symbolic_alternates(s);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0].tag, "R=90");
  EXPECT_EQ(list[0].solution.at("i_GND").to_string(), "u_SRC/90");
  EXPECT_EQ(list[1].solution.at("i_GND").to_string(), "u_SRC/110");
  EXPECT_EQ(solve_symbolic_alternates(FamilySpec::baby()).size(), 1u);
}

TEST(RfEquivalent, DistinguishesParameters) {
  std::vector<std::string> p{"u_SRC", "R", "R2"};
  RationalFunction f = parse_rational_function(p, "u_SRC/R"), g = parse_rational_function(p, "u_SRC/R2");
  EXPECT_FALSE(rf_equivalent(f, g));
  EXPECT_TRUE(rf_equivalent(f, f));
  EXPECT_TRUE(rf_equivalent(f, parse_rational_function(p, "(u_SRC*R2)/(R*R2)")));
  RationalFunction c = parse_rational_function(p, "7/3");
  EXPECT_EQ(rf_eval(c, {{"u_SRC", 1}, {"R", 2}, {"R2", 3}}), ratio(7, 3));
}

TEST(RfIntervalEval, BabyRangeIsExact) {
  RationalFunction f = parse_rational_function({"u_SRC", "R"}, "u_SRC/R");
  interval::Interval i = rf_interval_eval(f, {{"u_SRC", interval::Interval(12)}, {"R", interval::Interval(90, 110)}});
  EXPECT_TRUE(i.contains(ratio(12, 110)));
  EXPECT_TRUE(i.contains(ratio(12, 90)));
  EXPECT_NEAR(i.lo(), 12.0 / 110, 1e-15);
  EXPECT_NEAR(i.hi(), 12.0 / 90, 1e-15);
  EXPECT_THROW(rf_interval_eval(f, {{"u_SRC", interval::Interval(12)}, {"R", interval::Interval(-1, 1)}}),
               DenominatorStraddlesZero);
}

TEST(RfIntervalEval, DegenerateBoxMatchesPointValue) {
  RationalFunction f = parse_rational_function(kFirstParams, kFirstFormula);
  std::map<std::string, interval::Interval> box;
  for (const auto& [name, v] : reference_point()) box[name] = interval::Interval::from_scalar(v);
  interval::Interval i = rf_interval_eval(f, box);
  EXPECT_TRUE(i.contains(ratio(213, 4250)));
  EXPECT_LT(i.width(), 1e-12);
}

TEST(RfIntervalEval, FirstFamilyEnclosesRangeOracle) {
  RationalFunction f = solve_symbolic(symbolic_system(FamilySpec::first(1))).at("i_GND");
  std::map<std::string, interval::Interval> box{{"u_SRC", interval::Interval(12)}};
  for (int j = 1; j <= 5; ++j) box["R" + std::to_string(j)] = interval::Interval::hull(ratio(90 * j, 1), ratio(110 * j, 1));
  interval::Interval i = rf_interval_eval(f, box);
  auto oracle = interval::range_oracle(FamilySpec::first(1), ratio(1, 10), 20, 5);
  EXPECT_TRUE(i.contains(oracle.at("i_GND").lo));
  EXPECT_TRUE(i.contains(oracle.at("i_GND").hi));
}

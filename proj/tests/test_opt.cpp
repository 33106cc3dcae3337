#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "circbench/errors.hpp"
#include "circbench/linsolve.hpp"
#include "circbench/opt.hpp"
#include "lp_oracle.hpp"

using namespace circbench;
using namespace circbench::opt;
using netgen::FamilySpec;
using namespace lp_oracle;

namespace {

ir::ConstraintSystem baby() { return ir::lower(netgen::build(FamilySpec::baby())); }

ir::ConstraintSystem baby_pair(netgen::ToleranceForm form) {
  FamilySpec s = FamilySpec::baby();
  s.with_tolerance(ratio(1, 10));
  s.tolerance_form = form;
  return ir::lower(netgen::build(s));
}

ir::ConstraintSystem baby_alternates() {
  FamilySpec s = FamilySpec::baby();
  s.resistors[0].alternates = {Scalar(90), Scalar(110)};
  return ir::lower(netgen::build(s));
}

}  // namespace

TEST(Optimize, MinEqualsMaxOnSquareSystem) {
  OptResult lo = optimize(baby(), minimize("i_GND")), hi = optimize(baby(), maximize("i_GND"));
  ASSERT_EQ(lo.status, Status::Optimal);
  EXPECT_EQ(*lo.exact_value, ratio(12, 100));
  EXPECT_EQ(*hi.exact_value, ratio(12, 100));
  auto fe = ir::lower(netgen::build(FamilySpec::first(1)));
  linsolve::ExactAssignment x = linsolve::solve_exact(fe);
  for (const char* v : {"i_GND", "i1_R3_B1", "u2_R5_B1", "i_SRC"}) {
    EXPECT_EQ(*optimize(fe, minimize(v)).exact_value, x.at(v)) << v;
    EXPECT_EQ(*optimize(fe, maximize(v)).exact_value, x.at(v)) << v;
  }
}

TEST(Optimize, InequalityPairEndpoints) {
  auto sys = baby_pair(netgen::ToleranceForm::InequalityPair);
  OptResult lo = optimize(sys, minimize("i_GND")), hi = optimize(sys, maximize("i_GND"));
  EXPECT_EQ(*lo.exact_value, ratio(12, 110));
  EXPECT_EQ(*hi.exact_value, ratio(12, 90));
  EXPECT_NEAR(hi.argpoint.at("i_GND"), 12.0 / 90, 1e-12);
}

TEST(Optimize, StrictRelationsRejected) {
  try {
    optimize(baby_pair(netgen::ToleranceForm::StrictInequalityPair), minimize("i_GND"));
    FAIL() << "expected UnsupportedStrict";
  } catch (const UnsupportedStrict& e) {
    EXPECT_NE(std::string(e.what()).find("BLO4"), std::string::npos);
  }
}

TEST(Optimize, InfeasibleAndUnbounded) {
  ir::ConstraintSystem s;
  s.variables = {"x"};
  s.conjuncts = {ir::make_constraint({{"x", 1}}, ir::Relation::GE, 1, "lo"),
                 ir::make_constraint({{"x", 1}}, ir::Relation::LE, 0, "hi")};
  EXPECT_EQ(optimize(s, minimize("x")).status, Status::Infeasible);
  s.conjuncts.pop_back();
  EXPECT_EQ(optimize(s, maximize("x")).status, Status::Unbounded);
  EXPECT_EQ(*optimize(s, minimize("x")).exact_value, 1);
}

TEST(Optimize, ConstantObjective) {
  ir::Objective o;
  o.constant = 5;
  OptResult r = optimize(baby_pair(netgen::ToleranceForm::InequalityPair), o);
  ASSERT_EQ(r.status, Status::Optimal);
  EXPECT_EQ(*r.exact_value, 5);
}

TEST(Optimize, NonlinearBabyAfterPresolve) {
  FamilySpec s = FamilySpec::baby();
  s.nonlinear_resistors = true;
  EXPECT_EQ(*optimize(ir::lower(netgen::build(s)), maximize("i_GND")).exact_value, ratio(12, 100));
}

TEST(Optimize, RejectsDisjunctionsAndUnknownObjective) {
  EXPECT_THROW(optimize(baby_alternates(), minimize("i_GND")), HasDisjunctions);
  EXPECT_THROW(optimize(baby(), minimize("nope")), MissingVariable);
}

TEST(Optimize, AgreesWithVertexEnumeration) {
  std::mt19937_64 rng(1999);
  OptOptions exact, fl;
  fl.check.backend = modes::Backend::Float;
  for (int trial = 0; trial < 50; ++trial) {
    RandomLp lp = random_lp(rng);
    double expected = vertex_minimum(lp);
    ir::Objective o;
    for (int i = 0; i < lp.n; ++i)
      if (lp.c[i] != 0) o.terms["x" + std::to_string(i)] = from_double(lp.c[i]);
    ir::ConstraintSystem s = as_system(lp);
    OptResult a = optimize(s, o, exact), b = optimize(s, o, fl);
    ASSERT_EQ(a.status, Status::Optimal) << "trial " << trial;
    ASSERT_EQ(b.status, Status::Optimal) << "trial " << trial;
    EXPECT_NEAR(a.value, expected, 1e-8) << "trial " << trial;
    EXPECT_NEAR(b.value, expected, 1e-8) << "trial " << trial;
  }
}

TEST(OptimizeDisjunctive, ResistorAlternates) {
  OptResult hi = optimize_disjunctive(baby_alternates(), maximize("i_GND"));
  OptResult lo = optimize_disjunctive(baby_alternates(), minimize("i_GND"));
  EXPECT_EQ(*hi.exact_value, ratio(12, 90));
  EXPECT_EQ(*lo.exact_value, ratio(12, 110));
  ASSERT_TRUE(hi.mode && lo.mode);
  EXPECT_EQ(hi.mode->front().tag, "R=90");
  EXPECT_EQ(lo.mode->front().tag, "R=110");
}

TEST(OptimizeDisjunctive, SingleBranchMatchesOptimize) {
  auto sys = baby_pair(netgen::ToleranceForm::InequalityPair);
  EXPECT_EQ(*optimize_disjunctive(sys, minimize("i_GND")).exact_value,
            *optimize(sys, minimize("i_GND")).exact_value);
}

TEST(OptimizeDisjunctive, SecondFamilyUniqueLeaf) {
  auto sys = ir::lower(netgen::build(FamilySpec::second(1)));
  OptResult r = optimize_disjunctive(sys, minimize("i_GND"));
  EXPECT_EQ(*r.exact_value, ratio(12, 100));
  EXPECT_EQ(ir::to_string(*r.mode), "D1_B1=Blocking D4_B1=Conducting");
}

TEST(OptimizeDisjunctive, EqualsExhaustiveLeaves) {
  for (auto o : {netgen::Orientation::Figure, netgen::Orientation::Literal}) {
    for (int n = 1; n <= 3; ++n) {
      auto sys = ir::lower(netgen::build(FamilySpec::second(n, o)));
      auto leaves = modes::enumerate_feasible(sys);
      for (const char* v : {"i_GND", "u1_R3_B1", "i1_D4_B1"}) {
        Scalar lo = leaves.front().exact->at(v), hi = lo;
        for (const auto& leaf : leaves) {
          lo = std::min(lo, leaf.exact->at(v));
          hi = std::max(hi, leaf.exact->at(v));
        }
        EXPECT_EQ(*optimize_disjunctive(sys, minimize(v)).exact_value, lo) << v << " n=" << n;
        EXPECT_EQ(*optimize_disjunctive(sys, maximize(v)).exact_value, hi) << v << " n=" << n;
      }
    }
  }
}

TEST(OptimizeDisjunctive, UnsatisfiableWithoutFeasibleLeaf) {
  auto sys = ir::lower(netgen::build(FamilySpec::second(1)));
  sys.conjuncts.push_back(ir::make_constraint({{"i_GND", 1}}, ir::Relation::GE, 1, "impossible"));
  EXPECT_THROW(optimize_disjunctive(sys, minimize("i_GND")), Unsatisfiable);
}

TEST(OptimizeInterval, BabyEndpoints) {
  auto sys = baby_pair(netgen::ToleranceForm::IntervalCoefficient);
  EXPECT_EQ(*optimize_interval(sys, minimize("i_GND")).exact_value, ratio(12, 110));
  EXPECT_EQ(*optimize_interval(sys, maximize("i_GND")).exact_value, ratio(12, 90));
}

TEST(OptimizeInterval, UnconfirmedRangeUnsupported) {
  FamilySpec s = FamilySpec::first(1);
  s.with_tolerance(ratio(1, 10));
  EXPECT_THROW(optimize_interval(ir::lower(netgen::build(s)), minimize("i_GND")), UnsupportedFeature);
}

TEST(Diagnose, BabyCorrectWithoutMeasurements) {
  auto sys = baby();
  Diagnosis d = diagnose(sys, DiagnosisModel::instrument_all(sys));
  EXPECT_EQ(d.probability, ratio(9, 10));
  EXPECT_TRUE(d.faults.empty());
  EXPECT_EQ(d.mode.front().tag, "Correct");
  EXPECT_NEAR(d.assignment.at("i1_R"), 0.12, 1e-12);
  EXPECT_NEAR(d.log_probability, std::log(0.9), 1e-12);
}

TEST(Diagnose, BabyOpenFault) {
  auto sys = baby();
  DiagnosisModel m = DiagnosisModel::instrument_all(sys);
  m.measure("i2_R", 0);
  Diagnosis d = diagnose(sys, m);
  EXPECT_EQ(d.probability, ratio(1, 10));
  EXPECT_EQ(d.faults, std::vector<std::string>{"R"});
}

TEST(Diagnose, FirstFamilyAllCorrect) {
  auto sys = ir::lower(netgen::build(FamilySpec::first(1)));
  DiagnosisModel m = DiagnosisModel::instrument_all(sys);
  EXPECT_EQ(m.components.size(), 5u);
  Diagnosis d = diagnose(sys, m);
  EXPECT_EQ(d.probability, ratio(59049, 100000));
}

TEST(Diagnose, MeasurementsNeverRaiseProbability) {
  auto sys = ir::lower(netgen::build(FamilySpec::first(1)));
  DiagnosisModel m = DiagnosisModel::instrument_all(sys);
  Scalar previous = diagnose(sys, m).probability;
  m.measure("i1_R3_B1", 0);
  Diagnosis d = diagnose(sys, m);
  EXPECT_LE(d.probability, previous);
  EXPECT_FALSE(d.faults.empty());
  previous = d.probability;
  m.measure("i_GND", 0);
  d = diagnose(sys, m);
  EXPECT_LE(d.probability, previous);
}

TEST(Diagnose, TiesPickSmallestFaultSet) {
  auto sys = ir::lower(netgen::build(FamilySpec::first(1)));
  DiagnosisModel m = DiagnosisModel::instrument_all(sys);
  m.measure("i_GND", 0);
  Diagnosis d = diagnose(sys, m);
  // the two-fault cuts tie; {R1, R2} sorts first
  EXPECT_EQ(d.faults, (std::vector<std::string>{"R1_B1", "R2_B1"}));
  EXPECT_EQ(d.probability, ratio(729, 100000));
}

TEST(Diagnose, SecondFamilyKeepsDiodeModes) {
  auto sys = ir::lower(netgen::build(FamilySpec::second(2)));
  Diagnosis d = diagnose(sys, DiagnosisModel::instrument_all(sys));
  EXPECT_TRUE(d.faults.empty());
  EXPECT_EQ(d.probability, ratio(9, 10) * ratio(9, 10) * ratio(9, 10) * ratio(9, 10) * ratio(9, 10) * ratio(9, 10) *
                               ratio(9, 10) * ratio(9, 10) * ratio(9, 10) * ratio(9, 10));
  EXPECT_NEAR(d.assignment.at("i_GND"), 0.06, 1e-12);
}

TEST(Diagnose, ContradictionUnsatisfiable) {
  auto sys = baby();
  DiagnosisModel m = DiagnosisModel::instrument_all(sys);
  m.measure("u_SRC", 5);
  EXPECT_THROW(diagnose(sys, m), Unsatisfiable);
}

TEST(Diagnose, InvalidModelRejected) {
  auto sys = baby();
  DiagnosisModel m = DiagnosisModel::instrument_all(sys);
  m.correct_weight = 1;
  EXPECT_THROW(diagnosis_system(sys, m), InvalidSpec);
  m = DiagnosisModel::instrument_all(sys);
  m.components.push_back("R");
  EXPECT_THROW(diagnosis_system(sys, m), InvalidSpec);
  m.components = {"Q7"};
  EXPECT_THROW(diagnosis_system(sys, m), InvalidSpec);
}

#include <gtest/gtest.h>

#include <random>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"
#include "circbench/linsolve.hpp"

using namespace circbench;
using namespace circbench::ir;
using netgen::FamilySpec;

namespace {

ConstraintSystem baby(void (*tweak)(FamilySpec&) = nullptr) {
  FamilySpec s = FamilySpec::baby();
  if (tweak) tweak(s);
  return lower(netgen::build(s));
}

}  // namespace

TEST(Lower, BabyListing) {
  ConstraintSystem sys = baby();
  const std::vector<std::string> expected = {
      "u_SRC = 12",       "i1_R + i_SRC = 0",  "-u1_R + u_SRC = 0", "i1_R + i2_R = 0",
      "-100*i1_R + u1_R - u2_R = 0", "i2_R + i_GND = 0", "u2_R - u_GND = 0", "u_GND = 0"};
  ASSERT_EQ(sys.conjuncts.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_EQ(to_string(sys.conjuncts[k]), expected[k]);
  EXPECT_TRUE(sys.is_square());
}

TEST(Lower, FirstFamilyIsSquare) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::first(1)));
  EXPECT_EQ(sys.conjuncts.size(), 48u);
  EXPECT_TRUE(sys.is_square());
}

TEST(Lower, SecondFamilyCounts) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::second(1)));
  EXPECT_EQ(sys.conjuncts.size(), 46u);
  EXPECT_EQ(sys.disjunctions.size(), 2u);
  for (const auto& c : sys.conjuncts) EXPECT_EQ(c.relation, Relation::EQ);
  for (const auto& d : sys.disjunctions) {
    ASSERT_EQ(d.branches.size(), 2u);
    EXPECT_EQ(d.branch_tags, (std::vector<std::string>{"Conducting", "Blocking"}));
    EXPECT_EQ(d.branches[1][0].relation, Relation::LT);
  }
}

TEST(Lower, ToleranceBecomesCoefficientInterval) {
  ConstraintSystem sys = baby([](FamilySpec& s) { s.with_tolerance(ratio(1, 10)); });
  const LinearConstraint& law = sys.conjuncts[4];
  ASSERT_EQ(law.interval_coeffs.count("i1_R"), 1u);
  EXPECT_EQ(law.interval_coeffs.at("i1_R"), (CoeffInterval{Scalar(-110), Scalar(-90)}));
  EXPECT_EQ(law.terms.at("i1_R"), Scalar(-100));
}

TEST(Lower, InequalityPairForm) {
  ConstraintSystem sys = baby([](FamilySpec& s) {
    s.with_tolerance(ratio(1, 10));
    s.tolerance_form = netgen::ToleranceForm::InequalityPair;
  });
  EXPECT_EQ(sys.conjuncts.size(), 9u);
  EXPECT_EQ(to_string(sys.conjuncts[4]), "-90*i1_R + u1_R - u2_R >= 0");
  EXPECT_EQ(to_string(sys.conjuncts[5]), "-110*i1_R + u1_R - u2_R <= 0");
}

TEST(Lower, AlternatesBecomeDisjunction) {
  ConstraintSystem sys = baby([](FamilySpec& s) { s.resistors[0].alternates = {Scalar(90), Scalar(110)}; });
  ASSERT_EQ(sys.disjunctions.size(), 1u);
  EXPECT_EQ(sys.disjunctions[0].branch_tags, (std::vector<std::string>{"R=90", "R=110"}));
  EXPECT_EQ(sys.conjuncts.size(), 7u);
}

TEST(Lower, SymbolicKeepsParameters) {
  ConstraintSystem sys = baby([](FamilySpec& s) { s.symbolic_resistors = true; });
  EXPECT_EQ(sys.parameters, (std::vector<std::string>{"u_SRC", "R"}));
  EXPECT_EQ(sys.variables.size(), 7u);
  EXPECT_EQ(sys.conjuncts.size(), 7u);
}

TEST(Presolve, NonlinearBabyBecomesLinearBaby) {
  ConstraintSystem nonlinear = baby([](FamilySpec& s) { s.nonlinear_resistors = true; });
  ASSERT_EQ(nonlinear.conjuncts.size(), 9u);
  ConstraintSystem linear = baby();
  ConstraintSystem reduced = presolve(nonlinear);
  EXPECT_EQ(reduced.variables, linear.variables);
  EXPECT_EQ(reduced.conjuncts, linear.conjuncts);
}

TEST(Presolve, NonlinearToleranceCarriesInterval) {
  ConstraintSystem sys = presolve(baby([](FamilySpec& s) {
    s.nonlinear_resistors = true;
    s.with_tolerance(ratio(1, 10));
  }));
  const LinearConstraint& law = sys.conjuncts[4];
  EXPECT_EQ(law.interval_coeffs.at("i1_R"), (CoeffInterval{Scalar(-110), Scalar(-90)}));
}

TEST(Presolve, NonlinearAlternatesScaleTheLaw) {
  ConstraintSystem sys = presolve(baby([](FamilySpec& s) {
    s.nonlinear_resistors = true;
    s.resistors[0].alternates = {Scalar(90), Scalar(110)};
  }));
  ASSERT_EQ(sys.disjunctions.size(), 1u);
  EXPECT_EQ(to_string(sys.disjunctions[0].branches[0][0]), "-90*i1_R + u1_R - u2_R = 0");
  EXPECT_EQ(to_string(sys.disjunctions[0].branches[1][0]), "-110*i1_R + u1_R - u2_R = 0");
  EXPECT_FALSE(sys.has_variable("R"));
}

TEST(Presolve, LinearSystemUnchanged) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::first(2)));
  EXPECT_EQ(presolve(sys), sys);
}

TEST(Presolve, ProductOfUnknownsRejected) {
  ConstraintSystem sys;
  sys.variables = {"x", "y"};
  LinearConstraint c;
  c.product(1, "x", "y");
  c.rhs = 1;
  sys.conjuncts.push_back(c);
  try {
    presolve(sys);
    FAIL() << "expected NonlinearResidue";
  } catch (const NonlinearResidue& e) {
    EXPECT_NE(std::string(e.what()).find("x*y"), std::string::npos);
  }
}

TEST(Presolve, PairEliminationPreservesSolutions) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> value(10, 1000);
  for (int trial = 0; trial < 100; ++trial) {
    FamilySpec spec = FamilySpec::first(1);
    for (auto& r : spec.resistors) r.nominal = ratio(value(rng), 1 + value(rng) % 7);
    spec.source_voltage = ratio(value(rng), 10);
    ConstraintSystem sys = lower(netgen::build(spec));
    Presolved pre = presolve_with_postsolve(sys, {.eliminate_pairs = true});
    ASSERT_LT(pre.system.variables.size(), sys.variables.size());
    ASSERT_TRUE(pre.system.is_square());
    auto full = linsolve::solve_exact(sys);
    auto reduced = linsolve::solve_exact(pre.system);
    for (const auto& [name, v] : reduced.values) ASSERT_EQ(v, full.at(name)) << name;
    std::map<std::string, Scalar> restored = reduced.values;
    postsolve(pre.substitutions, restored);
    ASSERT_EQ(restored, full.values);
  }
}

TEST(Branches, CountsAndOrder) {
  ConstraintSystem se1 = lower(netgen::build(FamilySpec::second(1)));
  ConstraintSystem se2 = lower(netgen::build(FamilySpec::second(2)));
  EXPECT_EQ(branches(se1).size(), 4u);
  EXPECT_EQ(branches(se2).size(), 16u);
  std::vector<std::string> modes;
  for (auto it = branches(se1).begin(); it != branches(se1).end(); ++it) modes.push_back(to_string((*it).second));
  EXPECT_EQ(modes, (std::vector<std::string>{"D1_B1=Conducting D4_B1=Conducting", "D1_B1=Conducting D4_B1=Blocking",
                                             "D1_B1=Blocking D4_B1=Conducting", "D1_B1=Blocking D4_B1=Blocking"}));
  std::size_t count = 0;
  for (auto it = branches(se2).begin(); it != branches(se2).end(); ++it) {
    auto [system, mode] = *it;
    EXPECT_EQ(system.conjuncts.size(), se2.conjuncts.size() + 8);
    EXPECT_TRUE(system.disjunctions.empty());
    ++count;
  }
  EXPECT_EQ(count, 16u);

  ConstraintSystem be = baby();
  count = 0;
  for (auto it = branches(be).begin(); it != branches(be).end(); ++it) ++count;
  EXPECT_EQ(count, 1u);
}

TEST(Indicators, ResistorAlternatives) {
  ConstraintSystem sys = baby([](FamilySpec& s) { s.resistors[0].alternates = {Scalar(90), Scalar(110)}; });
  ConstraintSystem enc = encode_indicators(sys);
  EXPECT_EQ(enc.binaries.size(), 2u);
  EXPECT_TRUE(enc.disjunctions.empty());
  ASSERT_EQ(enc.conjuncts.size(), sys.conjuncts.size() + 5);
  int le = 0, ge = 0;
  for (std::size_t k = sys.conjuncts.size(); k + 1 < enc.conjuncts.size(); ++k) {
    le += enc.conjuncts[k].relation == Relation::LE;
    ge += enc.conjuncts[k].relation == Relation::GE;
    EXPECT_EQ(enc.conjuncts[k].terms.size(), 4u);
  }
  EXPECT_EQ(le, 2);
  EXPECT_EQ(ge, 2);
  const LinearConstraint& sum = enc.conjuncts.back();
  EXPECT_EQ(sum.relation, Relation::GE);
  EXPECT_EQ(sum.rhs, 1);
  EXPECT_EQ(sum.terms.size(), 2u);
}

TEST(Indicators, NoDisjunctionsUnchanged) {
  ConstraintSystem sys = baby();
  EXPECT_EQ(encode_indicators(sys), sys);
}

TEST(Indicators, StrictBranchRejected) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::second(1)));
  EXPECT_THROW(encode_indicators(sys), UnsupportedStrict);
}

TEST(InstanceIo, RoundTrip) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::first(10)));
  std::string text = to_instance_text(sys);
  ConstraintSystem back = from_instance_text(text);
  EXPECT_EQ(back, sys);
  EXPECT_EQ(to_instance_text(back), text);

  ConstraintSystem rich = baby([](FamilySpec& s) {
    s.nonlinear_resistors = true;
    s.with_tolerance(ratio(1, 3));
    s.resistors[0].alternates = {Scalar(90), Scalar(110)};
  });
  rich.objective = Objective{{{"i_GND", ratio(-1, 3)}}, Scalar(2), Sense::Maximize};
  rich.disjunctions[0].branch_weights = {ratio(9, 10), ratio(1, 10)};
  EXPECT_EQ(from_instance_text(to_instance_text(rich)), rich);
}

TEST(InstanceIo, FileRoundTrip) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::second(2)));
  auto path = std::filesystem::temp_directory_path() / "circbench_roundtrip.csi";
  save_instance(sys, path);
  EXPECT_EQ(load_instance(path), sys);
  std::filesystem::remove(path);
}

TEST(InstanceIo, TruncatedFileRejected) {
  std::string text = to_instance_text(baby());
  std::string truncated = text.substr(0, text.size() / 2);
  truncated = truncated.substr(0, truncated.rfind('\n') + 1);
  try {
    from_instance_text(truncated);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 0u);
  }
}

TEST(InstanceIo, UnknownVersionRejected) {
  std::string text = to_instance_text(baby());
  text.replace(text.find(" 1\n"), 3, " 7\n");
  EXPECT_THROW(from_instance_text(text), VersionError);
}

TEST(InstanceIo, BadNumberReportsLine) {
  std::string text = to_instance_text(baby());
  auto pos = text.find("term 1 u_SRC");
  text.replace(pos, 6, "term x");
  try {
    from_instance_text(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    std::size_t line = 1 + std::count(text.begin(), text.begin() + pos, '\n');
    EXPECT_EQ(e.line(), line);
  }
}

TEST(LpExport, BabyExport) {
  std::string lp = to_lp_text(baby());
  EXPECT_NE(lp.find("Minimize\n obj: 0 i_SRC"), std::string::npos);
  EXPECT_NE(lp.find(" c5: - 100 i1_R + 1 u1_R - 1 u2_R = 0"), std::string::npos);
  EXPECT_NE(lp.find(" i_GND free"), std::string::npos);
  EXPECT_NE(lp.find("End"), std::string::npos);
}

TEST(LpExport, ObjectiveEmitted) {
  ConstraintSystem sys = baby();
  sys.objective = Objective{{{"i_GND", Scalar(1)}}, Scalar(0), Sense::Maximize};
  std::string lp = to_lp_text(sys);
  EXPECT_NE(lp.find("Maximize\n obj: 1 i_GND\n"), std::string::npos);
}

TEST(LpExport, IndicatorsExportBinaries) {
  ConstraintSystem sys = baby([](FamilySpec& s) { s.resistors[0].alternates = {Scalar(90), Scalar(110)}; });
  std::string lp = to_lp_text(encode_indicators(sys));
  EXPECT_NE(lp.find("Binaries\n y_R_1\n y_R_2\n"), std::string::npos);
  EXPECT_EQ(lp.find("y_R_1 free"), std::string::npos);
}

TEST(LpExport, UnsupportedFeaturesNamed) {
  EXPECT_THROW(to_lp_text(baby([](FamilySpec& s) { s.with_tolerance(ratio(1, 10)); })), UnsupportedFeature);
  EXPECT_THROW(to_lp_text(lower(netgen::build(FamilySpec::second(1)))), UnsupportedFeature);
  EXPECT_THROW(to_lp_text(baby([](FamilySpec& s) {
                 s.with_tolerance(ratio(1, 10));
                 s.tolerance_form = netgen::ToleranceForm::StrictInequalityPair;
               })),
               UnsupportedStrict);
}

TEST(Validate, RejectsUndeclaredNames) {
  ConstraintSystem sys = baby();
  sys.conjuncts[0].add("nope", 1);
  EXPECT_THROW(sys.validate(), StructuralError);
}

TEST(Instantiate, ModeMustMatch) {
  ConstraintSystem sys = lower(netgen::build(FamilySpec::second(1)));
  EXPECT_THROW(instantiate(sys, std::vector<std::size_t>{0}), DimensionMismatch);
  ModeAssignment mode = make_mode(sys, {1, 0});
  EXPECT_EQ(to_string(mode), "D1_B1=Blocking D4_B1=Conducting");
  ConstraintSystem leaf = instantiate(sys, mode);
  EXPECT_EQ(leaf.conjuncts.size(), 50u);
}

#include <gtest/gtest.h>

#include <sstream>

#include "circbench/errors.hpp"
#include "circbench/harness.hpp"

using namespace circbench;
using namespace circbench::harness;
using netgen::Family;

namespace {

SuiteConfig quick(Family family, std::vector<int> n_list) {
  SuiteConfig c = SuiteConfig::defaults(family);
  c.n_list = std::move(n_list);
  c.repetitions = 1;
  return c;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

TEST(SuiteConfig, Validation) {
  SuiteConfig c;
  EXPECT_EQ(c.n_list, chain_n_list());
  EXPECT_EQ(c.repetitions, 5);
  EXPECT_NO_THROW(c.validate());
  c.n_list.clear();
  EXPECT_THROW(c.validate(), InvalidSpec);
  c = SuiteConfig{};
  c.repetitions = 0;
  EXPECT_THROW(c.validate(), InvalidSpec);
  c = SuiteConfig{};
  c.tolerances = {Scalar(1)};
  EXPECT_THROW(c.validate(), InvalidSpec);
  c = SuiteConfig::defaults(Family::BE);
  c.n_list = {2};
  EXPECT_THROW(c.validate(), InvalidSpec);
  EXPECT_THROW(parse_backend("gpu"), InvalidSpec);
}

TEST(ClosedForm, Families) {
  EXPECT_EQ(*closed_form(Family::FE, netgen::Orientation::Figure, 1, 12), ratio(852, 17000));
  EXPECT_EQ(*closed_form(Family::BE, netgen::Orientation::Figure, 1, 12), ratio(12, 100));
  EXPECT_EQ(*closed_form(Family::SE, netgen::Orientation::Figure, 5, 12), ratio(12, 500));
  EXPECT_FALSE(closed_form(Family::SE, netgen::Orientation::Literal, 1, 12).has_value());
}

TEST(RunSuite, FirstFamilyRows) {
  Report r = run_suite(quick(Family::FE, {1, 80, 200}));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[1].num_vars, 3524u);
  const Row& big = r.rows[2];
  EXPECT_EQ(format_fixed(*big.cell(Backend::Exact)->exact, 8), "0.00025059");
  EXPECT_EQ(*big.cell(Backend::Exact)->exact, ratio(12 * 71, 17000 * 200));
  for (const auto& row : r.rows) {
    EXPECT_EQ(*row.cell(Backend::Exact)->exact, *row.closed_form);
    EXPECT_LT(*row.cell(Backend::F64)->abs_err, 1e-8);
  }
  EXPECT_TRUE(r.growth.count("f64"));
  EXPECT_FALSE(r.environment.cpu.empty());
  EXPECT_FALSE(r.environment.compiler.empty());
}

TEST(RunSuite, SecondFamilySearch) {
  Report r = run_suite(quick(Family::SE, {1, 5}));
  const Cell* c = r.rows[1].cell(Backend::Exact);
  ASSERT_TRUE(c && c->ok());
  EXPECT_EQ(*c->exact, ratio(24, 1000));
  EXPECT_LE(*c->branches_explored, 40u);
  EXPECT_NEAR(*r.rows[1].cell(Backend::F64)->value, 0.024, 1e-12);
  EXPECT_FALSE(r.notes.empty());
}

TEST(RunSuite, LiteralOrientationNoted) {
  SuiteConfig c = quick(Family::SE, {1});
  c.orientation = netgen::Orientation::Literal;
  Report r = run_suite(c);
  EXPECT_EQ(*r.rows[0].cell(Backend::Exact)->exact, ratio(36, 100));
  EXPECT_FALSE(r.rows[0].cell(Backend::Exact)->abs_err.has_value());
  bool noted = false;
  for (const auto& n : r.notes) noted |= n.find("0.36") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(RunSuite, FailuresRecordedNotThrown) {
  SuiteConfig c = quick(Family::FE, {1, 200});
  c.backends = {Backend::F64, Backend::Interval};
  c.tolerances = {Scalar(0), ratio(1, 10)};
  Report r = run_suite(c);
  ASSERT_EQ(r.rows.size(), 4u);
  // interval core size cap at n = 200
  EXPECT_FALSE(r.rows[1].cell(Backend::Interval)->ok());
  // point backends reject interval coefficients
  EXPECT_FALSE(r.rows[2].cell(Backend::F64)->ok());
  const Cell* iv = r.rows[2].cell(Backend::Interval);
  ASSERT_TRUE(iv->ok());
  EXPECT_EQ(iv->samples, 20);
  EXPECT_EQ(iv->samples_inside, 20);
  EXPECT_TRUE(iv->enclosure->contains(*r.rows[2].closed_form));
}

TEST(RunSuite, DeterministicValues) {
  SuiteConfig c = quick(Family::FE, {1, 3});
  c.backends = {Backend::F64, Backend::Exact, Backend::Interval};
  Report a = run_suite(c), b = run_suite(c);
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    for (std::size_t j = 0; j < a.rows[k].cells.size(); ++j) {
      EXPECT_EQ(a.rows[k].cells[j].value, b.rows[k].cells[j].value);
      EXPECT_EQ(a.rows[k].cells[j].exact, b.rows[k].cells[j].exact);
      EXPECT_EQ(a.rows[k].cells[j].enclosure, b.rows[k].cells[j].enclosure);
    }
}

TEST(Render, TableHeaderAndEmpty) {
  EXPECT_EQ(render_report(Report{}, "table"), "n | exact | solved | abs_err | time\n");
  Report r = run_suite(quick(Family::FE, {1}));
  std::string text = render_report(r, "table");
  EXPECT_NE(text.find("n | exact | solved | abs_err | time\n1 | 0.05011765 | 0.05011765 |"), std::string::npos);
  EXPECT_NE(text.find("n | constraints | variables\n1 | 48 | 48\n"), std::string::npos);
  EXPECT_THROW(render_report(r, "xml"), InvalidSpec);
}

TEST(Render, CsvRoundTripsNumerically) {
  Report r = run_suite(quick(Family::FE, {1, 2}));
  std::stringstream in(render_report(r, "csv"));
  std::string line;
  std::getline(in, line);
  auto header = split(line, ',');
  auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  std::size_t k = 0;
  while (std::getline(in, line)) {
    auto f = split(line, ',');
    ASSERT_EQ(f.size(), header.size());
    const Row& row = r.rows[k / 2];
    const Cell& c = row.cells[k % 2];
    EXPECT_EQ(std::stoi(f[col("n")]), row.n);
    EXPECT_EQ(std::stod(f[col("value")]), *c.value);
    EXPECT_EQ(std::stod(f[col("time_s")]), c.time);
    if (c.exact) EXPECT_EQ(parse_scalar(f[col("exact")]), *c.exact);
    ++k;
  }
  EXPECT_EQ(k, 4u);
}

TEST(Render, JsonParsesBack) {
  SuiteConfig c = quick(Family::FE, {1, 2, 3});
  c.backends = {Backend::F64, Backend::Exact, Backend::Interval};
  Report r = run_suite(c);
  Report back = report_from_json(render_report(r, "json"));
  ASSERT_EQ(back.rows.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back.rows[k].num_vars, r.rows[k].num_vars);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(back.rows[k].cells[j].value, r.rows[k].cells[j].value);
      EXPECT_EQ(back.rows[k].cells[j].exact, r.rows[k].cells[j].exact);
      EXPECT_EQ(back.rows[k].cells[j].enclosure, r.rows[k].cells[j].enclosure);
    }
  }
  EXPECT_EQ(back.growth, r.growth);
  EXPECT_EQ(back.environment.cpu, r.environment.cpu);
  EXPECT_THROW(report_from_json("{"), ParseError);
}

TEST(Growth, FitsPowerLaw) {
  std::vector<std::pair<int, double>> pts;
  for (int n : {1, 10, 100, 1000}) pts.emplace_back(n, 3e-6 * n * n);
  EXPECT_NEAR(*growth_exponent(pts), 2.0, 1e-9);
  EXPECT_FALSE(growth_exponent({{5, 1.0}}).has_value());
}

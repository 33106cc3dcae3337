#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "circbench/interval.hpp"
#include "circbench/netgen.hpp"
#include "circbench/scalar.hpp"

namespace circbench::harness {

enum class Backend { F64, Exact, Interval };

std::string_view to_string(Backend b);
/// "f64", "exact" or "interval"; InvalidSpec otherwise.
Backend parse_backend(std::string_view text);

/// Box counts of the reference chain sweep.
std::vector<int> chain_n_list();

struct SuiteConfig {
  netgen::Family family = netgen::Family::FE;
  netgen::Orientation orientation = netgen::Orientation::Figure;
  Scalar source_voltage{12};
  std::vector<int> n_list = chain_n_list();
  std::vector<Backend> backends = {Backend::F64, Backend::Exact};
  std::vector<Scalar> tolerances = {Scalar(0)};
  /// Timed runs per cell after one untimed warm-up; the median is reported.
  int repetitions = 5;
  std::uint64_t seed = 1;
  /// Seeded point instantiations checked against each interval enclosure
  /// with a nonzero tolerance.
  int soundness_samples = 20;

  /// Family defaults: BE runs n = 1 only; SE stops at n = 100 because the
  /// mode search grows cubically in memory.
  static SuiteConfig defaults(netgen::Family family);

  /// InvalidSpec when n_list is empty, an n is below 1, repetitions < 1,
  /// no backend is given or a tolerance lies outside [0, 1).
  void validate() const;
};

/// i_GND of the family with default resistors, when a closed form exists:
/// FE u*71/(17000 n), BE u/100, SE figure orientation u/(100 n).
std::optional<Scalar> closed_form(netgen::Family family, netgen::Orientation orientation, int n,
                                  const Scalar& source_voltage);

struct Cell {
  Backend backend = Backend::F64;
  /// i_GND as a double (rounded from the rational on the exact backend).
  std::optional<double> value;
  std::optional<Scalar> exact;
  std::optional<interval::Interval> enclosure;
  /// Distance to the closed form; for an enclosure the larger endpoint
  /// distance.
  std::optional<double> abs_err;
  /// Median wall time of the solve in seconds.
  double time = 0;
  /// SE rows: mode search effort of the default strategy.
  std::optional<unsigned long long> branches_explored;
  /// Soundness check of a tolerance enclosure: samples inside / drawn.
  int samples_inside = 0;
  int samples = 0;
  /// Empty on success.
  std::string error;

  bool ok() const { return error.empty(); }
};

struct Row {
  int n = 0;
  Scalar tolerance;
  std::size_t num_vars = 0;
  std::size_t num_constraints = 0;
  std::size_t num_disjunctions = 0;
  std::optional<Scalar> closed_form;
  std::vector<Cell> cells;
  /// Set when the instance could not be built; cells is then empty.
  std::string error;

  const Cell* cell(Backend b) const;
};

struct Environment {
  std::string cpu;
  std::string compiler;
  std::string build_type;
  std::string build_flags;
  unsigned hardware_threads = 0;
};

struct Report {
  std::string family;
  std::string orientation;
  Scalar source_voltage{12};
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::vector<Row> rows;
  Environment environment;
  /// Backend name -> fitted exponent k of time ~ n^k.
  std::map<std::string, double> growth;
  /// Largest branches_explored / n the SE linearity check accepts.
  int branch_bound_per_box = 8;
  std::vector<std::string> notes;
};

Environment current_environment();

/// Least-squares slope of log(time) over log(n); rows with n >= 10 are
/// used when there are at least two of them. nullopt with fewer than two
/// usable points.
std::optional<double> growth_exponent(const std::vector<std::pair<int, double>>& n_time);

/// Runs every (n, tolerance, backend) cell. Timing runs are serialized.
/// A failing cell records its error and the suite continues.
Report run_suite(const SuiteConfig& config);

/// "table", "csv" or "json"; InvalidSpec otherwise. The table format has
/// one block per (tolerance, backend) with header
/// "n | exact | solved | abs_err | time", then a sizes block, then growth,
/// environment and notes. An empty report renders the header only.
std::string render_report(const Report& report, std::string_view format);

/// Inverse of the json rendering.
Report report_from_json(std::string_view text);

}  // namespace circbench::harness

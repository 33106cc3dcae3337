#include "circbench/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <random>
#include <thread>

#include "circbench/build_info.hpp"
#include "circbench/errors.hpp"
#include "circbench/ir.hpp"
#include "circbench/linsolve.hpp"
#include "circbench/modes.hpp"

namespace circbench::harness {

namespace {

using Json = nlohmann::ordered_json;

netgen::FamilySpec family_spec(const SuiteConfig& config, int n, const Scalar& tolerance) {
  netgen::FamilySpec spec;
  switch (config.family) {
    case netgen::Family::BE: spec = netgen::FamilySpec::baby(); break;
    case netgen::Family::FE: spec = netgen::FamilySpec::first(n); break;
    case netgen::Family::SE: spec = netgen::FamilySpec::second(n, config.orientation); break;
  }
  spec.source_voltage = config.source_voltage;
  spec.with_tolerance(tolerance);
  return spec;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// One untimed warm-up, then `repetitions` timed runs on a monotonic clock.
double time_median(int repetitions, const std::function<void()>& run) {
  run();
  std::vector<double> times;
  for (int r = 0; r < repetitions; ++r) {
    auto start = std::chrono::steady_clock::now();
    run();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return median(times);
}

void check_soundness(const SuiteConfig& config, int n, const Scalar& tolerance, Cell& cell) {
  std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(n));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int s = 0; s < config.soundness_samples; ++s) {
    netgen::FamilySpec spec = family_spec(config, n, Scalar(0));
    for (auto& r : spec.resistors) r.nominal *= 1 + tolerance * from_double(unit(rng));
    Scalar value = linsolve::solve_exact(ir::lower(netgen::build(spec))).at("i_GND");
    ++cell.samples;
    if (cell.enclosure->contains(value)) ++cell.samples_inside;
  }
}

Cell run_cell(const SuiteConfig& config, const ir::ConstraintSystem& system, const Row& row, Backend backend) {
  Cell cell;
  cell.backend = backend;
  try {
    if (!system.disjunctions.empty()) {
      if (backend == Backend::Interval)
        throw UnsupportedFeature("the interval backend does not search disjunctions");
      modes::SearchOptions opts;
      opts.check.backend = backend == Backend::Exact ? modes::Backend::Exact : modes::Backend::Float;
      modes::SearchResult result;
      cell.time = time_median(config.repetitions, [&] {
        result = modes::search_first(system, modes::Strategy::standard(), opts);
      });
      cell.branches_explored = result.stats.branches_explored;
      if (result.exact) cell.exact = result.exact->at("i_GND");
      cell.value = result.exact ? to_double(*cell.exact) : result.assignment.at("i_GND");
    } else if (backend == Backend::F64) {
      linsolve::Assignment result;
      cell.time = time_median(config.repetitions, [&] { result = linsolve::solve_f64(system); });
      cell.value = result.at("i_GND");
    } else if (backend == Backend::Exact) {
      linsolve::ExactAssignment result;
      cell.time = time_median(config.repetitions, [&] { result = linsolve::solve_exact(system); });
      cell.exact = result.at("i_GND");
      cell.value = to_double(*cell.exact);
    } else {
      interval::IntervalAssignment result;
      cell.time = time_median(config.repetitions, [&] { result = interval::solve_interval(system); });
      cell.enclosure = result.at("i_GND");
      cell.value = cell.enclosure->mid();
      if (row.tolerance > 0 && config.family != netgen::Family::SE) check_soundness(config, row.n, row.tolerance, cell);
    }
    if (row.closed_form) {
      if (cell.enclosure) {
        double cf = to_double(*row.closed_form);
        cell.abs_err = std::max(std::abs(cell.enclosure->lo() - cf), std::abs(cell.enclosure->hi() - cf));
      } else if (cell.exact) {
        cell.abs_err = std::abs(to_double(*cell.exact - *row.closed_form));
      } else {
        cell.abs_err = std::abs(*cell.value - to_double(*row.closed_form));
      }
    }
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

std::string read_cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) != 0) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string model = line.substr(colon + 1);
    model.erase(0, model.find_first_not_of(' '));
    return model;
  }
  return "unknown";
}

std::string fmt8(double v) { return fmt::format("{:.8f}", v); }

std::string fmt8(const Scalar& v) { return format_fixed(v, 8); }

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string full(double v) { return fmt::format("{:.17g}", v); }

template <class T, class F>
std::string opt_text(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : std::string();
}

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::F64: return "f64";
    case Backend::Exact: return "exact";
    case Backend::Interval: return "interval";
  }
  return "?";
}

Backend parse_backend(std::string_view text) {
  if (text == "f64") return Backend::F64;
  if (text == "exact") return Backend::Exact;
  if (text == "interval") return Backend::Interval;
  throw InvalidSpec("unknown backend '" + std::string(text) + "', expected f64, exact or interval");
}

std::vector<int> chain_n_list() { return {1, 2, 3, 4, 5, 10, 20, 40, 80, 100, 200, 500}; }

SuiteConfig SuiteConfig::defaults(netgen::Family family) {
  SuiteConfig c;
  c.family = family;
  if (family == netgen::Family::BE) c.n_list = {1};
  if (family == netgen::Family::SE) c.n_list = {1, 2, 3, 4, 5, 10, 20, 40, 80, 100};
  return c;
}

void SuiteConfig::validate() const {
  if (n_list.empty()) throw InvalidSpec("n_list is empty");
  for (int n : n_list)
    if (n < 1) throw InvalidSpec("n must be at least 1, got " + std::to_string(n));
  if (family == netgen::Family::BE && std::any_of(n_list.begin(), n_list.end(), [](int n) { return n != 1; }))
    throw InvalidSpec("the BE family has n = 1 only");
  if (repetitions < 1) throw InvalidSpec("repetitions must be at least 1");
  if (backends.empty()) throw InvalidSpec("no backend selected");
  for (const auto& t : tolerances)
    if (t < 0 || t >= 1) throw InvalidSpec("tolerance " + format_scalar(t) + " outside [0, 1)");
  if (soundness_samples < 0) throw InvalidSpec("soundness_samples must be nonnegative");
}

std::optional<Scalar> closed_form(netgen::Family family, netgen::Orientation orientation, int n,
                                  const Scalar& source_voltage) {
  switch (family) {
    case netgen::Family::BE: return source_voltage / 100;
    case netgen::Family::FE: return source_voltage * 71 / (17000 * Scalar(n));
    case netgen::Family::SE:
      if (orientation == netgen::Orientation::Figure) return source_voltage / (100 * Scalar(n));
      return std::nullopt;
  }
  return std::nullopt;
}

const Cell* Row::cell(Backend b) const {
  for (const auto& c : cells)
    if (c.backend == b) return &c;
  return nullptr;
}

Environment current_environment() {
  Environment env;
  env.cpu = read_cpu_model();
#if defined(__clang__)
  env.compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  env.compiler = "gcc " __VERSION__;
#else
  env.compiler = "unknown";
#endif
  env.build_type = kBuildType;
  env.build_flags = kBuildFlags;
  env.hardware_threads = std::thread::hardware_concurrency();
  return env;
}

std::optional<double> growth_exponent(const std::vector<std::pair<int, double>>& n_time) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [n, t] : n_time)
    if (n >= 10 && t > 0) pts.emplace_back(std::log(n), std::log(t));
  if (pts.size() < 2) {
    pts.clear();
    for (const auto& [n, t] : n_time)
      if (t > 0) pts.emplace_back(std::log(n), std::log(t));
  }
  if (pts.size() < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= pts.size();
  my /= pts.size();
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  if (sxx == 0) return std::nullopt;
  return sxy / sxx;
}

Report run_suite(const SuiteConfig& config) {
  config.validate();
  Report report;
  report.family = netgen::to_string(config.family);
  report.orientation = netgen::to_string(config.orientation);
  report.source_voltage = config.source_voltage;
  report.repetitions = config.repetitions;
  report.seed = config.seed;
  report.environment = current_environment();

  for (const auto& tolerance : config.tolerances) {
    for (int n : config.n_list) {
      Row row;
      row.n = n;
      row.tolerance = tolerance;
      row.closed_form = closed_form(config.family, config.orientation, n, config.source_voltage);
      try {
        netgen::Netlist net = netgen::build(family_spec(config, n, tolerance));
        netgen::InstanceStats st = netgen::stats(net);
        row.num_vars = st.num_variables;
        row.num_constraints = st.num_constraints;
        row.num_disjunctions = st.num_disjunctions;
        ir::ConstraintSystem system = ir::lower(net);
        for (Backend b : config.backends) row.cells.push_back(run_cell(config, system, row, b));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }

  for (Backend b : config.backends) {
    std::vector<std::pair<int, double>> pts;
    for (const auto& row : report.rows)
      if (const Cell* c = row.cell(b); row.tolerance == 0 && c && c->ok()) pts.emplace_back(row.n, c->time);
    if (auto k = growth_exponent(pts)) report.growth[std::string(to_string(b))] = *k;
  }

  if (config.family == netgen::Family::SE) {
    report.notes.push_back(fmt::format(
        "branches_explored counts leaves examined plus subtrees cut off early, default strategy; "
        "linearity check: branches_explored <= {} n",
        report.branch_bound_per_box));
    if (config.orientation == netgen::Orientation::Literal)
      report.notes.push_back(
          "literal orientation wires D1 exactly as the constraint listing; at n = 1 both diodes then conduct "
          "and i_GND = 3 u_SRC/R2 = 0.36 instead of u_SRC/R2 = 0.12, so no closed form is checked; the figure "
          "orientation reverses D1 and gives u_SRC/(n R2)");
  }
  if (std::any_of(config.tolerances.begin(), config.tolerances.end(), [](const Scalar& t) { return t > 0; }))
    report.notes.push_back(
        "nonzero tolerances use interval coefficients; only the interval backend accepts them, and abs_err "
        "is the larger distance of an enclosure endpoint from the nominal closed form");
  return report;
}

std::string render_report(const Report& report, std::string_view format) {
  if (format == "table") {
    const std::string header = "n | exact | solved | abs_err | time";
    if (report.rows.empty()) return header + "\n";
    std::string out;
    std::vector<Scalar> tolerances;
    std::vector<Backend> backends;
    for (const auto& row : report.rows) {
      if (std::find(tolerances.begin(), tolerances.end(), row.tolerance) == tolerances.end())
        tolerances.push_back(row.tolerance);
      for (const auto& c : row.cells)
        if (std::find(backends.begin(), backends.end(), c.backend) == backends.end()) backends.push_back(c.backend);
    }
    for (const auto& t : tolerances) {
      for (Backend b : backends) {
        std::string family = report.family == "SE" ? report.family + " " + report.orientation : report.family;
        out += fmt::format("{}, backend {}, tolerance {}\n", family, to_string(b), format_scalar(t));
        out += header + "\n";
        for (const auto& row : report.rows) {
          if (row.tolerance != t) continue;
          std::string cf = opt_text(row.closed_form, [](const Scalar& v) { return fmt8(v); });
          if (cf.empty()) cf = "-";
          const Cell* c = row.cell(b);
          if (!row.error.empty() || !c) {
            out += fmt::format("{} | {} | error: {} | - | -\n", row.n, cf, row.error);
            continue;
          }
          if (!c->ok()) {
            out += fmt::format("{} | {} | error: {} | - | -\n", row.n, cf, c->error);
            continue;
          }
          std::string solved = c->enclosure ? fmt::format("[{}, {}]", fmt8(c->enclosure->lo()), fmt8(c->enclosure->hi()))
                               : c->exact   ? fmt8(*c->exact)
                                            : fmt8(*c->value);
          std::string err = c->abs_err ? fmt::format("{:.2e}", *c->abs_err) : "-";
          out += fmt::format("{} | {} | {} | {} | {:.6f}\n", row.n, cf, solved, err, c->time);
        }
        out += "\n";
      }
    }
    bool searched = std::any_of(report.rows.begin(), report.rows.end(), [](const Row& r) {
      return std::any_of(r.cells.begin(), r.cells.end(), [](const Cell& c) { return c.branches_explored.has_value(); });
    });
    out += searched ? "n | constraints | variables | branches\n" : "n | constraints | variables\n";
    for (const auto& row : report.rows) {
      if (row.tolerance != tolerances.front()) continue;
      out += fmt::format("{} | {} | {}", row.n, row.num_constraints, row.num_vars);
      if (searched) {
        std::string br = "-";
        for (const auto& c : row.cells)
          if (c.branches_explored) {
            br = std::to_string(*c.branches_explored);
            break;
          }
        out += " | " + br;
      }
      out += "\n";
    }
    out += "\n";
    for (const auto& [b, k] : report.growth) out += fmt::format("growth {}: time ~ n^{:.2f}\n", b, k);
    const auto& env = report.environment;
    out += fmt::format("cpu: {}\ncompiler: {}\nbuild: {} {}\nthreads: {}\n", env.cpu, env.compiler, env.build_type,
                       env.build_flags, env.hardware_threads);
    out += fmt::format("repetitions: {} (median), seed: {}\n", report.repetitions, report.seed);
    for (const auto& note : report.notes) out += "note: " + note + "\n";
    return out;
  }

  if (format == "csv") {
    std::string out =
        "family,orientation,n,tolerance,backend,num_vars,num_constraints,closed_form,value,lo,hi,exact,abs_err,"
        "time_s,branches_explored,samples_inside,samples,error\n";
    for (const auto& row : report.rows) {
      auto line = [&](const Cell* c) {
        out += fmt::format("{},{},{},{},{},{},{},{}", report.family, report.orientation, row.n,
                           format_scalar(row.tolerance), c ? std::string(to_string(c->backend)) : std::string(),
                           row.num_vars, row.num_constraints,
                           opt_text(row.closed_form, [](const Scalar& v) { return full(to_double(v)); }));
        if (!c) {
          out += ",,,,,,,,,," + csv_field(row.error) + "\n";
          return;
        }
        out += fmt::format(",{},{},{},{},{},{},{},{},{},{}\n", opt_text(c->value, full),
                           c->enclosure ? full(c->enclosure->lo()) : "", c->enclosure ? full(c->enclosure->hi()) : "",
                           opt_text(c->exact, [](const Scalar& v) { return format_scalar(v); }),
                           opt_text(c->abs_err, full), full(c->time),
                           opt_text(c->branches_explored, [](unsigned long long v) { return std::to_string(v); }),
                           c->samples_inside, c->samples, csv_field(c->error));
      };
      if (row.cells.empty()) line(nullptr);
      for (const auto& c : row.cells) line(&c);
    }
    return out;
  }

  if (format == "json") {
    Json j;
    j["family"] = report.family;
    j["orientation"] = report.orientation;
    j["source_voltage"] = format_scalar(report.source_voltage);
    j["repetitions"] = report.repetitions;
    j["seed"] = report.seed;
    j["branch_bound_per_box"] = report.branch_bound_per_box;
    const auto& env = report.environment;
    j["environment"] = {{"cpu", env.cpu},
                        {"compiler", env.compiler},
                        {"build_type", env.build_type},
                        {"build_flags", env.build_flags},
                        {"hardware_threads", env.hardware_threads}};
    Json rows = Json::array();
    for (const auto& row : report.rows) {
      Json r;
      r["n"] = row.n;
      r["tolerance"] = format_scalar(row.tolerance);
      r["num_vars"] = row.num_vars;
      r["num_constraints"] = row.num_constraints;
      r["num_disjunctions"] = row.num_disjunctions;
      r["closed_form"] = row.closed_form ? Json(format_scalar(*row.closed_form)) : Json(nullptr);
      r["error"] = row.error;
      Json cells = Json::array();
      for (const auto& c : row.cells) {
        Json cj;
        cj["backend"] = to_string(c.backend);
        cj["value"] = c.value ? Json(*c.value) : Json(nullptr);
        cj["exact"] = c.exact ? Json(format_scalar(*c.exact)) : Json(nullptr);
        cj["enclosure"] = c.enclosure ? Json::array({c.enclosure->lo(), c.enclosure->hi()}) : Json(nullptr);
        cj["abs_err"] = c.abs_err ? Json(*c.abs_err) : Json(nullptr);
        cj["time_s"] = c.time;
        cj["branches_explored"] = c.branches_explored ? Json(*c.branches_explored) : Json(nullptr);
        cj["samples_inside"] = c.samples_inside;
        cj["samples"] = c.samples;
        cj["error"] = c.error;
        cells.push_back(std::move(cj));
      }
      r["cells"] = std::move(cells);
      rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    Json growth = Json::object();
    for (const auto& [b, k] : report.growth) growth[b] = k;
    j["growth"] = std::move(growth);
    j["notes"] = report.notes;
    return j.dump(2) + "\n";
  }

  throw InvalidSpec("unknown report format '" + std::string(format) + "', expected table, csv or json");
}

Report report_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(1, e.what());
  }
  try {
    Report report;
    report.family = j.at("family").get<std::string>();
    report.orientation = j.at("orientation").get<std::string>();
    report.source_voltage = parse_scalar(j.at("source_voltage").get<std::string>());
    report.repetitions = j.at("repetitions").get<int>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.branch_bound_per_box = j.at("branch_bound_per_box").get<int>();
    const auto& env = j.at("environment");
    report.environment = {env.at("cpu").get<std::string>(), env.at("compiler").get<std::string>(),
                          env.at("build_type").get<std::string>(), env.at("build_flags").get<std::string>(),
                          env.at("hardware_threads").get<unsigned>()};
    for (const auto& r : j.at("rows")) {
      Row row;
      row.n = r.at("n").get<int>();
      row.tolerance = parse_scalar(r.at("tolerance").get<std::string>());
      row.num_vars = r.at("num_vars").get<std::size_t>();
      row.num_constraints = r.at("num_constraints").get<std::size_t>();
      row.num_disjunctions = r.at("num_disjunctions").get<std::size_t>();
      if (!r.at("closed_form").is_null()) row.closed_form = parse_scalar(r.at("closed_form").get<std::string>());
      row.error = r.at("error").get<std::string>();
      for (const auto& cj : r.at("cells")) {
        Cell c;
        c.backend = parse_backend(cj.at("backend").get<std::string>());
        if (!cj.at("value").is_null()) c.value = cj.at("value").get<double>();
        if (!cj.at("exact").is_null()) c.exact = parse_scalar(cj.at("exact").get<std::string>());
        if (!cj.at("enclosure").is_null())
          c.enclosure = interval::Interval(cj.at("enclosure").at(0).get<double>(), cj.at("enclosure").at(1).get<double>());
        if (!cj.at("abs_err").is_null()) c.abs_err = cj.at("abs_err").get<double>();
        c.time = cj.at("time_s").get<double>();
        if (!cj.at("branches_explored").is_null())
          c.branches_explored = cj.at("branches_explored").get<unsigned long long>();
        c.samples_inside = cj.at("samples_inside").get<int>();
        c.samples = cj.at("samples").get<int>();
        c.error = cj.at("error").get<std::string>();
        row.cells.push_back(std::move(c));
      }
      report.rows.push_back(std::move(row));
    }
    for (const auto& [b, k] : j.at("growth").items()) report.growth[b] = k.get<double>();
    report.notes = j.at("notes").get<std::vector<std::string>>();
    return report;
  } catch (const Json::exception& e) {
    throw ParseError(1, std::string("report json: ") + e.what());
  }
}

}  // namespace circbench::harness

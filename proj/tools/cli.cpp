#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "circbench/errors.hpp"
#include "circbench/harness.hpp"
#include "circbench/interval.hpp"
#include "circbench/ir.hpp"
#include "circbench/linsolve.hpp"
#include "circbench/modes.hpp"
#include "circbench/netgen.hpp"
#include "circbench/opt.hpp"
#include "circbench/symbolic.hpp"

namespace circbench::cli {

namespace {

using Json = nlohmann::ordered_json;
using interval::Interval;
using netgen::Family;
using netgen::FamilySpec;

/// Bad flag value or combination; the message starts with the flag.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

struct Options {
  // family
  std::string family;
  int n = 1;
  std::string tolerance = "0";
  std::string tolerance_form = "interval";
  std::string orientation = "figure";
  std::string source_voltage;
  std::vector<std::string> resistors;
  std::vector<std::string> alternates;
  bool nonlinear = false;
  std::string in;
  // backend and io
  std::string backend = "f64";
  std::string out;
  std::string format = "table";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  // per command
  std::vector<std::string> vars;
  bool all = false;
  std::vector<std::string> measures;
  std::vector<std::string> components;
  std::string minimize, maximize;
  bool enumerate = false;
  std::string strategy = "standard";
  std::vector<std::string> pins;
  bool vertices = false;
  int oracle = 0;
  bool netlist = false;
  bool indicators = false;
  std::string big_m = "1000000";
  std::string n_list, backends, tolerances;
  int repetitions = 5;
};

/// One command's result: text for the table format and a document for
/// json and csv.
struct Output {
  std::string text;
  Json data = Json::object();
  int code = kOk;
};

// ------------------------------------------------------------ formatting

std::string fixed8(double v) {
  std::string s = fmt::format("{:.8f}", v);
  return s == "-0.00000000" ? "0.00000000" : s;
}

std::string fixed8(const Scalar& v) { return format_fixed(v, 8); }

/// Endpoints rounded outward to 8 decimals so the printed box still
/// encloses the computed one.
std::string interval8(const Interval& iv) {
  const Scalar scale(100000000);
  auto round = [&](double x, bool up) {
    Scalar s = from_double(x) * scale;
    mpz_class q;
    if (up)
      mpz_cdiv_q(q.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
    else
      mpz_fdiv_q(q.get_mpz_t(), s.get_num_mpz_t(), s.get_den_mpz_t());
    return format_fixed(Scalar(q) / scale, 8);
  };
  return "[" + round(iv.lo(), false) + ", " + round(iv.hi(), true) + "]";
}

Json value_json(std::optional<double> v, const std::optional<Scalar>& exact, const std::optional<Interval>& iv) {
  Json j = Json::object();
  if (v) j["value"] = *v;
  if (exact) j["exact"] = format_scalar(*exact);
  if (iv) j["enclosure"] = Json::array({iv->lo(), iv->hi()});
  return j;
}

struct Listing {
  std::string text;
  Json data = Json::object();

  void add(const std::string& name, double v, const std::optional<Scalar>& exact, bool show_exact) {
    text += name + " = " + (exact ? fixed8(*exact) : fixed8(v));
    if (exact && show_exact) text += " (" + format_scalar(*exact) + ")";
    text += "\n";
    data[name] = value_json(v, exact, std::nullopt);
  }
  void add(const std::string& name, const Interval& iv) {
    text += name + " = " + interval8(iv) + "\n";
    data[name] = value_json(std::nullopt, std::nullopt, iv);
  }
};

void flatten(const Json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t k = 0; k < j.size(); ++k) flatten(j[k], prefix + "." + std::to_string(k), out);
  } else if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      s = q + "\"";
    }
    out += prefix + "," + s + "\n";
  } else if (j.is_number_float()) {
    out += prefix + "," + fmt::format("{:.17g}", j.get<double>()) + "\n";
  } else {
    out += prefix + "," + j.dump() + "\n";
  }
}

// --------------------------------------------------------------- parsing

Scalar scalar_flag(const std::string& flag, const std::string& text) {
  try {
    if (!text.empty() && text.back() == '%') return parse_scalar(text.substr(0, text.size() - 1)) / 100;
    return parse_scalar(text);
  } catch (const Error&) {
    throw UsageError(flag, "malformed number '" + text + "'");
  }
}

std::pair<std::string, std::string> split_assignment(const std::string& flag, const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == text.size())
    throw UsageError(flag, "expected NAME=VALUE, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

Family family_flag(const std::string& text) {
  if (text == "be") return Family::BE;
  if (text == "fe") return Family::FE;
  return Family::SE;
}

/// Resistor slot for a name: "R" on BE, "R1".."R5" on FE and SE.
std::size_t resistor_slot(const std::string& flag, Family family, const std::string& name) {
  if (family == Family::BE) {
    if (name != "R") throw UsageError(flag, "the BE network has one resistor named R, got '" + name + "'");
    return 0;
  }
  if (name.size() != 2 || name[0] != 'R' || name[1] < '1' || name[1] > '5')
    throw UsageError(flag, "expected R1..R5, got '" + name + "'");
  int j = name[1] - '0';
  if (family == Family::SE && (j == 1 || j == 4))
    throw UsageError(flag, "position " + std::to_string(j) + " holds a diode in the SE network");
  return static_cast<std::size_t>(j - 1);
}

class Session {
 public:
  Session(const Options& o, CLI::App* cmd) : o_(o), cmd_(cmd) {}

  bool given(const std::string& flag) const { return cmd_->get_option_no_throw(flag) && cmd_->count(flag) > 0; }

  /// Flag checks shared by every command that builds a system.
  void validate_family() const {
    if (!o_.in.empty()) {
      for (const char* f : {"--family", "--n", "--tolerance", "--orientation", "--source-voltage", "--resistor",
                            "--alternates", "--nonlinear", "--tolerance-form"})
        if (given(f)) throw UsageError(f, "cannot be combined with --in");
      return;
    }
    if (o_.family.empty()) throw UsageError("--family", "required (be, fe or se) unless --in is given");
    if (o_.n < 1) throw UsageError("--n", "must be at least 1");
    if (o_.family == "be" && given("--n") && o_.n != 1) throw UsageError("--n", "the BE network has no boxes");
    if (o_.family != "se" && given("--orientation")) throw UsageError("--orientation", "applies to --family se only");
    Scalar t = scalar_flag("--tolerance", o_.tolerance);
    if (t < 0 || t >= 1) throw UsageError("--tolerance", "must lie in [0, 1)");
  }

  Scalar tolerance() const { return o_.in.empty() ? scalar_flag("--tolerance", o_.tolerance) : Scalar(0); }

  FamilySpec spec() const {
    Family family = family_flag(o_.family);
    FamilySpec s = family == Family::BE   ? FamilySpec::baby()
                   : family == Family::FE ? FamilySpec::first(o_.n)
                                          : FamilySpec::second(o_.n, o_.orientation == "literal"
                                                                         ? netgen::Orientation::Literal
                                                                         : netgen::Orientation::Figure);
    if (!o_.source_voltage.empty()) s.source_voltage = scalar_flag("--source-voltage", o_.source_voltage);
    for (const auto& r : o_.resistors) {
      auto [name, value] = split_assignment("--resistor", r);
      Scalar v = scalar_flag("--resistor", value);
      if (v <= 0) throw UsageError("--resistor", "resistance must be positive");
      s.resistors[resistor_slot("--resistor", family, name)].nominal = v;
    }
    for (const auto& a : o_.alternates) {
      auto [name, values] = split_assignment("--alternates", a);
      auto& slot = s.resistors[resistor_slot("--alternates", family, name)];
      slot.alternates.clear();
      for (const auto& v : split_list(values)) slot.alternates.push_back(scalar_flag("--alternates", v));
      if (slot.alternates.size() < 2) throw UsageError("--alternates", "give at least two values");
      for (const auto& v : slot.alternates)
        if (v <= 0) throw UsageError("--alternates", "resistance must be positive");
    }
    s.with_tolerance(tolerance());
    s.nonlinear_resistors = o_.nonlinear;
    s.tolerance_form = o_.tolerance_form == "inequalities" ? netgen::ToleranceForm::InequalityPair
                       : o_.tolerance_form == "strict"     ? netgen::ToleranceForm::StrictInequalityPair
                                                           : netgen::ToleranceForm::IntervalCoefficient;
    s.validate();
    return s;
  }

  ir::ConstraintSystem system() const {
    if (!o_.in.empty()) return ir::load_instance(o_.in);
    return ir::lower(netgen::build(spec()));
  }

  /// Variables to print: --var list, every variable with --all, else `fallback`.
  std::vector<std::string> selection(const ir::ConstraintSystem& sys, const std::vector<std::string>& fallback) const {
    if (o_.all) return sys.variables;
    if (o_.vars.empty()) return fallback;
    for (const auto& v : o_.vars)
      if (!sys.has_variable(v)) throw UsageError("--var", "unknown variable '" + v + "'");
    return o_.vars;
  }

  bool show_exact() const { return o_.backend == "exact"; }

  modes::Backend search_backend() const {
    return o_.backend == "exact" ? modes::Backend::Exact : modes::Backend::Float;
  }

  modes::Strategy strategy() const {
    modes::Strategy s = o_.strategy == "declaration" ? modes::Strategy::declaration()
                        : o_.strategy == "pessimal"  ? modes::Strategy::pessimal()
                                                     : modes::Strategy::standard();
    for (const auto& p : o_.pins) {
      auto [label, tag] = split_assignment("--pin", p);
      s.pins[label] = tag;
    }
    return s;
  }

  std::vector<ir::Objective> objectives(const ir::ConstraintSystem& sys) const {
    std::vector<ir::Objective> out;
    for (const auto& [flag, name, make] : {std::tuple{"--minimize", o_.minimize, &opt::minimize},
                                           std::tuple{"--maximize", o_.maximize, &opt::maximize}}) {
      if (name.empty()) continue;
      if (!sys.has_variable(name)) throw UsageError(flag, "unknown variable '" + name + "'");
      out.push_back(make(name));
    }
    return out;
  }

  const Options& o() const { return o_; }

 private:
  const Options& o_;
  CLI::App* cmd_;
};

/// Copy with each interval coefficient replaced by its midpoint; used to
/// pick a mode before the interval solve of that mode.
ir::ConstraintSystem midpoint_system(ir::ConstraintSystem sys) {
  auto fix = [](ir::LinearConstraint& c) {
    for (const auto& [name, iv] : c.interval_coeffs) {
      Scalar mid = (iv.lo + iv.hi) / 2;
      c.terms.erase(name);
      if (mid != 0) c.terms[name] = mid;
    }
    c.interval_coeffs.clear();
  };
  for (auto& c : sys.conjuncts) fix(c);
  for (auto& d : sys.disjunctions)
    for (auto& b : d.branches)
      for (auto& c : b) fix(c);
  return sys;
}

bool has_interval_coeffs(const ir::ConstraintSystem& sys) {
  auto any = [](const ir::LinearConstraint& c) { return !c.interval_coeffs.empty(); };
  if (std::any_of(sys.conjuncts.begin(), sys.conjuncts.end(), any)) return true;
  for (const auto& d : sys.disjunctions)
    for (const auto& b : d.branches)
      if (std::any_of(b.begin(), b.end(), any)) return true;
  return false;
}

/// "D1_B1=Blocking"; a resistor alternate tag "R3=90" shows as "R3_B1=90".
std::string choice_text(const ir::ModeChoice& m) {
  auto eq = m.tag.find('=');
  return m.label + "=" + (eq == std::string::npos ? m.tag : m.tag.substr(eq + 1));
}

std::string mode_text(const ir::ModeAssignment& mode) {
  if (mode.empty()) return {};
  std::string out = "mode:";
  for (const auto& m : mode) out += " " + choice_text(m);
  return out + "\n";
}

Json mode_json(const ir::ModeAssignment& mode) {
  Json j = Json::object();
  for (const auto& m : mode) j[m.label] = m.tag;
  return j;
}

std::string stats_text(const modes::SearchStats& s) {
  return fmt::format("branches_explored = {}\nbranches_pruned = {}\nsolves_performed = {}\nnodes_visited = {}\n",
                     s.branches_explored, s.branches_pruned, s.solves_performed, s.nodes_visited);
}

Json stats_json(const modes::SearchStats& s) {
  return {{"branches_explored", s.branches_explored},
          {"branches_pruned", s.branches_pruned},
          {"solves_performed", s.solves_performed},
          {"nodes_visited", s.nodes_visited},
          {"wall_time_s", s.wall_time}};
}

Listing point_listing(const Session& s, const std::vector<std::string>& names, const linsolve::Assignment& a,
                      const std::optional<linsolve::ExactAssignment>& exact) {
  Listing l;
  for (const auto& v : names) {
    std::optional<Scalar> e;
    if (exact) e = exact->at(v);
    l.add(v, a.at(v), e, s.show_exact());
  }
  return l;
}

Listing box_listing(const std::vector<std::string>& names, const interval::IntervalAssignment& a) {
  Listing l;
  for (const auto& v : names) l.add(v, a.at(v));
  return l;
}

void append_branch_interval(Output& out, const modes::IntervalBranch& ib, const std::vector<std::string>& names,
                            Json& target) {
  Listing l = box_listing(names, ib.enclosure);
  out.text += l.text;
  out.text += ib.certified() ? "certified = yes\n" : "certified = no\n";
  for (const auto& u : ib.uncertain) out.text += "  not proven: " + u + "\n";
  target["values"] = l.data;
  target["certified"] = ib.certified();
  target["uncertain"] = ib.uncertain;
}

// -------------------------------------------------------------- commands

Output cmd_generate(const Session& s) {
  Output out;
  if (s.o().netlist) {
    if (!s.o().in.empty()) throw UsageError("--netlist", "needs a family, not --in");
    out.text = netgen::build(s.spec()).serialize();
  } else {
    out.text = ir::to_instance_text(s.system());
  }
  out.data["text"] = out.text;
  return out;
}

Output cmd_stats(const Session& s) {
  Output out;
  std::size_t vars, cons, disj, ports = 0;
  if (s.o().in.empty()) {
    netgen::InstanceStats st = netgen::stats(netgen::build(s.spec()));
    vars = st.num_variables, cons = st.num_constraints, disj = st.num_disjunctions, ports = st.num_ports;
  } else {
    ir::ConstraintSystem sys = s.system();
    vars = sys.variables.size(), cons = sys.conjuncts.size() + sys.disjunctions.size(),
    disj = sys.disjunctions.size();
  }
  out.text = fmt::format("variables = {}\nconstraints = {}\ndisjunctions = {}\n", vars, cons, disj);
  if (ports) out.text += fmt::format("ports = {}\n", ports);
  out.data = {{"variables", vars}, {"constraints", cons}, {"disjunctions", disj}};
  if (ports) out.data["ports"] = ports;
  return out;
}

Output solve_disjunctive(const Session& s, const ir::ConstraintSystem& sys, bool interval_backend) {
  Output out;
  std::vector<std::string> names = s.selection(sys, sys.variables);
  modes::EnumerateOptions eo;
  eo.threads = s.o().threads;
  eo.check.backend = s.search_backend();
  bool boxes = interval_backend || has_interval_coeffs(sys);
  auto leaves = modes::enumerate_feasible(boxes ? midpoint_system(sys) : sys, eo);
  if (leaves.empty()) throw Unsatisfiable("no branch combination is feasible");
  Json list = Json::array();
  for (const auto& leaf : leaves) {
    Json entry;
    entry["mode"] = mode_json(leaf.mode);
    out.text += mode_text(leaf.mode);
    if (boxes) {
      append_branch_interval(out, modes::solve_branch_interval(sys, leaf.mode), names, entry);
    } else {
      Listing l = point_listing(s, names, leaf.assignment, leaf.exact);
      out.text += l.text;
      entry["values"] = l.data;
    }
    out.text += "\n";
    list.push_back(std::move(entry));
  }
  out.data["solutions"] = std::move(list);
  return out;
}

Output cmd_solve(const Session& s, bool interval_command) {
  ir::ConstraintSystem sys = s.system();
  bool interval_backend = interval_command || s.o().backend == "interval";
  if (has_interval_coeffs(sys) && !interval_backend) {
    if (s.given("--backend")) throw UsageError("--backend", "a nonzero --tolerance needs the interval backend");
    interval_backend = true;
  }
  if (!sys.disjunctions.empty()) return solve_disjunctive(s, sys, interval_backend);
  Output out;
  std::vector<std::string> names = s.selection(sys, sys.variables);
  if (interval_backend) {
    interval::IntervalAssignment a =
        s.o().vertices ? interval::solve_interval_vertices(sys) : interval::solve_interval(sys);
    Listing l = box_listing(names, a);
    out.text = l.text;
    out.data["values"] = l.data;
    if (s.o().oracle > 0) {
      if (!s.o().in.empty()) throw UsageError("--oracle", "needs a family, not --in");
      auto ranges = interval::range_oracle(s.spec(), s.tolerance(), s.o().oracle, s.o().seed);
      out.text += "sampled ranges:\n";
      Json oj = Json::object();
      for (const auto& v : names) {
        const auto& r = ranges.at(v);
        bool inside = a.at(v).contains(r.lo) && a.at(v).contains(r.hi);
        out.text += fmt::format("{} in [{}, {}] {}\n", v, fixed8(r.lo), fixed8(r.hi), inside ? "inside" : "OUTSIDE");
        oj[v] = {{"lo", format_scalar(r.lo)}, {"hi", format_scalar(r.hi)}, {"inside", inside}};
      }
      out.data["sampled_ranges"] = std::move(oj);
    }
  } else if (s.o().backend == "exact") {
    linsolve::ExactAssignment e = linsolve::solve_exact(sys);
    Listing l = point_listing(s, names, e.to_float(), e);
    out.text = l.text;
    out.data["values"] = l.data;
  } else {
    linsolve::Assignment a = linsolve::solve_f64(sys);
    Listing l = point_listing(s, names, a, std::nullopt);
    out.text = l.text + fmt::format("residual = {:.3e}\n", a.residual_norm);
    out.data["values"] = l.data;
    out.data["residual"] = a.residual_norm;
  }
  return out;
}

Output cmd_modes(const Session& s) {
  ir::ConstraintSystem sys = s.system();
  std::vector<std::string> names = s.selection(sys, {"i_GND"});
  Output out;
  bool boxes = s.o().backend == "interval" || has_interval_coeffs(sys);
  if (boxes && s.given("--backend") && s.o().backend != "interval")
    throw UsageError("--backend", "a nonzero --tolerance needs the interval backend");
  if (s.o().enumerate) {
    if (boxes) return solve_disjunctive(s, sys, true);
    modes::EnumerateOptions eo;
    eo.threads = s.o().threads;
    eo.check.backend = s.search_backend();
    auto leaves = modes::enumerate_feasible(sys, eo);
    if (leaves.empty()) throw Unsatisfiable("no branch combination is feasible");
    out.text = fmt::format("feasible leaves = {}\n", leaves.size());
    Json list = Json::array();
    for (const auto& leaf : leaves) {
      Listing l = point_listing(s, names, leaf.assignment, leaf.exact);
      out.text += mode_text(leaf.mode) + l.text;
      list.push_back({{"mode", mode_json(leaf.mode)}, {"values", l.data}});
    }
    out.data["leaves"] = std::move(list);
    return out;
  }
  modes::SearchOptions so;
  so.check.backend = s.search_backend();
  modes::SearchResult r = modes::search_first(boxes ? midpoint_system(sys) : sys, s.strategy(), so);
  out.text = mode_text(r.mode);
  out.data["mode"] = mode_json(r.mode);
  if (boxes) {
    append_branch_interval(out, modes::solve_branch_interval(sys, r.mode), names, out.data);
  } else {
    Listing l = point_listing(s, names, r.assignment, r.exact);
    out.text += l.text;
    out.data["values"] = l.data;
  }
  out.text += stats_text(r.stats);
  out.data["stats"] = stats_json(r.stats);
  return out;
}

Output cmd_optimize(const Session& s) {
  if (s.o().backend == "interval")
    throw UsageError("--backend", "interval does not apply to optimize; --tolerance gives interval coefficients");
  ir::ConstraintSystem sys = s.system();
  auto objectives = s.objectives(sys);
  if (objectives.empty()) throw UsageError("--minimize", "give --minimize VAR and/or --maximize VAR");
  opt::OptOptions oo;
  oo.check.backend = s.search_backend();
  oo.strategy = s.strategy();
  Output out;
  Json list = Json::array();
  bool infeasible = false;
  for (const auto& obj : objectives) {
    std::string sense = obj.sense == ir::Sense::Minimize ? "minimize" : "maximize";
    std::string var = obj.terms.begin()->first;
    opt::OptResult r;
    if (has_interval_coeffs(sys))
      r = opt::optimize_interval(sys, obj);
    else if (!sys.disjunctions.empty())
      r = opt::optimize_disjunctive(sys, obj, oo);
    else
      r = opt::optimize(sys, obj, oo);
    Json j{{"sense", sense}, {"variable", var}, {"status", std::string(opt::to_string(r.status))}};
    out.text += fmt::format("{} {}: {}", sense, var, opt::to_string(r.status));
    if (r.status == opt::Status::Optimal) {
      out.text += " " + (r.exact_value ? fixed8(*r.exact_value) : fixed8(r.value));
      if (r.exact_value && s.show_exact()) out.text += " (" + format_scalar(*r.exact_value) + ")";
      j["value"] = r.value;
      if (r.exact_value) j["exact"] = format_scalar(*r.exact_value);
    }
    out.text += "\n";
    if (r.status == opt::Status::Infeasible) infeasible = true;
    if (r.mode) {
      out.text += "  " + mode_text(*r.mode);
      j["mode"] = mode_json(*r.mode);
    }
    list.push_back(std::move(j));
  }
  out.data["results"] = std::move(list);
  if (infeasible) out.code = kInfeasible;
  return out;
}

Output cmd_diagnose(const Session& s) {
  if (s.o().backend == "interval") throw UsageError("--backend", "diagnose needs f64 or exact");
  ir::ConstraintSystem sys = s.system();
  opt::DiagnosisModel model = opt::DiagnosisModel::instrument_all(sys);
  if (!s.o().components.empty()) {
    for (const auto& c : s.o().components)
      if (std::find(model.components.begin(), model.components.end(), c) == model.components.end())
        throw UsageError("--component", "'" + c + "' is not a resistor or diode of this system");
    model.components = s.o().components;
  }
  for (const auto& m : s.o().measures) {
    auto [var, value] = split_assignment("--measure", m);
    if (!sys.has_variable(var)) throw UsageError("--measure", "unknown variable '" + var + "'");
    model.measure(var, scalar_flag("--measure", value));
  }
  modes::CheckOptions co;
  co.backend = s.o().backend == "exact" ? modes::Backend::Exact : modes::Backend::Auto;
  opt::Diagnosis d = opt::diagnose(sys, model, co);
  Output out;
  std::string faults;
  for (const auto& f : d.faults) faults += (faults.empty() ? "" : ", ") + f;
  out.text = "probability = " + fixed8(d.probability);
  if (s.show_exact()) out.text += " (" + format_scalar(d.probability) + ")";
  out.text += "\nfaults = {" + faults + "}\n" + mode_text(d.mode);
  out.data = {{"probability", to_double(d.probability)},
              {"probability_exact", format_scalar(d.probability)},
              {"faults", d.faults},
              {"mode", mode_json(d.mode)}};
  return out;
}

/// Nominal value of each symbolic parameter.
std::map<std::string, Scalar> nominal_point(const FamilySpec& spec, const std::vector<std::string>& params) {
  std::map<std::string, Scalar> point;
  for (const auto& p : params) {
    if (p == "u_SRC")
      point[p] = spec.source_voltage;
    else if (p == "R")
      point[p] = spec.resistors[0].nominal;
    else
      point[p] = spec.resistors[static_cast<std::size_t>(p[1] - '1')].nominal;
  }
  return point;
}

std::map<std::string, Interval> tolerance_box(const std::map<std::string, Scalar>& point, const Scalar& t) {
  std::map<std::string, Interval> box;
  for (const auto& [p, v] : point)
    box[p] = p == "u_SRC" ? Interval::from_scalar(v) : Interval::hull(v * (1 - t), v * (1 + t));
  return box;
}

Output cmd_symbolic(const Session& s) {
  if (!s.o().in.empty()) throw UsageError("--in", "symbolic solves need a family");
  if (s.o().nonlinear) throw UsageError("--nonlinear", "symbolic resistances are parameters already");
  if (s.given("--backend")) throw UsageError("--backend", "does not apply to symbolic");
  FamilySpec nominal = s.spec();
  Scalar t = s.tolerance();
  FamilySpec sym = nominal;
  sym.with_tolerance(0);
  sym.symbolic_resistors = true;
  ir::ConstraintSystem sys = ir::lower(netgen::build(sym));
  std::vector<std::string> names = s.selection(sys, {"i_GND"});

  symbolic::SymbolicOptions so;
  Output out;
  auto render = [&](const std::map<std::string, symbolic::RationalFunction>& sol,
                    const std::map<std::string, Scalar>& point, Json& target) {
    Json vals = Json::object();
    for (const auto& v : names) {
      const auto& rf = sol.at(v);
      Scalar at = symbolic::rf_eval(rf, point);
      out.text += v + " = " + rf.to_string() + "\n";
      out.text += "  at nominal values = " + fixed8(at) + "\n";
      Json j{{"formula", rf.to_string()}, {"nominal", to_double(at)}, {"nominal_exact", format_scalar(at)}};
      if (t > 0) {
        Interval iv = symbolic::rf_interval_eval(rf, tolerance_box(point, t));
        out.text += "  over the tolerance box = " + interval8(iv) + "\n";
        j["enclosure"] = Json::array({iv.lo(), iv.hi()});
      }
      vals[v] = std::move(j);
    }
    target["values"] = std::move(vals);
  };

  if (!sys.disjunctions.empty() && nominal.family == Family::SE) {
    FamilySpec numeric = nominal;
    numeric.with_tolerance(0);
    modes::SearchResult r = modes::search_first(ir::lower(netgen::build(numeric)));
    symbolic::SymbolicBranch b = symbolic::solve_symbolic_branch(sys, r.mode, so);
    out.text = mode_text(b.mode);
    out.data["mode"] = mode_json(b.mode);
    render(b.solution, nominal_point(nominal, sys.parameters), out.data);
    out.text += "conditions:\n";
    for (const auto& c : b.conditions) out.text += "  " + c + "\n";
    out.data["conditions"] = b.conditions;
    return out;
  }

  bool has_alternates = std::any_of(nominal.resistors.begin(), nominal.resistors.end(),
                                    [](const netgen::ResistorSpec& r) { return !r.alternates.empty(); });
  if (has_alternates) {
    auto generic = symbolic::solve_symbolic(sys, so);
    Json list = Json::array();
    for (const auto& alt : symbolic::solve_symbolic_alternates(sym, so)) {
      out.text += "alternate " + alt.tag + ":\n";
      Json entry{{"alternate", alt.tag}};
      std::map<std::string, Scalar> point = nominal_point(nominal, sys.parameters);
      for (const auto& [p, v] : alt.fixed) point[p] = v;
      // the formula is shown with the alternate substituted; the interval
      // evaluation keeps the resistance symbolic around the alternate
      Json vals = Json::object();
      for (const auto& v : names) {
        Scalar at = symbolic::rf_eval(generic.at(v), point);
        out.text += v + " = " + alt.solution.at(v).to_string() + "\n";
        out.text += "  at nominal values = " + fixed8(at) + "\n";
        Json j{{"formula", alt.solution.at(v).to_string()}, {"nominal", to_double(at)},
               {"nominal_exact", format_scalar(at)}};
        if (t > 0) {
          Interval iv = symbolic::rf_interval_eval(generic.at(v), tolerance_box(point, t));
          out.text += "  over the tolerance box = " + interval8(iv) + "\n";
          j["enclosure"] = Json::array({iv.lo(), iv.hi()});
        }
        vals[v] = std::move(j);
      }
      entry["values"] = std::move(vals);
      list.push_back(std::move(entry));
    }
    out.data["alternates"] = std::move(list);
    return out;
  }

  render(symbolic::solve_symbolic(sys, so), nominal_point(nominal, sys.parameters), out.data);
  return out;
}

Output cmd_bench(const Session& s) {
  const Options& o = s.o();
  if (o.family.empty()) throw UsageError("--family", "required (be, fe or se)");
  if (o.family != "se" && s.given("--orientation")) throw UsageError("--orientation", "applies to --family se only");
  harness::SuiteConfig c = harness::SuiteConfig::defaults(family_flag(o.family));
  c.orientation = o.orientation == "literal" ? netgen::Orientation::Literal : netgen::Orientation::Figure;
  if (!o.source_voltage.empty()) c.source_voltage = scalar_flag("--source-voltage", o.source_voltage);
  if (!o.n_list.empty()) {
    c.n_list.clear();
    for (const auto& v : split_list(o.n_list)) {
      try {
        c.n_list.push_back(std::stoi(v));
      } catch (const std::exception&) {
        throw UsageError("--n-list", "malformed integer '" + v + "'");
      }
    }
  }
  if (!o.backends.empty()) {
    c.backends.clear();
    for (const auto& b : split_list(o.backends)) {
      try {
        c.backends.push_back(harness::parse_backend(b));
      } catch (const InvalidSpec& e) {
        throw UsageError("--backends", e.what());
      }
    }
  }
  if (!o.tolerances.empty()) {
    c.tolerances.clear();
    for (const auto& t : split_list(o.tolerances)) c.tolerances.push_back(scalar_flag("--tolerances", t));
  }
  c.repetitions = o.repetitions;
  c.seed = o.seed;
  try {
    c.validate();
  } catch (const InvalidSpec& e) {
    throw UsageError("bench", e.what());
  }
  harness::Report report = harness::run_suite(c);
  Output out;
  out.text = harness::render_report(report, o.format);
  return out;
}

Output cmd_export_lp(const Session& s) {
  ir::ConstraintSystem sys = s.system();
  auto objectives = s.objectives(sys);
  if (objectives.size() > 1) throw UsageError("--maximize", "an LP file holds one objective");
  if (!objectives.empty()) sys.objective = objectives.front();
  if (s.o().indicators) sys = ir::encode_indicators(sys, scalar_flag("--big-m", s.o().big_m));
  Output out;
  out.text = ir::to_lp_text(sys);
  out.data["text"] = out.text;
  return out;
}

// ------------------------------------------------------------------ setup

void add_family(CLI::App* cmd, Options& o) {
  cmd->add_option("--family", o.family, "Network family")->check(CLI::IsMember({"be", "fe", "se"}));
  cmd->add_option("--n", o.n, "Number of boxes (FE, SE)");
  cmd->add_option("--tolerance", o.tolerance, "Resistor tolerance, e.g. 0.1 or 10%");
  cmd->add_option("--tolerance-form", o.tolerance_form, "How a tolerance enters the system")
      ->check(CLI::IsMember({"interval", "inequalities", "strict"}));
  cmd->add_option("--orientation", o.orientation, "SE diode orientation")
      ->check(CLI::IsMember({"figure", "literal"}));
  cmd->add_option("--source-voltage", o.source_voltage, "Source voltage (default 12)");
  cmd->add_option("--resistor", o.resistors, "Nominal resistance, NAME=VALUE (R, R1..R5); repeatable");
  cmd->add_option("--alternates", o.alternates, "OR-ed resistances, NAME=V1,V2,...; repeatable");
  cmd->add_flag("--nonlinear", o.nonlinear, "Resistances as unknowns fixed by definitional equations");
  cmd->add_option("--in", o.in, "Read the system from an instance file instead");
}

void add_io(CLI::App* cmd, Options& o, bool backend) {
  if (backend)
    cmd->add_option("--backend", o.backend, "Solver backend")->check(CLI::IsMember({"f64", "exact", "interval"}));
  cmd->add_option("--out", o.out, "Write the result to a file");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "csv", "json"}));
  cmd->add_option("--seed", o.seed, "Seed for sampling");
  cmd->add_option("--threads", o.threads, "Worker threads for leaf enumeration")->check(CLI::Range(1u, 256u));
}

void add_vars(CLI::App* cmd, Options& o) {
  cmd->add_option("--var", o.vars, "Variable to print; repeatable");
  cmd->add_flag("--all", o.all, "Print every variable");
}

void add_objective(CLI::App* cmd, Options& o) {
  cmd->add_option("--minimize", o.minimize, "Variable to minimize");
  cmd->add_option("--maximize", o.maximize, "Variable to maximize");
}

std::string describe(const std::exception& e) {
  if (dynamic_cast<const UnsupportedFeature*>(&e) || dynamic_cast<const UnsupportedStrict*>(&e) ||
      dynamic_cast<const SizeCap*>(&e) || dynamic_cast<const NotSquare*>(&e) ||
      dynamic_cast<const HasDisjunctions*>(&e) || dynamic_cast<const NonlinearResidue*>(&e) ||
      dynamic_cast<const ExplosionGuard*>(&e))
    return std::string("Unsupported: ") + e.what();
  return std::string("error: ") + e.what();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Benchmark circuits: generation, solving, search, optimization and diagnosis", "circbench"};
  app.require_subcommand(1);

  auto* generate = app.add_subcommand("generate", "Write the constraint system as an instance file");
  add_family(generate, o);
  add_io(generate, o, false);
  generate->add_flag("--netlist", o.netlist, "Write the netlist instead");

  auto* stats = app.add_subcommand("stats", "Count variables and constraints");
  add_family(stats, o);
  add_io(stats, o, false);

  auto* solve = app.add_subcommand("solve", "Solve the system; OR-ed values give one solution per feasible branch");
  add_family(solve, o);
  add_io(solve, o, true);
  add_vars(solve, o);

  auto* interval_cmd = app.add_subcommand("interval", "Interval enclosure of the solution set");
  add_family(interval_cmd, o);
  add_io(interval_cmd, o, false);
  add_vars(interval_cmd, o);
  interval_cmd->add_flag("--vertices", o.vertices, "Hull of the exact solutions at the coefficient box vertices");
  interval_cmd->add_option("--oracle", o.oracle, "Compare with sampled exact ranges (number of samples)");

  auto* modes_cmd = app.add_subcommand("modes", "Search diode and OR-ed branches for a feasible mode");
  add_family(modes_cmd, o);
  add_io(modes_cmd, o, true);
  add_vars(modes_cmd, o);
  modes_cmd->add_flag("--enumerate", o.enumerate, "List every feasible mode");
  modes_cmd->add_option("--strategy", o.strategy, "Branch order")
      ->check(CLI::IsMember({"standard", "declaration", "pessimal"}));
  modes_cmd->add_option("--pin", o.pins, "Fix a disjunction, LABEL=TAG; repeatable");

  auto* optimize = app.add_subcommand("optimize", "Minimize or maximize a variable");
  add_family(optimize, o);
  add_io(optimize, o, true);
  add_objective(optimize, o);
  optimize->add_option("--strategy", o.strategy, "Branch order")
      ->check(CLI::IsMember({"standard", "declaration", "pessimal"}));

  auto* diagnose = app.add_subcommand("diagnose", "Most probable fault set consistent with measurements");
  add_family(diagnose, o);
  add_io(diagnose, o, true);
  diagnose->add_option("--measure", o.measures, "Observed value, VAR=VALUE; repeatable");
  diagnose->add_option("--component", o.components, "Component to instrument (default all); repeatable");

  auto* symbolic_cmd = app.add_subcommand("symbolic", "Closed-form solution over u_SRC and the resistances");
  add_family(symbolic_cmd, o);
  add_io(symbolic_cmd, o, true);
  add_vars(symbolic_cmd, o);

  auto* bench = app.add_subcommand("bench", "Run a benchmark suite and print the report");
  bench->add_option("--family", o.family, "Network family")->check(CLI::IsMember({"be", "fe", "se"}));
  bench->add_option("--orientation", o.orientation, "SE diode orientation")
      ->check(CLI::IsMember({"figure", "literal"}));
  bench->add_option("--source-voltage", o.source_voltage, "Source voltage (default 12)");
  bench->add_option("--n-list", o.n_list, "Comma-separated box counts");
  bench->add_option("--backends", o.backends, "Comma-separated backends (f64, exact, interval)");
  bench->add_option("--tolerances", o.tolerances, "Comma-separated tolerances, e.g. 0,10%,20%");
  bench->add_option("--repetitions", o.repetitions, "Timed runs per cell");
  add_io(bench, o, false);

  auto* export_lp = app.add_subcommand("export-lp", "Write the system as LP text");
  add_family(export_lp, o);
  add_io(export_lp, o, false);
  add_objective(export_lp, o);
  export_lp->add_flag("--indicators", o.indicators, "Encode OR-ed constraints with 0/1 indicators");
  export_lp->add_option("--big-m", o.big_m, "Big-M constant for --indicators");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  Session session(o, cmd);
  Output result;
  try {
    const std::string name = cmd->get_name();
    if (name != "bench") session.validate_family();
    if (name == "generate") result = cmd_generate(session);
    else if (name == "stats") result = cmd_stats(session);
    else if (name == "solve") result = cmd_solve(session, false);
    else if (name == "interval") result = cmd_solve(session, true);
    else if (name == "modes") result = cmd_modes(session);
    else if (name == "optimize") result = cmd_optimize(session);
    else if (name == "diagnose") result = cmd_diagnose(session);
    else if (name == "symbolic") result = cmd_symbolic(session);
    else if (name == "bench") result = cmd_bench(session);
    else result = cmd_export_lp(session);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Unsatisfiable& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << describe(e) << "\n";
    return kInternal;
  }

  std::string text;
  if (o.format == "table" || cmd->get_name() == "bench" || result.data.contains("text")) {
    text = result.text;
  } else if (o.format == "json") {
    text = result.data.dump(2) + "\n";
  } else {
    text = "key,value\n";
    flatten(result.data, "", text);
  }
  if (o.out.empty()) {
    out << text;
  } else {
    std::ofstream file(o.out);
    if (!(file << text)) {
      err << "error: cannot write " << o.out << "\n";
      return kInternal;
    }
  }
  return result.code;
}

}  // namespace circbench::cli

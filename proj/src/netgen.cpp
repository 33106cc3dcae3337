#include "circbench/netgen.hpp"

#include <map>
#include <set>
#include <sstream>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::netgen {

std::string to_string(Family f) {
  switch (f) {
    case Family::BE: return "BE";
    case Family::FE: return "FE";
    case Family::SE: return "SE";
  }
  return "?";
}

std::string to_string(Orientation o) {
  return o == Orientation::Figure ? "figure" : "literal";
}

std::string to_string(ComponentKind k) {
  switch (k) {
    case ComponentKind::Source: return "Source";
    case ComponentKind::Ground: return "Ground";
    case ComponentKind::Resistor: return "Resistor";
    case ComponentKind::Diode: return "Diode";
    case ComponentKind::Node3: return "Node3";
    case ComponentKind::Wire: return "Wire";
  }
  return "?";
}

void ResistorSpec::validate(const std::string& where) const {
  if (nominal <= 0) throw InvalidSpec(where + ": nominal resistance must be positive");
  if (tolerance < 0 || tolerance >= 1) throw InvalidSpec(where + ": tolerance must lie in [0, 1)");
  std::set<Scalar> seen;
  for (const auto& a : alternates) {
    if (a <= 0) throw InvalidSpec(where + ": alternate resistance must be positive");
    if (!seen.insert(a).second) throw InvalidSpec(where + ": alternate values must be distinct");
  }
}

FamilySpec FamilySpec::baby() {
  FamilySpec s;
  s.family = Family::BE;
  s.resistors = {ResistorSpec{}};
  return s;
}

FamilySpec FamilySpec::first(int n) {
  FamilySpec s;
  s.family = Family::FE;
  s.n = n;
  for (int j = 1; j <= 5; ++j) s.resistors.push_back(ResistorSpec{Scalar(100 * j), Scalar(0), {}});
  return s;
}

FamilySpec FamilySpec::second(int n, Orientation orientation) {
  FamilySpec s;
  s.family = Family::SE;
  s.n = n;
  s.orientation = orientation;
  s.resistors.assign(5, ResistorSpec{});
  return s;
}

FamilySpec& FamilySpec::with_tolerance(const Scalar& t) {
  for (auto& r : resistors) r.tolerance = t;
  return *this;
}

void FamilySpec::validate() const {
  if (family == Family::BE) {
    if (resistors.size() != 1) throw InvalidSpec("BE takes exactly one resistor spec");
  } else {
    if (n < 1) throw InvalidSpec(to_string(family) + " requires n >= 1, got " + std::to_string(n));
    if (resistors.size() != 5) throw InvalidSpec(to_string(family) + " takes five resistor specs");
  }
  if (symbolic_resistors && nonlinear_resistors)
    throw InvalidSpec("symbolic and nonlinear resistor modes are exclusive");
  if (symbolic_resistors) return;
  for (std::size_t j = 0; j < resistors.size(); ++j) {
    if (family == Family::SE && (j == 0 || j == 3)) continue;
    resistors[j].validate("R" + std::to_string(j + 1));
  }
}

int Component::num_ports() const {
  switch (kind) {
    case ComponentKind::Source:
    case ComponentKind::Ground: return 1;
    case ComponentKind::Resistor:
    case ComponentKind::Diode: return 2;
    case ComponentKind::Node3: return 3;
    case ComponentKind::Wire: return 0;
  }
  return 0;
}

std::vector<std::pair<PortRef, PortRef>> Netlist::connections() const {
  std::vector<std::pair<PortRef, PortRef>> out;
  for (const auto& c : components)
    if (c.kind == ComponentKind::Wire) out.emplace_back(c.wire_a, c.wire_b);
  return out;
}

std::size_t Netlist::num_ports() const {
  std::size_t total = 0;
  for (const auto& c : components) total += static_cast<std::size_t>(c.num_ports());
  return total;
}

std::optional<std::size_t> Netlist::find(const std::string& id) const {
  for (std::size_t i = 0; i < components.size(); ++i)
    if (components[i].id == id) return i;
  return std::nullopt;
}

std::string Netlist::port_variable(const PortRef& port, char quantity) const {
  const Component& c = components.at(port.component);
  if (c.kind == ComponentKind::Source || c.kind == ComponentKind::Ground)
    return std::string(1, quantity) + "_" + c.id;
  return std::string(1, quantity) + std::to_string(port.port) + "_" + c.id;
}

void Netlist::validate() const {
  std::map<std::pair<std::size_t, int>, int> uses;
  for (const auto& c : components) {
    if (c.kind != ComponentKind::Wire) continue;
    for (const PortRef& p : {c.wire_a, c.wire_b}) {
      if (p.component >= components.size())
        throw StructuralError(c.id + ": wire endpoint references a missing component");
      const Component& target = components[p.component];
      if (target.kind == ComponentKind::Wire)
        throw StructuralError(c.id + ": wire endpoint references another wire");
      if (p.port < 1 || p.port > target.num_ports())
        throw StructuralError(c.id + ": " + target.id + " has no port " + std::to_string(p.port));
      ++uses[{p.component, p.port}];
    }
  }
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Component& c = components[i];
    for (int p = 1; p <= c.num_ports(); ++p) {
      int count = uses[{i, p}];
      if (count == 0) throw StructuralError("dangling port " + port_variable({i, p}, 'u'));
      if (count > 1) throw StructuralError("port " + port_variable({i, p}, 'u') + " is wired more than once");
    }
  }
}

std::string Netlist::serialize() const {
  std::ostringstream out;
  out << "netlist family=" << to_string(family) << " n=" << n << " symbolic=" << symbolic
      << " nonlinear=" << nonlinear << " tolerance_form=" << static_cast<int>(tolerance_form) << "\n";
  for (std::size_t i = 0; i < components.size(); ++i) {
    const Component& c = components[i];
    out << i << " " << to_string(c.kind) << " " << c.id << " group=" << c.group;
    switch (c.kind) {
      case ComponentKind::Resistor:
        out << " param=" << c.parameter << " nominal=" << format_scalar(c.resistor.nominal)
            << " tolerance=" << format_scalar(c.resistor.tolerance);
        if (!c.resistor.alternates.empty()) {
          out << " alternates=";
          for (std::size_t k = 0; k < c.resistor.alternates.size(); ++k)
            out << (k ? "," : "") << format_scalar(c.resistor.alternates[k]);
        }
        break;
      case ComponentKind::Source: out << " voltage=" << format_scalar(c.voltage); break;
      case ComponentKind::Wire:
        out << " " << c.wire_a.component << "." << c.wire_a.port << " " << c.wire_b.component << "."
            << c.wire_b.port;
        break;
      default: break;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

class Builder {
 public:
  explicit Builder(Netlist& net) : net_(net) {}

  std::size_t add(Component c) {
    net_.components.push_back(std::move(c));
    std::size_t index = net_.components.size() - 1;
    ids_[net_.components.back().id] = index;
    return index;
  }

  std::size_t resistor(const std::string& id, int group, const std::string& param, const ResistorSpec& spec) {
    Component c;
    c.id = id;
    c.kind = ComponentKind::Resistor;
    c.group = group;
    c.parameter = param;
    c.resistor = spec;
    return add(std::move(c));
  }

  std::size_t simple(const std::string& id, ComponentKind kind, int group) {
    Component c;
    c.id = id;
    c.kind = kind;
    c.group = group;
    return add(std::move(c));
  }

  std::size_t source(const Scalar& volts) {
    Component c;
    c.id = "SRC";
    c.kind = ComponentKind::Source;
    c.group = 0;
    c.voltage = volts;
    return add(std::move(c));
  }

  // Wires may reference components added later, so endpoints are resolved
  // by id in finish().
  void wire(const std::string& a, int pa, const std::string& b, int pb) {
    pending_.push_back({net_.components.size(), a, pa, b, pb});
    Component c;
    c.id = "W" + std::to_string(wire_count_++);
    c.kind = ComponentKind::Wire;
    net_.components.push_back(std::move(c));
  }

  void finish() {
    for (const auto& p : pending_) {
      auto ia = ids_.find(p.a);
      auto ib = ids_.find(p.b);
      if (ia == ids_.end() || ib == ids_.end())
        throw StructuralError("wire references unknown component " + (ia == ids_.end() ? p.a : p.b));
      net_.components[p.index].wire_a = {ia->second, p.pa};
      net_.components[p.index].wire_b = {ib->second, p.pb};
    }
    net_.validate();
  }

 private:
  struct Pending {
    std::size_t index;
    std::string a;
    int pa;
    std::string b;
    int pb;
  };
  Netlist& net_;
  std::map<std::string, std::size_t> ids_;
  std::vector<Pending> pending_;
  int wire_count_ = 0;
};

Netlist start(const FamilySpec& spec) {
  Netlist net;
  net.family = spec.family;
  net.n = spec.family == Family::BE ? 1 : spec.n;
  net.symbolic = spec.symbolic_resistors;
  net.nonlinear = spec.nonlinear_resistors;
  net.tolerance_form = spec.tolerance_form;
  return net;
}

// Shared chain builder for FE and SE: the two families differ only in which
// bridge positions hold diodes.
Netlist build_chain(const FamilySpec& spec, bool diodes) {
  spec.validate();
  Netlist net = start(spec);
  Builder b(net);

  auto name = [&](int position, int box) {
    bool is_diode = diodes && (position == 1 || position == 4);
    return std::string(is_diode ? "D" : "R") + std::to_string(position) + "_B" + std::to_string(box);
  };

  for (int box = 1; box <= spec.n; ++box) {
    const std::string s = "_B" + std::to_string(box);
    if (diodes) {
      for (int j : {2, 3, 5}) b.resistor(name(j, box), box, "R" + std::to_string(j), spec.resistors[j - 1]);
      for (int j : {1, 4}) b.simple(name(j, box), ComponentKind::Diode, box);
    } else {
      for (int j = 1; j <= 5; ++j) b.resistor(name(j, box), box, "R" + std::to_string(j), spec.resistors[j - 1]);
    }
    for (int j = 1; j <= 4; ++j) b.simple("N" + std::to_string(j) + s, ComponentKind::Node3, box);

    // D1 is reversed in the figure orientation: its port 1 faces N1.
    bool flip_d1 = diodes && spec.orientation == Orientation::Figure;
    b.wire("N1" + s, 1, name(5, box), 2);
    b.wire("N1" + s, 2, name(1, box), flip_d1 ? 1 : 2);
    b.wire("N1" + s, 3, name(3, box), 1);
    b.wire("N2" + s, 2, name(1, box), flip_d1 ? 2 : 1);
    b.wire("N2" + s, 3, name(2, box), 1);
    b.wire("N3" + s, 2, name(3, box), 2);
    b.wire("N3" + s, 3, name(4, box), 2);
    b.wire("N4" + s, 1, name(5, box), 1);
    b.wire("N4" + s, 2, name(2, box), 2);
    b.wire("N4" + s, 3, name(4, box), 1);
  }

  b.source(spec.source_voltage);
  b.simple("GND", ComponentKind::Ground, spec.n + 1);
  b.wire("SRC", 1, "N2_B1", 1);
  b.wire("N3_B" + std::to_string(spec.n), 1, "GND", 1);
  for (int box = 2; box <= spec.n; ++box)
    b.wire("N3_B" + std::to_string(box - 1), 1, "N2_B" + std::to_string(box), 1);
  b.finish();
  return net;
}

}  // namespace

Netlist build_baby(const FamilySpec& spec) {
  if (spec.family != Family::BE) throw InvalidSpec("build_baby requires family BE");
  spec.validate();
  Netlist net = start(spec);
  Builder b(net);
  b.source(spec.source_voltage);
  b.wire("SRC", 1, "R", 1);
  b.resistor("R", 1, "R", spec.resistors[0]);
  b.wire("R", 2, "GND", 1);
  b.simple("GND", ComponentKind::Ground, 2);
  b.finish();
  return net;
}

Netlist build_first(const FamilySpec& spec) {
  if (spec.family != Family::FE) throw InvalidSpec("build_first requires family FE");
  return build_chain(spec, false);
}

Netlist build_second(const FamilySpec& spec) {
  if (spec.family != Family::SE) throw InvalidSpec("build_second requires family SE");
  return build_chain(spec, true);
}

Netlist build(const FamilySpec& spec) {
  switch (spec.family) {
    case Family::BE: return build_baby(spec);
    case Family::FE: return build_first(spec);
    case Family::SE: return build_second(spec);
  }
  throw InvalidSpec("unknown family");
}

InstanceStats stats(const Netlist& netlist) {
  ir::ConstraintSystem system = ir::lower(netlist);
  InstanceStats s;
  s.num_variables = system.variables.size();
  s.num_disjunctions = system.disjunctions.size();
  s.num_constraints = system.conjuncts.size() + system.disjunctions.size();
  s.num_ports = netlist.num_ports();
  return s;
}

}  // namespace circbench::netgen

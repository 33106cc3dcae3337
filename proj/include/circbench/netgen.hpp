#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "circbench/scalar.hpp"

namespace circbench::netgen {

enum class Family { BE, FE, SE };
enum class Orientation { Figure, Literal };

/// How a nonzero resistor tolerance enters the constraint system.
enum class ToleranceForm {
  IntervalCoefficient,   // R in [R(1-t), R(1+t)] on the law's coefficient
  InequalityPair,        // R(1-t) i <= u1-u2 <= R(1+t) i
  StrictInequalityPair,  // same with < and >
};

std::string to_string(Family f);
std::string to_string(Orientation o);

struct ResistorSpec {
  Scalar nominal{100};
  Scalar tolerance{0};
  /// OR-ed alternative values; when non-empty the law becomes a disjunction.
  std::vector<Scalar> alternates;

  void validate(const std::string& where) const;
};

struct FamilySpec {
  Family family = Family::BE;
  int n = 1;
  Scalar source_voltage{12};
  /// BE: one entry. FE/SE: five entries, index j-1 for position j (diode
  /// positions 1 and 4 are ignored for SE).
  std::vector<ResistorSpec> resistors;
  Orientation orientation = Orientation::Figure;
  /// Keep u_SRC and the resistances as symbolic parameters.
  bool symbolic_resistors = false;
  /// Resistances become unknowns fixed by definitional equations (R = 100),
  /// so the laws carry bilinear R*i products.
  bool nonlinear_resistors = false;
  ToleranceForm tolerance_form = ToleranceForm::IntervalCoefficient;

  static FamilySpec baby();
  static FamilySpec first(int n);
  static FamilySpec second(int n, Orientation orientation = Orientation::Figure);

  /// Applies one tolerance to every resistor.
  FamilySpec& with_tolerance(const Scalar& t);

  void validate() const;
};

enum class ComponentKind { Source, Ground, Resistor, Diode, Node3, Wire };
std::string to_string(ComponentKind k);

struct PortRef {
  std::size_t component = 0;
  int port = 1;  // numbered from 1
  bool operator==(const PortRef&) const = default;
};

struct Component {
  std::string id;  // "R3_B7", "N2_B1", "SRC", "GND", "D1", "R"
  ComponentKind kind = ComponentKind::Wire;
  int group = 0;  // 0 = source side, 1..n = box, n+1 = ground side
  /// Resistor: parameter name shared by all boxes ("R3", or "R" for BE).
  std::string parameter;
  ResistorSpec resistor;
  Scalar voltage;  // Source
  PortRef wire_a, wire_b;  // Wire endpoints

  int num_ports() const;
};

struct Netlist {
  Family family = Family::BE;
  int n = 1;
  std::vector<Component> components;  // in constraint listing order
  bool symbolic = false;
  bool nonlinear = false;
  ToleranceForm tolerance_form = ToleranceForm::IntervalCoefficient;

  /// Wire endpoints, one pair per Wire component.
  std::vector<std::pair<PortRef, PortRef>> connections() const;
  std::size_t num_ports() const;
  std::optional<std::size_t> find(const std::string& id) const;

  /// "i2_R3_B7", "u_SRC", ...
  std::string port_variable(const PortRef& port, char quantity) const;

  /// Throws StructuralError naming the first dangling or doubly wired port.
  void validate() const;

  /// Deterministic text dump.
  std::string serialize() const;
};

Netlist build_baby(const FamilySpec& spec);
Netlist build_first(const FamilySpec& spec);
Netlist build_second(const FamilySpec& spec);
/// Dispatches on spec.family.
Netlist build(const FamilySpec& spec);

struct InstanceStats {
  std::size_t num_variables = 0;
  std::size_t num_constraints = 0;  // a disjunction counts as one constraint
  std::size_t num_disjunctions = 0;
  std::size_t num_ports = 0;
};

InstanceStats stats(const Netlist& netlist);

}  // namespace circbench::netgen

#include <algorithm>
#include <numeric>
#include <set>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::ir {

namespace {

using netgen::Component;
using netgen::ComponentKind;
using netgen::Netlist;
using netgen::PortRef;
using netgen::ToleranceForm;

class Lowering {
 public:
  explicit Lowering(const Netlist& net) : net_(net) {}

  ConstraintSystem run() {
    net_.validate();
    sys_.name = netgen::to_string(net_.family) + (net_.family == netgen::Family::BE ? "" : "(" + std::to_string(net_.n) + ")");
    declare_names();
    for (const Component& c : net_.components) emit(c);
    sys_.validate();
    return std::move(sys_);
  }

 private:
  std::string var(std::size_t component, int port, char q) const { return net_.port_variable(PortRef{component, port}, q); }

  void declare_names() {
    if (net_.symbolic) sys_.parameters.push_back("u_SRC");
    std::vector<std::size_t> order(net_.components.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return net_.components[a].group < net_.components[b].group; });
    for (const Component& c : net_.components) {
      if (c.kind != ComponentKind::Resistor) continue;
      if (net_.symbolic && std::find(sys_.parameters.begin(), sys_.parameters.end(), c.parameter) == sys_.parameters.end())
        sys_.parameters.push_back(c.parameter);
      if (net_.nonlinear && std::find(sys_.variables.begin(), sys_.variables.end(), c.parameter) == sys_.variables.end())
        sys_.variables.push_back(c.parameter);
    }
    for (std::size_t idx : order) {
      const Component& c = net_.components[idx];
      for (int p = 1; p <= c.num_ports(); ++p) {
        sys_.variables.push_back(var(idx, p, 'i'));
        std::string u = var(idx, p, 'u');
        if (!(net_.symbolic && c.kind == ComponentKind::Source)) sys_.variables.push_back(u);
      }
    }
  }

  std::size_t index_of(const Component& c) const { return static_cast<std::size_t>(&c - net_.components.data()); }

  void push(LinearConstraint c) { sys_.conjuncts.push_back(std::move(c)); }

  void emit(const Component& c) {
    std::size_t k = index_of(c);
    switch (c.kind) {
      case ComponentKind::Source:
        if (!net_.symbolic) push(make_constraint({{"u_SRC", 1}}, Relation::EQ, c.voltage, "SRC/source"));
        break;
      case ComponentKind::Ground:
        push(make_constraint({{"u_GND", 1}}, Relation::EQ, 0, "GND/ground"));
        break;
      case ComponentKind::Wire: {
        const PortRef& a = c.wire_a;
        const PortRef& b = c.wire_b;
        push(make_constraint({{var(a.component, a.port, 'i'), 1}, {var(b.component, b.port, 'i'), 1}}, Relation::EQ,
                             0, c.id + "/current"));
        push(make_constraint({{var(a.component, a.port, 'u'), 1}, {var(b.component, b.port, 'u'), -1}}, Relation::EQ,
                             0, c.id + "/voltage"));
        break;
      }
      case ComponentKind::Node3:
        push(make_constraint({{var(k, 1, 'i'), 1}, {var(k, 2, 'i'), 1}, {var(k, 3, 'i'), 1}}, Relation::EQ, 0,
                             c.id + "/kcl"));
        push(make_constraint({{var(k, 1, 'u'), 1}, {var(k, 2, 'u'), -1}}, Relation::EQ, 0, c.id + "/tie"));
        push(make_constraint({{var(k, 1, 'u'), 1}, {var(k, 3, 'u'), -1}}, Relation::EQ, 0, c.id + "/tie"));
        break;
      case ComponentKind::Resistor: emit_resistor(c, k); break;
      case ComponentKind::Diode: emit_diode(c, k); break;
    }
  }

  void emit_diode(const Component& c, std::size_t k) {
    const std::string i1 = var(k, 1, 'i'), u1 = var(k, 1, 'u'), u2 = var(k, 2, 'u');
    push(make_constraint({{i1, 1}, {var(k, 2, 'i'), 1}}, Relation::EQ, 0, c.id + "/sum"));
    Disjunction d;
    d.label = c.id;
    d.branches.push_back({make_constraint({{u1, 1}, {u2, -1}}, Relation::EQ, 0, c.id + "/law"),
                          make_constraint({{i1, 1}}, Relation::GE, 0, c.id + "/law")});
    d.branches.push_back({make_constraint({{u1, 1}, {u2, -1}}, Relation::LT, 0, c.id + "/law"),
                          make_constraint({{i1, 1}}, Relation::EQ, 0, c.id + "/law")});
    d.branch_tags = {"Conducting", "Blocking"};
    sys_.disjunctions.push_back(std::move(d));
  }

  // Law constraints for one resistance value. In nonlinear mode the value is
  // expressed as a multiple of the resistance unknown.
  std::vector<LinearConstraint> law(const Component& c, std::size_t k, const Scalar& value) {
    const std::string i1 = var(k, 1, 'i'), u1 = var(k, 1, 'u'), u2 = var(k, 2, 'u');
    const Scalar& t = c.resistor.tolerance;
    const std::string label = c.id + "/law";

    auto base = [&](const Scalar& v, Relation rel) {
      LinearConstraint lc = make_constraint({{u1, 1}, {u2, -1}}, rel, 0, label);
      if (net_.nonlinear)
        lc.product(-v / c.resistor.nominal, c.parameter, i1);
      else
        lc.add(i1, -v);
      return lc;
    };

    if (t == 0) return {base(value, Relation::EQ)};
    switch (net_.tolerance_form) {
      case ToleranceForm::IntervalCoefficient: {
        LinearConstraint lc = base(value, Relation::EQ);
        // nonlinear mode carries the tolerance on the definitional equation
        if (!net_.nonlinear) lc.interval_coeffs[i1] = {-value * (1 + t), -value * (1 - t)};
        return {lc};
      }
      case ToleranceForm::InequalityPair:
        return {base(value * (1 - t), Relation::GE), base(value * (1 + t), Relation::LE)};
      case ToleranceForm::StrictInequalityPair:
        return {base(value * (1 - t), Relation::GT), base(value * (1 + t), Relation::LT)};
    }
    return {};
  }

  void emit_resistor(const Component& c, std::size_t k) {
    const std::string i1 = var(k, 1, 'i');
    push(make_constraint({{i1, 1}, {var(k, 2, 'i'), 1}}, Relation::EQ, 0, c.id + "/sum"));

    if (net_.symbolic) {
      LinearConstraint lc = make_constraint({{var(k, 1, 'u'), 1}, {var(k, 2, 'u'), -1}}, Relation::EQ, 0, c.id + "/law");
      lc.product(-1, c.parameter, i1);
      push(std::move(lc));
      return;
    }

    if (c.resistor.alternates.empty()) {
      for (auto& lc : law(c, k, c.resistor.nominal)) push(std::move(lc));
    } else {
      Disjunction d;
      d.label = c.id;
      for (const auto& alt : c.resistor.alternates) {
        d.branches.push_back(law(c, k, alt));
        d.branch_tags.push_back(c.parameter + "=" + format_scalar(alt));
      }
      if (d.branches.size() == 1) {
        for (auto& lc : d.branches.front()) push(std::move(lc));
      } else {
        sys_.disjunctions.push_back(std::move(d));
      }
    }

    if (net_.nonlinear && defined_.insert(c.parameter).second) {
      LinearConstraint def = make_constraint({{c.parameter, 1}}, Relation::EQ, c.resistor.nominal, c.parameter + "/definition");
      const Scalar& t = c.resistor.tolerance;
      if (t != 0 && net_.tolerance_form == ToleranceForm::IntervalCoefficient)
        def.interval_coeffs[c.parameter] = {1 / (1 + t), 1 / (1 - t)};
      push(std::move(def));
    }
  }

  const Netlist& net_;
  ConstraintSystem sys_;
  std::set<std::string> defined_;
};

}  // namespace

ConstraintSystem lower(const netgen::Netlist& netlist) { return Lowering(netlist).run(); }

}  // namespace circbench::ir

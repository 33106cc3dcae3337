#include <fmt/format.h>

#include <fstream>
#include <set>
#include <sstream>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::ir {

namespace {

// Exact decimal when the value terminates, otherwise 17 significant digits.
std::string number(const Scalar& v) {
  std::string exact = format_scalar(v);
  if (exact.find('/') == std::string::npos) return exact;
  return fmt::format("{:.17g}", to_double(v));
}

// Appends " + 3 x" / " - 3 x" items, wrapping long rows.
class RowWriter {
 public:
  explicit RowWriter(std::ostringstream& out) : out_(out) {}

  void term(const Scalar& coef, const std::string& name) {
    if (count_ > 0 && count_ % 8 == 0) out_ << "\n   ";
    out_ << (coef < 0 ? " - " : (count_ == 0 ? " " : " + ")) << number(abs(coef)) << " " << name;
    ++count_;
  }
  bool empty() const { return count_ == 0; }

 private:
  std::ostringstream& out_;
  std::size_t count_ = 0;
};

}  // namespace

std::string to_lp_text(const ConstraintSystem& system) {
  if (!system.disjunctions.empty())
    throw UnsupportedFeature("disjunctions must be encoded with indicators before LP export");
  if (!system.parameters.empty()) throw UnsupportedFeature("symbolic parameters cannot be exported to LP");
  for (const auto& c : system.conjuncts) {
    if (is_strict(c.relation)) throw UnsupportedStrict("strict relation in " + c.label + " has no LP form");
    if (!c.products.empty()) throw UnsupportedFeature("product terms in " + c.label + " have no LP form");
    if (!c.interval_coeffs.empty())
      throw UnsupportedFeature("interval coefficients in " + c.label + " have no LP form");
  }

  std::ostringstream out;
  if (!system.name.empty()) out << "\\ " << system.name << "\n";
  const bool maximize = system.objective && system.objective->sense == Sense::Maximize;
  out << (maximize ? "Maximize" : "Minimize") << "\n obj:";
  {
    RowWriter row(out);
    if (system.objective)
      for (const auto& [name, coef] : system.objective->terms) row.term(coef, name);
    if (system.objective && system.objective->constant != 0) {
      out << (system.objective->constant < 0 ? " - " : " + ") << number(abs(system.objective->constant));
    } else if (row.empty() && !system.variables.empty()) {
      out << " 0 " << system.variables.front();
    }
  }
  out << "\nSubject To\n";
  for (std::size_t k = 0; k < system.conjuncts.size(); ++k) {
    const LinearConstraint& c = system.conjuncts[k];
    out << " c" << (k + 1) << ":";
    RowWriter row(out);
    for (const auto& [name, coef] : c.terms) row.term(coef, name);
    if (row.empty() && !system.variables.empty()) out << " 0 " << system.variables.front();
    out << " " << to_string(c.relation) << " " << number(c.rhs) << "\n";
  }

  std::set<std::string> binary(system.binaries.begin(), system.binaries.end());
  out << "Bounds\n";
  for (const auto& v : system.variables)
    if (!binary.count(v)) out << " " << v << " free\n";
  if (!binary.empty()) {
    out << "Binaries\n";
    for (const auto& b : system.binaries) out << " " << b << "\n";
  }
  out << "End\n";
  return out.str();
}

void export_lp(const ConstraintSystem& system, const std::filesystem::path& path) {
  std::string text = to_lp_text(system);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace circbench::ir

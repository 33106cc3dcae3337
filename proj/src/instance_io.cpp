#include <fstream>
#include <sstream>

#include "circbench/errors.hpp"
#include "circbench/ir.hpp"

namespace circbench::ir {

namespace {

constexpr std::string_view kMagic = "circbench-instance";

void check_token(const std::string& token, const char* what) {
  if (token.empty() || token == "-") return;
  for (char ch : token)
    if (std::isspace(static_cast<unsigned char>(ch)))
      throw InvalidSpec(std::string(what) + " '" + token + "' contains whitespace");
}

std::string encode(const std::string& token) { return token.empty() ? "-" : token; }

void write_constraint(std::ostream& out, const LinearConstraint& c) {
  check_token(c.label, "label");
  out << "constraint " << to_string(c.relation) << " " << format_scalar(c.rhs) << " " << c.terms.size() << " "
      << c.products.size() << " " << c.interval_coeffs.size() << " " << encode(c.label) << "\n";
  for (const auto& [name, coef] : c.terms) out << "term " << format_scalar(coef) << " " << name << "\n";
  for (const auto& p : c.products)
    out << "product " << format_scalar(p.coef) << " " << p.first << " " << p.second << "\n";
  for (const auto& [name, iv] : c.interval_coeffs)
    out << "interval " << name << " " << format_scalar(iv.lo) << " " << format_scalar(iv.hi) << "\n";
}

void write_names(std::ostream& out, const char* section, const std::vector<std::string>& names) {
  out << section << " " << names.size() << "\n";
  for (const auto& n : names) {
    check_token(n, "name");
    out << n << "\n";
  }
}

class Reader {
 public:
  explicit Reader(std::string_view text) {
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(start, end - start));
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(std::move(line));
      start = end + 1;
    }
    while (!lines_.empty() && lines_.back().empty()) lines_.pop_back();
  }

  std::size_t line_number() const { return pos_; }

  // Next line split into whitespace-separated fields.
  std::vector<std::string> fields() {
    if (pos_ >= lines_.size()) throw ParseError(pos_ + 1, "unexpected end of input");
    current_ = lines_[pos_++];
    std::istringstream in(current_);
    std::vector<std::string> out;
    for (std::string f; in >> f;) out.push_back(f);
    return out;
  }

  const std::string& raw() const { return current_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(pos_, what); }

  std::vector<std::string> expect(std::string_view keyword, std::size_t count) {
    auto f = fields();
    if (f.empty() || f[0] != keyword) fail("expected '" + std::string(keyword) + "'");
    if (f.size() != count) fail("'" + std::string(keyword) + "' expects " + std::to_string(count - 1) + " fields");
    return f;
  }

  std::size_t count(const std::string& text) {
    try {
      std::size_t used = 0;
      long long v = std::stoll(text, &used);
      if (used != text.size() || v < 0) fail("invalid count '" + text + "'");
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      fail("invalid count '" + text + "'");
    }
  }

  Scalar scalar(const std::string& text) {
    try {
      return parse_scalar(text);
    } catch (const Error&) {
      fail("invalid number '" + text + "'");
    }
  }

 private:
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
  std::string current_;
};

std::string decode(const std::string& token) { return token == "-" ? std::string() : token; }

LinearConstraint read_constraint(Reader& in) {
  auto f = in.expect("constraint", 7);
  LinearConstraint c;
  try {
    c.relation = parse_relation(f[1]);
  } catch (const Error&) {
    in.fail("unknown relation '" + f[1] + "'");
  }
  c.rhs = in.scalar(f[2]);
  std::size_t nt = in.count(f[3]), np = in.count(f[4]), ni = in.count(f[5]);
  c.label = decode(f[6]);
  for (std::size_t i = 0; i < nt; ++i) {
    auto t = in.expect("term", 3);
    if (c.terms.count(t[2])) in.fail("duplicate term " + t[2]);
    Scalar coef = in.scalar(t[1]);
    if (coef == 0) in.fail("zero coefficient");
    c.terms.emplace(t[2], coef);
  }
  for (std::size_t i = 0; i < np; ++i) {
    auto t = in.expect("product", 4);
    c.products.push_back({in.scalar(t[1]), t[2], t[3]});
  }
  for (std::size_t i = 0; i < ni; ++i) {
    auto t = in.expect("interval", 4);
    c.interval_coeffs[t[1]] = {in.scalar(t[2]), in.scalar(t[3])};
  }
  return c;
}

std::vector<std::string> read_names(Reader& in, std::string_view section) {
  auto f = in.expect(section, 2);
  std::size_t k = in.count(f[1]);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) {
    auto g = in.fields();
    if (g.size() != 1) in.fail("expected a single name");
    names.push_back(g[0]);
  }
  return names;
}

}  // namespace

std::string to_instance_text(const ConstraintSystem& system) {
  std::ostringstream out;
  out << kMagic << " " << kInstanceFormatVersion << "\n";
  out << "name " << encode(system.name) << "\n";
  write_names(out, "variables", system.variables);
  write_names(out, "parameters", system.parameters);
  write_names(out, "binaries", system.binaries);
  out << "conjuncts " << system.conjuncts.size() << "\n";
  for (const auto& c : system.conjuncts) write_constraint(out, c);
  out << "disjunctions " << system.disjunctions.size() << "\n";
  for (const auto& d : system.disjunctions) {
    check_token(d.label, "label");
    out << "disjunction " << d.branches.size() << " " << encode(d.label) << "\n";
    for (std::size_t b = 0; b < d.branches.size(); ++b) {
      std::string tag = d.branch_tags.empty() ? "-" : encode(d.branch_tags[b]);
      check_token(tag, "tag");
      std::string weight = d.branch_weights.empty() ? "-" : format_scalar(d.branch_weights[b]);
      out << "branch " << d.branches[b].size() << " " << tag << " " << weight << "\n";
      for (const auto& c : d.branches[b]) write_constraint(out, c);
    }
  }
  if (system.objective) {
    const Objective& o = *system.objective;
    out << "objective " << (o.sense == Sense::Minimize ? "min" : "max") << " " << format_scalar(o.constant) << " "
        << o.terms.size() << "\n";
    for (const auto& [name, coef] : o.terms) out << "term " << format_scalar(coef) << " " << name << "\n";
  } else {
    out << "objective none\n";
  }
  out << "end\n";
  return out.str();
}

ConstraintSystem from_instance_text(std::string_view text) {
  Reader in(text);
  auto header = in.fields();
  if (header.size() != 2 || header[0] != kMagic) in.fail("missing instance header");
  int version = 0;
  try {
    version = std::stoi(header[1]);
  } catch (const std::logic_error&) {
    in.fail("invalid version '" + header[1] + "'");
  }
  if (version != kInstanceFormatVersion)
    throw VersionError("unsupported instance format version " + header[1] + " (expected " +
                       std::to_string(kInstanceFormatVersion) + ")");

  ConstraintSystem sys;
  auto name = in.fields();
  if (name.empty() || name[0] != "name") in.fail("expected 'name'");
  std::string rest = in.raw().substr(in.raw().find("name") + 4);
  rest.erase(0, rest.find_first_not_of(' '));
  sys.name = decode(rest);
  sys.variables = read_names(in, "variables");
  sys.parameters = read_names(in, "parameters");
  sys.binaries = read_names(in, "binaries");

  std::size_t nc = in.count(in.expect("conjuncts", 2)[1]);
  for (std::size_t i = 0; i < nc; ++i) sys.conjuncts.push_back(read_constraint(in));

  std::size_t nd = in.count(in.expect("disjunctions", 2)[1]);
  for (std::size_t i = 0; i < nd; ++i) {
    auto f = in.expect("disjunction", 3);
    Disjunction d;
    d.label = decode(f[2]);
    std::size_t nb = in.count(f[1]);
    bool tags = false, weights = false;
    for (std::size_t b = 0; b < nb; ++b) {
      auto g = in.expect("branch", 4);
      bool has_tag = g[2] != "-", has_weight = g[3] != "-";
      if (b == 0) {
        tags = has_tag;
        weights = has_weight;
      } else if (has_tag != tags || has_weight != weights) {
        in.fail("branches of one disjunction must all carry tags and weights or none");
      }
      if (tags) d.branch_tags.push_back(g[2]);
      if (weights) d.branch_weights.push_back(in.scalar(g[3]));
      std::size_t k = in.count(g[1]);
      std::vector<LinearConstraint> branch;
      for (std::size_t j = 0; j < k; ++j) branch.push_back(read_constraint(in));
      d.branches.push_back(std::move(branch));
    }
    sys.disjunctions.push_back(std::move(d));
  }

  auto obj = in.fields();
  if (obj.size() == 2 && obj[0] == "objective" && obj[1] == "none") {
  } else if (obj.size() == 4 && obj[0] == "objective" && (obj[1] == "min" || obj[1] == "max")) {
    Objective o;
    o.sense = obj[1] == "min" ? Sense::Minimize : Sense::Maximize;
    o.constant = in.scalar(obj[2]);
    std::size_t k = in.count(obj[3]);
    for (std::size_t j = 0; j < k; ++j) {
      auto t = in.expect("term", 3);
      o.terms[t[2]] = in.scalar(t[1]);
    }
    sys.objective = std::move(o);
  } else {
    in.fail("expected 'objective'");
  }
  auto end = in.fields();
  if (end.size() != 1 || end[0] != "end") in.fail("expected 'end'");

  try {
    sys.validate();
  } catch (const StructuralError& e) {
    throw ParseError(in.line_number(), e.what());
  }
  return sys;
}

void save_instance(const ConstraintSystem& system, const std::filesystem::path& path) {
  std::string text = to_instance_text(system);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

ConstraintSystem load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_instance_text(buf.str());
}

}  // namespace circbench::ir

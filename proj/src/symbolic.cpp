#include "circbench/symbolic.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>

#include "circbench/errors.hpp"

namespace circbench::symbolic {

// ------------------------------------------------------------ MultivarPoly

bool GrlexLess::operator()(const Monomial& a, const Monomial& b) const {
  unsigned da = std::accumulate(a.begin(), a.end(), 0u), db = std::accumulate(b.begin(), b.end(), 0u);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

MultivarPoly::MultivarPoly(std::vector<std::string> parameters) : params_(std::move(parameters)) {}

MultivarPoly MultivarPoly::constant(std::vector<std::string> parameters, const Scalar& value) {
  MultivarPoly p(std::move(parameters));
  p.add_term(Monomial(p.params_.size(), 0), value);
  return p;
}

MultivarPoly MultivarPoly::parameter(std::vector<std::string> parameters, const std::string& name) {
  auto it = std::find(parameters.begin(), parameters.end(), name);
  if (it == parameters.end()) throw MissingVariable("unknown parameter " + name);
  MultivarPoly p(std::move(parameters));
  Monomial m(p.params_.size(), 0);
  m[static_cast<std::size_t>(it - p.params_.begin())] = 1;
  p.add_term(m, 1);
  return p;
}

bool MultivarPoly::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && std::all_of(terms_.begin()->first.begin(),
                                                              terms_.begin()->first.end(),
                                                              [](unsigned e) { return e == 0; }));
}

Scalar MultivarPoly::constant_term() const {
  if (terms_.empty()) return 0;
  const auto& [m, c] = *terms_.begin();
  return std::all_of(m.begin(), m.end(), [](unsigned e) { return e == 0; }) ? c : Scalar(0);
}

unsigned MultivarPoly::degree() const {
  if (terms_.empty()) return 0;
  const Monomial& m = terms_.rbegin()->first;
  return std::accumulate(m.begin(), m.end(), 0u);
}

void MultivarPoly::add_term(const Monomial& m, const Scalar& coef) {
  if (sgn(coef) == 0) return;
  if (m.size() != params_.size()) throw DimensionMismatch("monomial does not match the parameter list");
  auto [it, fresh] = terms_.try_emplace(m, coef);
  if (fresh) return;
  it->second += coef;
  if (sgn(it->second) == 0) terms_.erase(it);
}

void MultivarPoly::adopt(const MultivarPoly& other) {
  if (params_ == other.params_ || other.params_.empty()) return;
  if (!params_.empty()) throw DimensionMismatch("polynomials over different parameter lists");
  Terms widened;
  for (const auto& [m, c] : terms_) widened.emplace(Monomial(other.params_.size(), 0), c);
  params_ = other.params_;
  terms_ = std::move(widened);
}

Scalar MultivarPoly::evaluate(const std::map<std::string, Scalar>& point) const {
  std::vector<Scalar> value(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto it = point.find(params_[k]);
    if (it == point.end()) throw MissingVariable("no value for parameter " + params_[k]);
    value[k] = it->second;
  }
  Scalar sum = 0;
  for (const auto& [m, c] : terms_) {
    Scalar t = c;
    for (std::size_t k = 0; k < m.size(); ++k)
      for (unsigned e = 0; e < m[k]; ++e) t *= value[k];
    sum += t;
  }
  return sum;
}

interval::Interval MultivarPoly::evaluate(const std::map<std::string, interval::Interval>& box) const {
  std::vector<interval::Interval> value(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto it = box.find(params_[k]);
    if (it == box.end()) throw MissingVariable("no interval for parameter " + params_[k]);
    value[k] = it->second;
  }
  interval::Interval sum(0);
  for (const auto& [m, c] : terms_) {
    interval::Interval t = interval::Interval::from_scalar(c);
    for (std::size_t k = 0; k < m.size(); ++k)
      for (unsigned e = 0; e < m[k]; ++e) t *= value[k];
    sum += t;
  }
  return sum;
}

MultivarPoly MultivarPoly::substitute(const std::map<std::string, Scalar>& values) const {
  std::vector<std::optional<Scalar>> fixed(params_.size());
  for (std::size_t k = 0; k < params_.size(); ++k)
    if (auto it = values.find(params_[k]); it != values.end()) fixed[k] = it->second;
  MultivarPoly out(params_);
  for (const auto& [m, c] : terms_) {
    Monomial q = m;
    Scalar t = c;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (!fixed[k]) continue;
      for (unsigned e = 0; e < q[k]; ++e) t *= *fixed[k];
      q[k] = 0;
    }
    out.add_term(q, t);
  }
  return out;
}

Scalar MultivarPoly::content() const {
  if (terms_.empty()) return 1;
  mpz_class g = 0, l = 1;
  for (const auto& [m, c] : terms_) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num_mpz_t());
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
  }
  Scalar out(g, l);
  out.canonicalize();
  return out;
}

Monomial MultivarPoly::monomial_content() const {
  Monomial out(params_.size(), 0);
  if (terms_.empty()) return out;
  out = terms_.begin()->first;
  for (const auto& [m, c] : terms_)
    for (std::size_t k = 0; k < m.size(); ++k) out[k] = std::min(out[k], m[k]);
  return out;
}

MultivarPoly MultivarPoly::divided_by_term(const Monomial& d, const Scalar& coef) const {
  MultivarPoly out(params_);
  for (const auto& [m, c] : terms_) {
    Monomial q = m;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q[k] < d[k]) throw DimensionMismatch("monomial does not divide every term");
      q[k] -= d[k];
    }
    out.terms_.emplace(std::move(q), c / coef);
  }
  return out;
}

std::optional<MultivarPoly> MultivarPoly::exact_divide(const MultivarPoly& divisor) const {
  if (divisor.is_zero()) throw DenominatorZero("division by the zero polynomial");
  MultivarPoly rest = *this;
  rest.adopt(divisor);
  MultivarPoly quotient(rest.params_.empty() ? divisor.params_ : rest.params_);
  const auto& [dm, dc] = divisor.leading();
  Monomial dm_full = dm;
  if (dm_full.size() != quotient.params_.size()) dm_full.assign(quotient.params_.size(), 0);
  while (!rest.is_zero()) {
    const auto& [lm, lc] = rest.leading();
    Monomial t = lm;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] < dm_full[k]) return std::nullopt;
      t[k] -= dm_full[k];
    }
    Scalar c = lc / dc;
    quotient.terms_.emplace(t, c);
    for (const auto& [m, dcoef] : divisor.terms_) {
      Monomial prod = t;
      for (std::size_t k = 0; k < prod.size() && k < m.size(); ++k) prod[k] += m[k];
      rest.add_term(prod, -c * dcoef);
    }
  }
  return quotient;
}

MultivarPoly MultivarPoly::operator-() const {
  MultivarPoly out = *this;
  for (auto& [m, c] : out.terms_) c = -c;
  return out;
}

MultivarPoly& MultivarPoly::operator+=(const MultivarPoly& o) {
  adopt(o);
  if (o.params_.empty() && !params_.empty()) {
    add_term(Monomial(params_.size(), 0), o.constant_term());
    return *this;
  }
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

MultivarPoly& MultivarPoly::operator-=(const MultivarPoly& o) { return *this += -o; }

MultivarPoly& MultivarPoly::operator*=(const Scalar& s) {
  if (sgn(s) == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, c] : terms_) c *= s;
  return *this;
}

MultivarPoly operator*(const MultivarPoly& a, const MultivarPoly& b) {
  if (a.params_.empty() && a.is_constant()) return b * a.constant_term();
  if (b.params_.empty() && b.is_constant()) return a * b.constant_term();
  if (a.params_ != b.params_) throw DimensionMismatch("polynomials over different parameter lists");
  MultivarPoly out(a.params_);
  Monomial prod(a.params_.size());
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) {
      for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = ma[k] + mb[k];
      out.add_term(prod, ca * cb);
    }
  }
  return out;
}

bool MultivarPoly::operator==(const MultivarPoly& o) const {
  if (params_ == o.params_) return terms_ == o.terms_;
  MultivarPoly diff = *this;
  diff -= o;
  return diff.is_zero();
}

namespace {

std::string render_monomial(const std::vector<std::string>& params, const Monomial& m) {
  std::string out;
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (m[k] == 0) continue;
    if (!out.empty()) out += '*';
    out += params[k];
    if (m[k] > 1) out += fmt::format("^{}", m[k]);
  }
  return out;
}

bool is_unit_monomial(const Monomial& m) {
  return std::all_of(m.begin(), m.end(), [](unsigned e) { return e == 0; });
}

}  // namespace

std::string MultivarPoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
    const auto& [m, c] = *it;
    bool negative = sgn(c) < 0;
    if (out.empty())
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    Scalar mag = abs(c);
    std::string mono = render_monomial(params_, m);
    if (mono.empty())
      out += format_scalar(mag);
    else if (mag == 1)
      out += mono;
    else
      out += format_scalar(mag) + "*" + mono;
  }
  return out;
}

// --------------------------------------------------------------------- gcd

namespace {

unsigned degree_in(const MultivarPoly& p, std::size_t x) {
  unsigned d = 0;
  for (const auto& [m, c] : p.terms()) d = std::max(d, m[x]);
  return d;
}

// Coefficient of x^e, as a polynomial free of x.
MultivarPoly coeff_in(const MultivarPoly& p, std::size_t x, unsigned e) {
  MultivarPoly out(p.parameters());
  for (const auto& [m, c] : p.terms()) {
    if (m[x] != e) continue;
    Monomial q = m;
    q[x] = 0;
    out.add_term(q, c);
  }
  return out;
}

MultivarPoly shift(const MultivarPoly& p, std::size_t x, unsigned e) {
  MultivarPoly out(p.parameters());
  for (const auto& [m, c] : p.terms()) {
    Monomial q = m;
    q[x] += e;
    out.add_term(q, c);
  }
  return out;
}

MultivarPoly primitive(const MultivarPoly& p) {
  if (p.is_zero()) return p;
  MultivarPoly out = p * (1 / p.content());
  return sgn(out.leading().second) < 0 ? -out : out;
}

MultivarPoly content_in(const MultivarPoly& p, std::size_t x) {
  MultivarPoly g(p.parameters());
  for (unsigned e = 0; e <= degree_in(p, x); ++e) {
    MultivarPoly c = coeff_in(p, x, e);
    if (c.is_zero()) continue;
    g = gcd(g, c);
    if (g.is_constant()) break;
  }
  return g;
}

// Pseudo-remainder of a by b with respect to x.
MultivarPoly prem(MultivarPoly a, const MultivarPoly& b, std::size_t x) {
  const unsigned db = degree_in(b, x);
  const MultivarPoly lb = coeff_in(b, x, db);
  for (unsigned da; !a.is_zero() && (da = degree_in(a, x)) >= db;) a = lb * a - shift(coeff_in(a, x, da), x, da - db) * b;
  return a;
}

// Primitive remainder sequence; a and b nonzero and non-constant.
MultivarPoly gcd_prs(const MultivarPoly& a, const MultivarPoly& b) {
  std::vector<std::string> params = a.parameters();
  std::size_t x = params.size();
  for (std::size_t k = 0; k < params.size() && x == params.size(); ++k)
    if (degree_in(a, k) > 0 || degree_in(b, k) > 0) x = k;
  if (degree_in(a, x) == 0) return gcd(a, content_in(b, x));
  if (degree_in(b, x) == 0) return gcd(content_in(a, x), b);

  MultivarPoly ca = content_in(a, x), cb = content_in(b, x);
  MultivarPoly p = *a.exact_divide(ca), q = *b.exact_divide(cb);
  if (degree_in(p, x) < degree_in(q, x)) std::swap(p, q);
  while (!q.is_zero() && degree_in(q, x) > 0) {
    MultivarPoly r = prem(p, q, x);
    p = std::move(q);
    q = r.is_zero() ? r : *r.exact_divide(content_in(r, x));
  }
  // q == 0 leaves p as the primitive gcd; a nonzero constant-in-x q means coprime parts
  MultivarPoly g = q.is_zero() ? primitive(p) : MultivarPoly::constant(params, 1);
  return primitive(gcd(ca, cb) * g);
}

mpz_class max_coefficient(const MultivarPoly& p) {
  mpz_class out = 0;
  for (const auto& [m, c] : p.terms())
    if (abs(c.get_num()) > out) out = abs(c.get_num());
  return out;
}

MultivarPoly evaluate_at(const MultivarPoly& p, std::size_t x, const mpz_class& xi) {
  MultivarPoly out(p.parameters());
  for (const auto& [m, c] : p.terms()) {
    Monomial q = m;
    q[x] = 0;
    mpz_class power;
    mpz_pow_ui(power.get_mpz_t(), xi.get_mpz_t(), m[x]);
    out.add_term(q, c * power);
  }
  return out;
}

// Heuristic gcd over Z[params] (Char, Geddes and Gonnet): evaluate one
// parameter at a large integer, recurse, rebuild from the xi-adic digits
// and accept only when the candidate divides both inputs. a and b have
// integer coefficients; the result carries the integer content.
std::optional<MultivarPoly> gcd_heuristic(const MultivarPoly& a, const MultivarPoly& b) {
  const std::vector<std::string>& params = a.parameters();
  std::size_t x = params.size();
  for (std::size_t k = 0; k < params.size() && x == params.size(); ++k)
    if (degree_in(a, k) > 0 || degree_in(b, k) > 0) x = k;
  Scalar ca = a.content(), cb = b.content();
  mpz_class integer_content;
  mpz_gcd(integer_content.get_mpz_t(), ca.get_num_mpz_t(), cb.get_num_mpz_t());
  if (x == params.size()) return MultivarPoly::constant(params, Scalar(integer_content));

  mpz_class xi = 2 * std::min(max_coefficient(a), max_coefficient(b)) + 29;
  for (int attempt = 0; attempt < 6; ++attempt, xi = xi * 73794 / 27011) {
    if (mpz_sizeinbase(xi.get_mpz_t(), 2) > 4096) break;
    MultivarPoly ea = evaluate_at(a, x, xi), eb = evaluate_at(b, x, xi);
    if (ea.is_zero() || eb.is_zero()) continue;
    std::optional<MultivarPoly> gamma = gcd_heuristic(ea, eb);
    if (!gamma) continue;
    MultivarPoly candidate(params);
    MultivarPoly rest = *gamma;
    const mpz_class half = xi / 2;
    for (unsigned e = 0; !rest.is_zero(); ++e) {
      MultivarPoly digit(params);
      for (const auto& [m, c] : rest.terms()) {
        mpz_class r = c.get_num() % xi;
        if (r > half) r -= xi;
        if (r < -half) r += xi;
        digit.add_term(m, Scalar(r));
      }
      candidate += shift(digit, x, e);
      rest -= digit;
      rest *= Scalar(1) / Scalar(xi);
    }
    if (candidate.is_zero()) continue;
    candidate = primitive(candidate);
    if (a.exact_divide(candidate) && b.exact_divide(candidate)) return candidate * Scalar(integer_content);
  }
  return std::nullopt;
}

}  // namespace

MultivarPoly gcd(const MultivarPoly& a, const MultivarPoly& b) {
  if (a.is_zero()) return primitive(b);
  if (b.is_zero()) return primitive(a);
  std::vector<std::string> params = a.parameters().empty() ? b.parameters() : a.parameters();
  if (a.is_constant() || b.is_constant()) return MultivarPoly::constant(params, 1);
  MultivarPoly pa = primitive(a), pb = primitive(b);
  if (pa.size() == 1 || pb.size() == 1) {
    Monomial m = pa.monomial_content(), mb = pb.monomial_content();
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = std::min(m[k], mb[k]);
    MultivarPoly g(params);
    g.add_term(m, 1);
    return g;
  }
  if (pa.size() <= pb.size() && pb.exact_divide(pa)) return pa;
  if (pb.size() <= pa.size() && pa.exact_divide(pb)) return pb;
  if (auto g = gcd_heuristic(pa, pb)) return primitive(*g);
  return gcd_prs(pa, pb);
}

// -------------------------------------------------------- RationalFunction

RationalFunction::RationalFunction(MultivarPoly numerator, MultivarPoly denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  normalize();
}

RationalFunction RationalFunction::from_poly(MultivarPoly p) {
  std::vector<std::string> params = p.parameters();
  return RationalFunction(std::move(p), MultivarPoly::constant(std::move(params), 1));
}

void RationalFunction::normalize() {
  if (den_.is_zero()) throw DenominatorZero("zero denominator");
  if (num_.parameters() != den_.parameters()) {
    if (num_.parameters().empty()) {
      MultivarPoly widened(den_.parameters());
      widened += num_;
      num_ = std::move(widened);
    } else if (den_.parameters().empty()) {
      MultivarPoly widened(num_.parameters());
      widened += den_;
      den_ = std::move(widened);
    } else {
      throw DimensionMismatch("numerator and denominator over different parameter lists");
    }
  }
  const std::vector<std::string>& params = num_.parameters();
  if (num_.is_zero()) {
    den_ = MultivarPoly::constant(params, 1);
    return;
  }
  if (!den_.is_constant()) {
    MultivarPoly g = gcd(num_, den_);
    if (!g.is_constant()) {
      num_ = *num_.exact_divide(g);
      den_ = *den_.exact_divide(g);
    }
  }
  // integer coefficients on both sides, no common integer factor
  Scalar cn = num_.content(), cd = den_.content();
  Scalar r = cn / cd;
  num_ *= Scalar(r.get_num()) / cn;
  den_ *= Scalar(r.get_den()) / cd;
  if (sgn(den_.leading().second) < 0) {
    num_ = -num_;
    den_ = -den_;
  }
}

RationalFunction& RationalFunction::operator+=(const RationalFunction& o) {
  if (den_ == o.den_) {
    num_ += o.num_;
  } else {
    num_ = num_ * o.den_ + o.num_ * den_;
    den_ = den_ * o.den_;
  }
  normalize();
  return *this;
}

RationalFunction& RationalFunction::operator-=(const RationalFunction& o) {
  RationalFunction neg = o;
  neg.num_ = -neg.num_;
  return *this += neg;
}

RationalFunction& RationalFunction::operator*=(const RationalFunction& o) {
  num_ = num_ * o.num_;
  den_ = den_ * o.den_;
  normalize();
  return *this;
}

RationalFunction& RationalFunction::operator/=(const RationalFunction& o) {
  if (o.num_.is_zero()) throw DenominatorZero("division by the zero rational function");
  MultivarPoly n = num_ * o.den_;
  den_ = den_ * o.num_;
  num_ = std::move(n);
  normalize();
  return *this;
}

std::string RationalFunction::to_string() const {
  const std::vector<std::string>& params = num_.parameters();
  const bool unit_den = den_.is_constant() && den_.constant_term() == 1;
  std::string top;
  Monomial common = num_.monomial_content();
  if (num_.size() > 1 && !is_unit_monomial(common))
    top = render_monomial(params, common) + "*(" + num_.divided_by_term(common, 1).to_string() + ")";
  else if (num_.size() > 1 && !unit_den)
    top = "(" + num_.to_string() + ")";
  else
    top = num_.to_string();
  if (unit_den) return top;
  bool bare = den_.size() == 1 && (den_.is_constant() || den_.leading().second == 1);
  return top + "/" + (bare ? den_.to_string() : "(" + den_.to_string() + ")");
}

// ------------------------------------------------------------------ parser

namespace {

class Parser {
 public:
  Parser(const std::vector<std::string>& params, std::string_view text) : params_(params), text_(text) {}

  RationalFunction parse() {
    RationalFunction out = expr();
    skip();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(1, fmt::format("column {}: {}", pos_ + 1, what));
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  RationalFunction constant(const Scalar& v) const {
    return RationalFunction::from_poly(MultivarPoly::constant(params_, v));
  }

  RationalFunction expr() {
    RationalFunction acc = term();
    for (;;) {
      if (eat('+'))
        acc += term();
      else if (eat('-'))
        acc -= term();
      else
        return acc;
    }
  }

  RationalFunction term() {
    RationalFunction acc = factor();
    for (;;) {
      if (eat('*'))
        acc *= factor();
      else if (eat('/'))
        acc /= factor();
      else
        return acc;
    }
  }

  RationalFunction factor() {
    if (eat('-')) return constant(-1) * factor();
    if (eat('+')) return factor();
    RationalFunction base = atom();
    if (!eat('^')) return base;
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an exponent");
    int e = std::stoi(std::string(text_.substr(start, pos_ - start)));
    RationalFunction out = constant(1);
    for (int k = 0; k < e; ++k) out *= base;
    return out;
  }

  RationalFunction atom() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (eat('(')) {
      RationalFunction inner = expr();
      if (!eat(')')) fail("expected ')'");
      return inner;
    }
    std::size_t start = pos_;
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) ++pos_;
      return constant(parse_scalar(text_.substr(start, pos_ - start)));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      std::string name(text_.substr(start, pos_ - start));
      if (std::find(params_.begin(), params_.end(), name) == params_.end()) fail("unknown parameter " + name);
      return RationalFunction::from_poly(MultivarPoly::parameter(params_, name));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::vector<std::string>& params_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

RationalFunction parse_rational_function(const std::vector<std::string>& parameters, std::string_view text) {
  return Parser(parameters, text).parse();
}

// -------------------------------------------------------------- evaluation

Scalar rf_eval(const RationalFunction& rf, const std::map<std::string, Scalar>& point) {
  Scalar d = rf.denominator().evaluate(point);
  if (sgn(d) == 0) throw DenominatorZero("denominator vanishes at the given point");
  return rf.numerator().evaluate(point) / d;
}

bool rf_equivalent(const RationalFunction& f, const RationalFunction& g, int trials, std::uint64_t seed) {
  std::set<std::string> names;
  for (const auto& p : f.parameters()) names.insert(p);
  for (const auto& p : g.parameters()) names.insert(p);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> draw(1000, 1000000);
  int done = 0;
  for (int attempt = 0; done < trials && attempt < 10 * trials; ++attempt) {
    std::map<std::string, Scalar> point;
    for (const auto& n : names) point[n] = draw(rng);
    Scalar df = f.denominator().evaluate(point), dg = g.denominator().evaluate(point);
    if (sgn(df) == 0 || sgn(dg) == 0) continue;
    if (f.numerator().evaluate(point) * dg != g.numerator().evaluate(point) * df) return false;
    ++done;
  }
  return done == trials;
}

interval::Interval rf_interval_eval(const RationalFunction& rf, const std::map<std::string, interval::Interval>& box) {
  interval::Interval d = rf.denominator().evaluate(box);
  if (d.contains_zero()) throw DenominatorStraddlesZero(fmt::format("denominator enclosure [{}, {}] contains 0", d.lo(), d.hi()));
  return rf.numerator().evaluate(box) / d;
}

// ------------------------------------------------------------------ solver

namespace {

struct Row {
  std::map<std::size_t, MultivarPoly> coef;
  MultivarPoly rhs;
};

std::vector<Row> build_rows(const ir::ConstraintSystem& system, const std::unordered_map<std::string, std::size_t>& index) {
  const std::vector<std::string>& params = system.parameters;
  auto poly_of = [&](const Scalar& c) { return MultivarPoly::constant(params, c); };
  auto param = [&](const std::string& name) { return MultivarPoly::parameter(params, name); };
  std::vector<Row> rows;
  for (const auto& c : system.conjuncts) {
    Row r{{}, poly_of(c.rhs)};
    auto add = [&](std::size_t v, const MultivarPoly& p) {
      auto [it, fresh] = r.coef.try_emplace(v, p);
      if (!fresh) it->second += p;
      if (it->second.is_zero()) r.coef.erase(it);
    };
    for (const auto& [name, v] : c.terms) {
      if (auto it = index.find(name); it != index.end())
        add(it->second, poly_of(v));
      else if (system.has_parameter(name))
        r.rhs -= param(name) * v;
      else
        throw MissingVariable("undeclared name " + name + " in " + c.label);
    }
    for (const auto& p : c.products) {
      bool first_param = system.has_parameter(p.first), second_param = system.has_parameter(p.second);
      if (first_param && second_param) {
        r.rhs -= param(p.first) * param(p.second) * p.coef;
      } else if (first_param || second_param) {
        const std::string& v = first_param ? p.second : p.first;
        auto it = index.find(v);
        if (it == index.end()) throw MissingVariable("undeclared name " + v + " in " + c.label);
        add(it->second, param(first_param ? p.first : p.second) * p.coef);
      } else {
        throw NonlinearResidue("product of two unknowns in " + c.label);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::map<std::string, RationalFunction> solve_symbolic(const ir::ConstraintSystem& system,
                                                      const SymbolicOptions& options) {
  if (!system.disjunctions.empty()) throw HasDisjunctions("solve_symbolic needs a conjunctive system; solve one branch");
  for (const auto& c : system.conjuncts) {
    if (c.relation != ir::Relation::EQ) throw NotSquare("inequality " + c.label + " in a symbolic solve");
    if (!c.interval_coeffs.empty()) throw UnsupportedFeature("interval coefficient in " + c.label);
  }
  const std::size_t n = system.variables.size();
  if (n > options.max_variables)
    throw SizeCap(fmt::format("{} unknowns exceed the symbolic cap of {}", n, options.max_variables));
  if (system.conjuncts.size() != n)
    throw NotSquare(fmt::format("{} equations for {} unknowns", system.conjuncts.size(), n));

  const std::vector<std::string>& params = system.parameters;
  const auto index = system.variable_index();
  std::vector<Row> rows = build_rows(system, index);

  // Phase A: pivots with constant coefficients, Markowitz order.
  std::vector<std::set<std::size_t>> col_rows(n);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (const auto& [v, p] : rows[r].coef) col_rows[v].insert(r);
  std::vector<bool> row_done(rows.size(), false), var_done(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> pivots;
  for (;;) {
    std::size_t best_r = 0, best_v = 0, best_cost = SIZE_MAX;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (row_done[r]) continue;
      for (const auto& [v, p] : rows[r].coef) {
        if (!p.is_constant()) continue;
        std::size_t cost = (rows[r].coef.size() - 1) * (col_rows[v].size() - 1);
        if (cost < best_cost) {
          best_cost = cost;
          best_r = r;
          best_v = v;
        }
      }
    }
    if (best_cost == SIZE_MAX) break;
    Row& pr = rows[best_r];
    Scalar inv = 1 / pr.coef.at(best_v).constant_term();
    for (std::size_t s : std::vector<std::size_t>(col_rows[best_v].begin(), col_rows[best_v].end())) {
      if (s == best_r) continue;
      Row& row = rows[s];
      MultivarPoly f = row.coef.at(best_v) * inv;
      for (const auto& [j, pj] : pr.coef) {
        if (j == best_v) continue;
        auto [it, fresh] = row.coef.try_emplace(j, MultivarPoly(params));
        it->second -= f * pj;
        if (it->second.is_zero()) {
          row.coef.erase(it);
          col_rows[j].erase(s);
        } else {
          col_rows[j].insert(s);
        }
      }
      row.rhs -= f * pr.rhs;
      row.coef.erase(best_v);
    }
    for (const auto& [j, pj] : pr.coef) col_rows[j].erase(best_r);
    col_rows[best_v].clear();
    row_done[best_r] = true;
    var_done[best_v] = true;
    pivots.emplace_back(best_r, best_v);
  }

  // Phase B: the remaining core over rational functions in lowest terms,
  // sparse, Markowitz order with the smallest pivot on ties.
  using RF = RationalFunction;
  struct CoreRow {
    std::map<std::size_t, RF> coef;
    RF rhs;
  };
  std::vector<CoreRow> core;
  std::vector<std::size_t> core_origin;
  std::map<std::size_t, std::set<std::size_t>> core_cols;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (row_done[r]) continue;
    if (rows[r].coef.empty()) throw SingularSymbolic("equation " + system.conjuncts[r].label + " is dependent");
    CoreRow cr{{}, RF::from_poly(rows[r].rhs)};
    for (const auto& [v, p] : rows[r].coef) {
      cr.coef.emplace(v, RF::from_poly(p));
      core_cols[v].insert(core.size());
    }
    core.push_back(std::move(cr));
    core_origin.push_back(r);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (!var_done[v] && !core_cols.count(v)) throw SingularSymbolic("unknown " + system.variables[v] + " is undetermined");

  std::vector<bool> core_done(core.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> core_pivots;
  for (std::size_t step = 0; step < core.size(); ++step) {
    std::size_t best_r = core.size(), best_v = 0, best_cost = SIZE_MAX, best_size = SIZE_MAX;
    for (std::size_t r = 0; r < core.size(); ++r) {
      if (core_done[r]) continue;
      for (const auto& [v, f] : core[r].coef) {
        std::size_t cost = (core[r].coef.size() - 1) * (core_cols[v].size() - 1);
        std::size_t size = f.numerator().size() + f.denominator().size();
        if (cost < best_cost || (cost == best_cost && size < best_size)) {
          best_cost = cost;
          best_size = size;
          best_r = r;
          best_v = v;
        }
      }
    }
    if (best_r == core.size()) {
      for (std::size_t r = 0; r < core.size(); ++r)
        if (!core_done[r]) throw SingularSymbolic("equation " + system.conjuncts[core_origin[r]].label + " is dependent");
    }
    CoreRow& pr = core[best_r];
    const RF pivot = pr.coef.at(best_v);
    for (std::size_t s : std::vector<std::size_t>(core_cols[best_v].begin(), core_cols[best_v].end())) {
      if (s == best_r) continue;
      CoreRow& row = core[s];
      RF f = row.coef.at(best_v) / pivot;
      for (const auto& [j, fj] : pr.coef) {
        if (j == best_v) continue;
        auto it = row.coef.find(j);
        if (it == row.coef.end()) {
          row.coef.emplace(j, RF::from_poly(MultivarPoly(params)) - f * fj);
          core_cols[j].insert(s);
        } else {
          it->second -= f * fj;
          if (it->second.numerator().is_zero()) {
            row.coef.erase(it);
            core_cols[j].erase(s);
          }
        }
      }
      row.rhs -= f * pr.rhs;
      row.coef.erase(best_v);
    }
    for (const auto& [j, fj] : pr.coef) core_cols[j].erase(best_r);
    core_done[best_r] = true;
    core_pivots.emplace_back(best_r, best_v);
  }

  std::vector<RF> value(n);
  for (auto it = core_pivots.rbegin(); it != core_pivots.rend(); ++it) {
    const CoreRow& row = core[it->first];
    RF acc = row.rhs;
    for (const auto& [j, fj] : row.coef)
      if (j != it->second) acc -= fj * value[j];
    value[it->second] = acc / row.coef.at(it->second);
  }
  for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
    const Row& row = rows[it->first];
    RF acc = RF::from_poly(row.rhs);
    for (const auto& [j, pj] : row.coef)
      if (j != it->second) acc -= RF::from_poly(pj) * value[j];
    value[it->second] = acc * RF::from_poly(MultivarPoly::constant(params, 1 / row.coef.at(it->second).constant_term()));
  }

  std::map<std::string, RationalFunction> out;
  for (std::size_t v = 0; v < n; ++v) out.emplace(system.variables[v], std::move(value[v]));
  return out;
}

SymbolicBranch solve_symbolic_branch(const ir::ConstraintSystem& system, const ir::ModeAssignment& mode,
                                     const SymbolicOptions& options) {
  ir::ConstraintSystem inst = ir::instantiate(system, mode);
  std::vector<ir::LinearConstraint> inequalities;
  std::erase_if(inst.conjuncts, [&](const ir::LinearConstraint& c) {
    if (c.relation == ir::Relation::EQ) return false;
    inequalities.push_back(c);
    return true;
  });
  SymbolicBranch out{mode, solve_symbolic(inst, options), {}};

  const std::vector<std::string>& params = system.parameters;
  auto lift = [&](const std::string& name) {
    if (auto it = out.solution.find(name); it != out.solution.end()) return it->second;
    return RationalFunction::from_poly(MultivarPoly::parameter(params, name));
  };
  auto constant = [&](const Scalar& v) { return RationalFunction::from_poly(MultivarPoly::constant(params, v)); };
  for (const auto& c : inequalities) {
    RationalFunction lhs = constant(-c.rhs);
    for (const auto& [name, v] : c.terms) lhs += lift(name) * constant(v);
    for (const auto& p : c.products) lhs += lift(p.first) * lift(p.second) * constant(p.coef);
    out.conditions.push_back(fmt::format("{}: {} {} 0", c.label, lhs.to_string(), ir::to_string(c.relation)));
  }
  return out;
}

std::vector<AlternateSolution> solve_symbolic_alternates(const netgen::FamilySpec& spec,
                                                         const SymbolicOptions& options) {
  netgen::FamilySpec sym = spec;
  sym.symbolic_resistors = true;
  netgen::Netlist net = netgen::build(sym);
  std::map<std::string, RationalFunction> base = solve_symbolic(ir::lower(net), options);

  std::vector<std::pair<std::string, std::vector<Scalar>>> choices;
  for (const auto& c : net.components) {
    if (c.kind != netgen::ComponentKind::Resistor || c.resistor.alternates.size() < 2) continue;
    if (std::any_of(choices.begin(), choices.end(), [&](const auto& ch) { return ch.first == c.parameter; })) continue;
    choices.emplace_back(c.parameter, c.resistor.alternates);
  }
  std::vector<AlternateSolution> out;
  std::vector<std::size_t> pick(choices.size(), 0);
  for (;;) {
    AlternateSolution a;
    for (std::size_t k = 0; k < choices.size(); ++k) {
      const Scalar& v = choices[k].second[pick[k]];
      a.fixed[choices[k].first] = v;
      a.tag += (a.tag.empty() ? "" : " ") + choices[k].first + "=" + format_scalar(v);
    }
    for (const auto& [name, rf] : base) a.solution.emplace(name, rf.substitute(a.fixed));
    out.push_back(std::move(a));
    std::size_t k = choices.size();
    while (k > 0 && ++pick[k - 1] == choices[k - 1].second.size()) pick[--k] = 0;
    if (k == 0) break;
  }
  return out;
}

}  // namespace circbench::symbolic

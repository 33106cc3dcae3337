#include "circbench/scalar.hpp"

#include <cmath>
#include <limits>

#include "circbench/errors.hpp"

namespace circbench {

namespace {

bool is_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

mpz_class pow10(unsigned long e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

}  // namespace

Scalar parse_scalar(std::string_view text) {
  auto fail = [&]() -> Scalar { throw Error("malformed number '" + std::string(text) + "'"); };
  if (text.empty()) return fail();

  std::string_view s = text;
  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  Scalar result;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!is_digits(num) || !is_digits(den)) return fail();
    mpz_class d(std::string(den), 10);
    if (d == 0) return fail();
    result = Scalar(mpz_class(std::string(num), 10), d);
    result.canonicalize();
  } else {
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      auto exp_text = s.substr(e + 1);
      s = s.substr(0, e);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      if (!is_digits(exp_text) || exp_text.size() > 6) return fail();
      exponent = std::stol(std::string(exp_text));
      if (exp_negative) exponent = -exponent;
    }
    std::string digits;
    long frac_len = 0;
    if (auto dot = s.find('.'); dot != std::string_view::npos) {
      auto int_part = s.substr(0, dot);
      auto frac_part = s.substr(dot + 1);
      if ((!int_part.empty() && !is_digits(int_part)) || (!frac_part.empty() && !is_digits(frac_part)) ||
          (int_part.empty() && frac_part.empty()))
        return fail();
      digits = std::string(int_part) + std::string(frac_part);
      frac_len = static_cast<long>(frac_part.size());
    } else {
      if (!is_digits(s)) return fail();
      digits = std::string(s);
    }
    mpz_class mantissa(digits, 10);
    long scale = exponent - frac_len;
    if (scale >= 0) {
      result = Scalar(mantissa * pow10(static_cast<unsigned long>(scale)));
    } else {
      result = Scalar(mantissa, pow10(static_cast<unsigned long>(-scale)));
      result.canonicalize();
    }
  }
  if (negative) result = -result;
  return result;
}

std::string format_scalar(const Scalar& value) {
  const mpz_class& den = value.get_den();
  if (den == 1) return value.get_num().get_str();

  // Terminating decimal iff the denominator has no prime factors besides 2, 5.
  mpz_class rest = den;
  unsigned long twos = mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), mpz_class(2).get_mpz_t());
  unsigned long fives = mpz_remove(rest.get_mpz_t(), rest.get_mpz_t(), mpz_class(5).get_mpz_t());
  if (rest != 1) return value.get_str();

  unsigned long digits = std::max(twos, fives);
  mpz_class scaled = value.get_num() * pow10(digits) / den;
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.get_str();
  if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
  s.insert(s.size() - digits, ".");
  return negative ? "-" + s : s;
}

double to_double(const Scalar& value) {
  if (value == 0) return 0.0;
  mpz_class num = abs(value.get_num());
  const mpz_class& den = value.get_den();
  // Pick k so that num * 2^k / den has 54..55 significant bits.
  long k = 55 - static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2)) +
           static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  mpz_class scaled_num = num;
  mpz_class scaled_den = den;
  if (k >= 0)
    scaled_num <<= static_cast<mp_bitcnt_t>(k);
  else
    scaled_den <<= static_cast<mp_bitcnt_t>(-k);
  mpz_class q, r;
  mpz_tdiv_qr(q.get_mpz_t(), r.get_mpz_t(), scaled_num.get_mpz_t(), scaled_den.get_mpz_t());

  // Reduce q to 53 bits with round-half-even, tracking the sticky remainder.
  long extra = static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 2)) - 53;
  bool sticky = r != 0;
  if (extra > 0) {
    mpz_class low = q & ((mpz_class(1) << static_cast<mp_bitcnt_t>(extra)) - 1);
    q >>= static_cast<mp_bitcnt_t>(extra);
    mpz_class half = mpz_class(1) << static_cast<mp_bitcnt_t>(extra - 1);
    bool round_up = low > half || (low == half && (sticky || mpz_odd_p(q.get_mpz_t())));
    if (round_up) q += 1;
    k -= extra;
  }
  double result = std::ldexp(q.get_d(), static_cast<int>(-k));
  return value < 0 ? -result : result;
}

Scalar from_double(double value) {
  if (!std::isfinite(value)) throw Error("cannot convert non-finite double to rational");
  Scalar r(value);  // mpq_set_d is exact
  return r;
}

std::string format_fixed(const Scalar& value, int digits) {
  mpz_class scale = pow10(static_cast<unsigned long>(digits));
  Scalar scaled = abs(value) * scale;
  // round half away from zero
  mpz_class q = (scaled.get_num() * 2 + scaled.get_den()) / (2 * scaled.get_den());
  bool negative = value < 0 && q != 0;
  std::string s = q.get_str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
  }
  return negative ? "-" + s : s;
}

}  // namespace circbench

#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace circbench {

/// Exact rational. mpq_class keeps the canonical form (reduced, positive
/// denominator) after every arithmetic operation.
using Scalar = mpq_class;

/// num/den in canonical form. mpq_class(num, den) alone does not reduce.
inline Scalar ratio(long num, long den) {
  Scalar q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "12", "-3/4", "0.125", "1.5e-3". Throws circbench::Error on
/// malformed input.
Scalar parse_scalar(std::string_view text);

/// Exact text form: integers as "12", terminating decimals as "0.125",
/// everything else as "num/den". parse_scalar(format_scalar(x)) == x.
std::string format_scalar(const Scalar& value);

/// Nearest double (round half to even), unlike mpq_get_d which truncates.
double to_double(const Scalar& value);

/// Exact value of a finite double.
Scalar from_double(double value);

/// Decimal rendering with a fixed number of digits after the point,
/// rounded half away from zero from the exact value. "-0.000" never appears.
std::string format_fixed(const Scalar& value, int digits);

}  // namespace circbench

#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace perslab {

/// Exact rational with arbitrary-precision numerator and denominator.
using Rational = mpq_class;
using BigInt = mpz_class;

/// Parses "num/den", "num" or a plain decimal such as "0.25".
Rational parse_rational(std::string_view text);

/// Canonical "num/den" form; integers are written as "num/1".
std::string to_fraction_string(const Rational& q);

inline double to_double(const Rational& q) { return q.get_d(); }

/// Binomial coefficient C(n, k) as a big integer.
BigInt binomial(unsigned long n, unsigned long k);

}  // namespace perslab

#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <optional>
#include <string>
#include <vector>

namespace ftaplab {

// All core semantics run on exact rationals; floating point appears only in
// the numeraire search, and every candidate produced there is re-certified
// exactly before use.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

using Vec = std::vector<Rational>;
using Mat = std::vector<Vec>;

inline Rational rat(long num, long den = 1) { return Rational(num, den); }

inline Rational rabs(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline Integer rat_num(const Rational& x) { return boost::multiprecision::numerator(x); }
inline Integer rat_den(const Rational& x) { return boost::multiprecision::denominator(x); }

// Canonical text form "p/q", q >= 1, gcd(p,q) = 1. The denominator is always
// written, so "3" renders as "3/1".
inline std::string rat_str(const Rational& x) {
    return rat_num(x).str() + "/" + rat_den(x).str();
}

// Parses the canonical form only; "2/6", "1/-2", "1/0" and bare integers are
// all rejected so that files round-trip byte for byte.
std::optional<Rational> rat_parse(const std::string& s);

inline double rat_dbl(const Rational& x) { return x.convert_to<double>(); }

// Closest rational to x with denominator <= max_den (Stern-Brocot walk).
Rational rat_approx(double x, long max_den);

}  // namespace ftaplab

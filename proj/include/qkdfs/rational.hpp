#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>

namespace qkdfs {

// Expression templates off: plain values compose with the generic formulas.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend,
                                               boost::multiprecision::et_off>;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(num, den);
}

// Exact value of a finite double.
inline Rational from_double(double v) {
  int exp = 0;
  const double mant = std::frexp(v, &exp);
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  Rational r(scaled);
  const int shift = exp - 53;
  const Rational two(2);
  if (shift > 0) {
    for (int i = 0; i < shift; ++i) r *= two;
  } else {
    r /= Rational(boost::multiprecision::cpp_int(1) << -shift);
  }
  return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double r) { return r; }

inline std::string to_string(const Rational& r) { return r.str(); }

template <class T>
T clamp_unit(const T& v) {
  return v > T(1) ? T(1) : v;
}

}  // namespace qkdfs

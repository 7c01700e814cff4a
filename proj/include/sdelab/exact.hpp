#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace sdelab {

/// Arbitrary-precision rational used for measure weights and flow values.
using Exact = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Exact value of a finite double.
Exact to_exact(double value);

/// Nearest double.
double to_double(const Exact& value);

/// Largest double that is <= value.
double round_down(const Exact& value);

/// Smallest double that is >= value.
inline double round_up(const Exact& value) { return -round_down(-value); }

/// Parses "p/q", an integer, or a decimal literal ("0.125", "1e-3") exactly.
Exact parse_exact(std::string_view text);

/// "p/q" (or "p" when the denominator is 1).
std::string format_exact(const Exact& value);

/// Least common multiple of the denominators of the given weights.
template <typename Range>
BigInt common_denominator(const Range& weights) {
  BigInt lcm = 1;
  for (const Exact& w : weights) {
    BigInt d = boost::multiprecision::denominator(w);
    lcm = lcm / boost::multiprecision::gcd(lcm, d) * d;
  }
  return lcm;
}

/// Converts an integral rational to int64, throwing on overflow or fractions.
std::int64_t to_int64(const Exact& integral_value);

}  // namespace sdelab

#include "sdelab/exact.hpp"

#include <cmath>
#include <limits>

#include "sdelab/error.hpp"

namespace sdelab {

Exact to_exact(double value) {
  if (!std::isfinite(value)) throw Error("cannot represent non-finite value exactly");
  return Exact(value);
}

double to_double(const Exact& value) { return value.convert_to<double>(); }

double round_down(const Exact& value) {
  double d = to_double(value);
  if (std::isinf(d)) return d;
  while (Exact(d) > value) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  while (true) {
    double up = std::nextafter(d, std::numeric_limits<double>::infinity());
    if (std::isinf(up) || Exact(up) > value) break;
    d = up;
  }
  return d;
}

namespace {

BigInt parse_integer(std::string_view digits, std::string_view whole) {
  if (digits.empty()) throw Error("malformed number '" + std::string(whole) + "'");
  BigInt v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw Error("malformed number '" + std::string(whole) + "'");
    v = v * 10 + (c - '0');
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Exact parse_exact(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Exact result;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt p = parse_integer(text.substr(0, slash), whole);
    BigInt q = parse_integer(text.substr(slash + 1), whole);
    if (q == 0) throw Error("zero denominator in '" + std::string(whole) + "'");
    result = Exact(p, q);
  } else {
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      std::string_view exp_text = text.substr(e + 1);
      bool exp_negative = false;
      if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
        exp_negative = exp_text.front() == '-';
        exp_text.remove_prefix(1);
      }
      exponent = static_cast<long>(parse_integer(exp_text, whole));
      if (exp_negative) exponent = -exponent;
      text = text.substr(0, e);
    }
    std::string digits;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
      digits = std::string(text.substr(0, dot)) + std::string(text.substr(dot + 1));
      exponent -= static_cast<long>(text.size() - dot - 1);
    } else {
      digits = std::string(text);
    }
    BigInt mantissa = parse_integer(digits, whole);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    result = exponent >= 0 ? Exact(mantissa * scale) : Exact(mantissa, scale);
  }
  return negative ? Exact(-result) : result;
}

std::string format_exact(const Exact& value) {
  const BigInt& q = boost::multiprecision::denominator(value);
  if (q == 1) return boost::multiprecision::numerator(value).str();
  return boost::multiprecision::numerator(value).str() + "/" + q.str();
}

std::int64_t to_int64(const Exact& integral_value) {
  if (boost::multiprecision::denominator(integral_value) != 1) throw Error("value is not integral");
  const BigInt& p = boost::multiprecision::numerator(integral_value);
  if (p > std::numeric_limits<std::int64_t>::max() || p < std::numeric_limits<std::int64_t>::min())
    throw Error("rational weights need a common denominator beyond 64 bits");
  return p.convert_to<std::int64_t>();
}

}  // namespace sdelab

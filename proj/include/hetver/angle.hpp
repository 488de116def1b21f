#pragma once

#include "hetver/linalg.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace hetver {

/// An angle in radians that remembers the rational multiple of pi it was
/// written as, so reports can echo "pi/3" instead of a rounded decimal.
class Angle {
 public:
  Angle() = default;

  static Angle radians(double value) {
    if (!std::isfinite(value)) throw std::invalid_argument("Angle: value is not finite");
    Angle a;
    a.value_ = value;
    a.symbolic_ = false;
    return a;
  }

  /// (numerator/denominator) * pi, reduced.
  static Angle pi_fraction(long numerator, long denominator) {
    if (denominator == 0) throw std::invalid_argument("Angle: zero denominator");
    if (denominator < 0) {
      numerator = -numerator;
      denominator = -denominator;
    }
    const long g = std::gcd(numerator < 0 ? -numerator : numerator, denominator);
    Angle a;
    a.num_ = numerator / (g == 0 ? 1 : g);
    a.den_ = denominator / (g == 0 ? 1 : g);
    if (a.num_ == 0) a.den_ = 1;
    a.value_ = kPi * static_cast<double>(a.num_) / static_cast<double>(a.den_);
    a.symbolic_ = true;
    return a;
  }

  [[nodiscard]] double value() const { return value_; }
  [[nodiscard]] bool symbolic() const { return symbolic_; }

  /// Canonical text: "0", "pi", "-pi/2", "2*pi/3", or a decimal with
  /// round-trip precision.
  [[nodiscard]] std::string text() const {
    if (!symbolic_) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", value_);
      return buf;
    }
    if (num_ == 0) return "0";
    std::string out = num_ < 0 ? "-" : "";
    const long mag = num_ < 0 ? -num_ : num_;
    if (mag != 1) out += std::to_string(mag) + "*";
    out += "pi";
    if (den_ != 1) out += "/" + std::to_string(den_);
    return out;
  }

  friend bool operator==(const Angle& a, const Angle& b) { return a.value_ == b.value_; }

 private:
  double value_ = 0.0;
  long num_ = 0;
  long den_ = 1;
  bool symbolic_ = true;
};

namespace detail {

inline std::optional<long> parse_long(const std::string& s) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Accepts "pi/3", "-pi/2", "2*pi/3", "2pi/3", "pi", "0", or a decimal in radians.
inline Angle parse_angle(const std::string& raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (s.empty()) throw std::invalid_argument("angle: empty value");

  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string::npos) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("angle: cannot parse '" + raw + "'");
    }
    if (used != s.size()) throw std::invalid_argument("angle: cannot parse '" + raw + "'");
    if (v == 0.0) return Angle::pi_fraction(0, 1);
    return Angle::radians(v);
  }

  std::string coeff = s.substr(0, pi_pos);
  std::string rest = s.substr(pi_pos + 2);
  if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
  long num = 1;
  if (coeff == "-") {
    num = -1;
  } else if (!coeff.empty() && coeff != "+") {
    auto v = detail::parse_long(coeff.front() == '+' ? coeff.substr(1) : coeff);
    if (!v) throw std::invalid_argument("angle: bad coefficient in '" + raw + "'");
    num = *v;
  }
  long den = 1;
  if (!rest.empty()) {
    if (rest.front() != '/') throw std::invalid_argument("angle: cannot parse '" + raw + "'");
    auto v = detail::parse_long(rest.substr(1));
    if (!v || *v == 0) throw std::invalid_argument("angle: bad denominator in '" + raw + "'");
    den = *v;
  }
  return Angle::pi_fraction(num, den);
}

}  // namespace hetver

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

#include "perfbandit/errors.hpp"

namespace perfbandit {

using Rational = boost::rational<std::int64_t>;

/// Parses "p/q", an integer, or a plain decimal such as "-0.125" into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto parse_int = [](std::string_view s) -> std::int64_t {
    if (s.empty()) throw ConfigError("empty integer in rational literal");
    std::size_t pos = 0;
    const std::string owned(s);
    long long v = 0;
    try {
      v = std::stoll(owned, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad rational literal '" + owned + "'");
    }
    if (pos != owned.size()) throw ConfigError("bad rational literal '" + owned + "'");
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto den = parse_int(trim(text.substr(slash + 1)));
    if (den == 0) throw ConfigError("zero denominator in '" + std::string(text) + "'");
    return Rational(parse_int(trim(text.substr(0, slash))), den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = text.substr(dot + 1);
    if (frac.size() > 17) throw ConfigError("too many decimals in '" + std::string(text) + "'");
    const bool negative = !whole.empty() && whole.front() == '-';
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::string_view digits = negative ? whole.substr(1) : whole;
    const std::int64_t w = digits.empty() || digits == "+" ? 0 : parse_int(digits);
    const std::int64_t f = frac.empty() ? 0 : parse_int(frac);
    Rational v = Rational(w) + Rational(f, den);
    return negative ? -v : v;
  }
  return Rational(parse_int(text));
}

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }
inline double to_double(double v) { return v; }

}  // namespace perfbandit

#include "perslab/rational.hpp"

#include "perslab/error.hpp"

#include <algorithm>
#include <cctype>

namespace perslab {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool is_integer_text(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<long>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) throw Error(ErrorCode::ConfigError, "empty rational");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = trim(s.substr(0, slash));
    std::string den = trim(s.substr(slash + 1));
    if (num[0] == '+') num.erase(0, 1);
    if (!is_integer_text(num) || !is_integer_text(den))
      throw Error(ErrorCode::ConfigError, "malformed rational '" + s + "'");
    BigInt d(den);
    if (d == 0) throw Error(ErrorCode::ConfigError, "zero denominator in '" + s + "'");
    Rational q(BigInt(num), d);
    q.canonicalize();
    return q;
  }
  if (is_integer_text(s)) {
    if (s[0] == '+') s.erase(0, 1);
    return Rational(BigInt(s));
  }
  // Decimal literal: 0.125 -> 125/1000, read digit by digit so that no
  // binary rounding sneaks in.
  std::size_t i = 0;
  bool neg = false;
  if (s[i] == '-' || s[i] == '+') neg = s[i++] == '-';
  std::string digits;
  long frac = -1;
  for (; i < s.size(); ++i) {
    if (s[i] == '.' && frac < 0) {
      frac = 0;
    } else if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i];
      if (frac >= 0) ++frac;
    } else {
      throw Error(ErrorCode::ConfigError, "malformed number '" + s + "'");
    }
  }
  if (digits.empty()) throw Error(ErrorCode::ConfigError, "malformed number '" + s + "'");
  BigInt den = 1;
  for (long k = 0; k < std::max(frac, 0L); ++k) den *= 10;
  Rational q(BigInt(digits), den);
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

std::string to_fraction_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

BigInt binomial(unsigned long n, unsigned long k) {
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

}  // namespace perslab

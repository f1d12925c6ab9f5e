#include "freeprob/core.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace freeprob {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Decimal literal (optionally with exponent) to an exact rational.
Rational parse_decimal(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw Error("empty number");
  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  std::string digits;
  long frac_len = 0;
  bool seen_point = false;
  bool any_digit = false;
  size_t i = 0;
  for (; i < s.size(); ++i) {
    char ch = s[i];
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      digits.push_back(ch);
      any_digit = true;
      if (seen_point) ++frac_len;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw Error("malformed number '" + std::string(text) + "'");
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw Error("malformed number '" + std::string(text) + "'");
    ++i;
    std::string exp_text(s.substr(i));
    if (exp_text.empty()) throw Error("malformed exponent in '" + std::string(text) + "'");
    size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      throw Error("malformed exponent in '" + std::string(text) + "'");
    }
    if (used != exp_text.size()) throw Error("malformed exponent in '" + std::string(text) + "'");
    if (exponent > 4000 || exponent < -4000) throw Error("exponent out of range in '" + std::string(text) + "'");
  }
  mpz_class num(digits, 10);
  long shift = exponent - frac_len;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational q = shift >= 0 ? Rational(num * scale) : Rational(num, scale);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = trim(text);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  Rational num = parse_decimal(s.substr(0, slash));
  Rational den = parse_decimal(s.substr(slash + 1));
  if (den == 0) throw Error("zero denominator in '" + std::string(text) + "'");
  Rational q = num / den;
  q.canonicalize();
  return q;
}

Complex parse_complex(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw Error("empty complex number");
  if (s.back() != 'i' && s.back() != 'j') return {to_double(parse_decimal(s)), 0.0};
  s.remove_suffix(1);
  // Locate the sign separating real and imaginary parts; an exponent sign does not count.
  size_t split = std::string_view::npos;
  for (size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  std::string_view re_part = split == std::string_view::npos ? std::string_view() : s.substr(0, split);
  std::string_view im_part = split == std::string_view::npos ? s : s.substr(split);
  double im = 0.0;
  if (im_part.empty() || im_part == "+") {
    im = 1.0;
  } else if (im_part == "-") {
    im = -1.0;
  } else {
    im = to_double(parse_decimal(im_part));
  }
  double re = re_part.empty() ? 0.0 : to_double(parse_decimal(re_part));
  return {re, im};
}

std::string to_string(const Rational& q) { return q.get_str(); }

double to_double(const Rational& q) {
  // get_d truncates toward zero; step one ulp outward when that neighbour is closer.
  double d = q.get_d();
  if (q == 0 || !std::isfinite(d)) return d;
  double away = std::nextafter(d, q > 0 ? HUGE_VAL : -HUGE_VAL);
  if (!std::isfinite(away)) return d;
  Rational e1 = q - Rational(d), e2 = Rational(away) - q;
  return abs(e2) < abs(e1) ? away : d;
}

std::string format_double(double x) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_complex(Complex z) {
  std::string re = format_double(z.real());
  double im = z.imag();
  std::string sign = std::signbit(im) ? "-" : "+";
  return re + sign + format_double(std::fabs(im)) + "i";
}

}  // namespace freeprob

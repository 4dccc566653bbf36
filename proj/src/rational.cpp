// SPDX-License-Identifier: Apache-2.0
#include "slackdown/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace slackdown {

namespace {

__int128 pow10_128(int n) {
  __int128 p = 1;
  for (int i = 0; i < n; ++i) p *= 10;
  return p;
}

} // namespace

std::string Rat::to_decimal(int max_frac) const {
  i128 n = num_;
  std::string out;
  if (n < 0) {
    out.push_back('-');
    n = -n;
  }
  const i128 d = den_;
  i128 ip = n / d;
  i128 rem = n % d;

  // Scale the remainder; round half away from zero on the last digit.
  const i128 scale = pow10_128(max_frac);
  i128 frac = (rem * scale * 2 + d) / (2 * d);
  if (frac >= scale) {
    frac -= scale;
    ip += 1;
  }

  std::string ipart;
  if (ip == 0) {
    ipart = "0";
  } else {
    while (ip > 0) {
      ipart.push_back(static_cast<char>('0' + static_cast<int>(ip % 10)));
      ip /= 10;
    }
    for (std::size_t i = 0, j = ipart.size(); i + 1 < j; ++i, --j)
      std::swap(ipart[i], ipart[j - 1]);
  }
  out += ipart;

  if (frac != 0) {
    std::string fpart(static_cast<std::size_t>(max_frac), '0');
    for (int i = max_frac - 1; i >= 0; --i) {
      fpart[static_cast<std::size_t>(i)] =
          static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    while (!fpart.empty() && fpart.back() == '0') fpart.pop_back();
    if (!fpart.empty()) {
      out.push_back('.');
      out += fpart;
    }
  }
  return out;
}

std::string Rat::to_fixed(int digits) const {
  i128 n = num_;
  std::string out;
  if (n < 0) {
    out.push_back('-');
    n = -n;
  }
  const i128 d = den_;
  const i128 scale = pow10_128(digits);
  i128 scaled = (n * scale * 2 + d) / (2 * d); // round half away from zero
  i128 ip = scaled / scale;
  i128 frac = scaled % scale;

  std::string ipart;
  if (ip == 0) {
    ipart = "0";
  } else {
    while (ip > 0) {
      ipart.push_back(static_cast<char>('0' + static_cast<int>(ip % 10)));
      ip /= 10;
    }
    for (std::size_t i = 0, j = ipart.size(); i + 1 < j; ++i, --j)
      std::swap(ipart[i], ipart[j - 1]);
  }
  out += ipart;
  if (digits > 0) {
    std::string fpart(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
      fpart[static_cast<std::size_t>(i)] =
          static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    out.push_back('.');
    out += fpart;
  }
  return out;
}

std::optional<Rat> Rat::parse(std::string_view s) {
  if (s.empty()) return std::nullopt;
  bool neg = false;
  std::size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = (s[0] == '-');
    i = 1;
  }
  if (i >= s.size()) return std::nullopt;

  i128 num = 0;
  bool any = false;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    num = num * 10 + (s[i] - '0');
    if (num > INT64_MAX) return std::nullopt;
    ++i;
    any = true;
  }
  if (i < s.size() && s[i] == '/') {
    if (!any) return std::nullopt;
    ++i;
    i128 den = 0;
    bool dany = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      den = den * 10 + (s[i] - '0');
      if (den > INT64_MAX) return std::nullopt;
      ++i;
      dany = true;
    }
    if (!dany || i != s.size() || den == 0) return std::nullopt;
    Rat r(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
    return neg ? -r : r;
  }
  i128 den = 1;
  if (i < s.size() && s[i] == '.') {
    ++i;
    bool fany = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      num = num * 10 + (s[i] - '0');
      den *= 10;
      if (num > INT64_MAX || den > INT64_MAX) return std::nullopt;
      ++i;
      fany = true;
    }
    if (!any && !fany) return std::nullopt;
    any = true;
  }
  if (!any || i != s.size()) return std::nullopt;
  Rat r(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
  return neg ? -r : r;
}

} // namespace slackdown

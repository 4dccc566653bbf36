// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace slackdown {

/// Exact rational arithmetic on int64 numerator/denominator.
///
/// All simulated time, frequency and energy values are carried as Rat so that
/// event ordering, work accounting and CSV output are bit-reproducible.
/// Values are kept normalized (gcd(num,den) == 1, den > 0); intermediates use
/// __int128 and narrowing overflow throws instead of wrapping.
class Rat {
public:
  constexpr Rat() = default;
  constexpr Rat(std::int64_t n) : num_(n) {} // NOLINT: implicit from integer
  Rat(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }

  friend Rat operator+(const Rat& a, const Rat& b) {
    const std::int64_t g = gcd64(a.den_, b.den_);
    const i128 bd = b.den_ / g;
    const i128 n = static_cast<i128>(a.num_) * bd +
                   static_cast<i128>(b.num_) * (a.den_ / g);
    const i128 d = static_cast<i128>(a.den_) * bd;
    return make(n, d);
  }
  friend Rat operator-(const Rat& a, const Rat& b) { return a + (-b); }
  Rat operator-() const {
    Rat r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  friend Rat operator*(const Rat& a, const Rat& b) {
    const std::int64_t g1 = gcd64(a.num_, b.den_);
    const std::int64_t g2 = gcd64(b.num_, a.den_);
    const i128 n = static_cast<i128>(a.num_ / g1) * (b.num_ / g2);
    const i128 d = static_cast<i128>(a.den_ / g2) * (b.den_ / g1);
    return make(n, d);
  }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (b.num_ == 0) throw std::domain_error("rational division by zero");
    Rat inv;
    inv.assign_raw(b.den_, b.num_);
    return a * inv;
  }
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  friend bool operator==(const Rat& a, const Rat& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
  friend bool operator<(const Rat& a, const Rat& b) {
    return static_cast<i128>(a.num_) * b.den_ < static_cast<i128>(b.num_) * a.den_;
  }
  friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
  friend bool operator<=(const Rat& a, const Rat& b) { return !(b < a); }
  friend bool operator>=(const Rat& a, const Rat& b) { return !(a < b); }

  /// Largest integer <= value.
  std::int64_t floor() const {
    if (num_ >= 0) return num_ / den_;
    return -(((-static_cast<i128>(num_)) + den_ - 1) / den_);
  }
  /// Smallest integer >= value.
  std::int64_t ceil() const { return -(-*this).floor(); }
  /// Nearest integer, ties away from zero.
  std::int64_t round_nearest() const {
    const i128 two_n = 2 * static_cast<i128>(num_);
    const i128 d = den_;
    i128 q = (num_ >= 0) ? (two_n + d) / (2 * d) : -((-two_n + d) / (2 * d));
    return narrow(q);
  }

  /// Smallest integer-nanosecond multiple >= this value (in microseconds).
  /// Work-completion instants are snapped to this grid so that chains of
  /// speed changes cannot compound denominators without bound.
  Rat ceil_nanos() const {
    const i128 scaled = static_cast<i128>(num_) * 1000;
    const i128 q = scaled >= 0 ? (scaled + den_ - 1) / den_ : -((-scaled) / den_);
    return Rat(narrow(q), 1000);
  }

  /// round(a * b) to the nearest integer without materializing a normalized
  /// product, for products whose exact form would overflow int64.
  static std::int64_t mul_round_nearest(const Rat& a, const Rat& b) {
    const std::int64_t g1 = gcd64(a.num_, b.den_);
    const std::int64_t g2 = gcd64(b.num_, a.den_);
    const i128 n = static_cast<i128>(a.num_ / g1) * (b.num_ / g2);
    const i128 d = static_cast<i128>(a.den_ / g2) * (b.den_ / g1);
    const i128 two_n = 2 * n;
    const i128 q = (n >= 0) ? (two_n + d) / (2 * d) : -((-two_n + d) / (2 * d));
    return narrow(q);
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Decimal rendering with '.' separator: exact when the expansion
  /// terminates within max_frac digits, otherwise rounded (half away from
  /// zero) to max_frac digits. Trailing zeros are trimmed.
  std::string to_decimal(int max_frac = 12) const;

  /// Fixed-point rendering with exactly `digits` fractional digits.
  std::string to_fixed(int digits) const;

  /// Parses "123", "-4.5", "7/2". Returns nullopt on malformed input.
  static std::optional<Rat> parse(std::string_view s);

private:
  using i128 = __int128;

  static std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const std::int64_t t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static i128 gcd128(i128 a, i128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const i128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static std::int64_t narrow(i128 v) {
    if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
    return static_cast<std::int64_t>(v);
  }
  static Rat make(i128 n, i128 d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    const i128 g = gcd128(n, d);
    Rat r;
    r.num_ = narrow(n / g);
    r.den_ = narrow(d / g);
    return r;
  }
  void assign(std::int64_t n, std::int64_t d) { *this = make(n, d); }
  void assign_raw(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

} // namespace slackdown

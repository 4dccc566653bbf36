// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "slackdown/rational.hpp"

using slackdown::Rat;

TEST_CASE("basic arithmetic stays normalized") {
  CHECK(Rat(1, 2) + Rat(1, 3) == Rat(5, 6));
  CHECK(Rat(1, 2) - Rat(1, 2) == Rat(0));
  CHECK(Rat(2, 4) == Rat(1, 2));
  CHECK(Rat(-2, 4) == Rat(1, -2));
  CHECK(Rat(3, 7) * Rat(7, 3) == Rat(1));
  CHECK(Rat(5) / Rat(2) == Rat(5, 2));
  CHECK(Rat(1, 3) * Rat(3) == Rat(1));
}

TEST_CASE("comparisons") {
  CHECK(Rat(1, 3) < Rat(1, 2));
  CHECK(Rat(-1, 2) < Rat(1, 3));
  CHECK(Rat(2, 6) <= Rat(1, 3));
  CHECK(Rat(7, 2) > Rat(3));
}

TEST_CASE("floor ceil round") {
  CHECK(Rat(7, 2).floor() == 3);
  CHECK(Rat(7, 2).ceil() == 4);
  CHECK(Rat(-7, 2).floor() == -4);
  CHECK(Rat(-7, 2).ceil() == -3);
  CHECK(Rat(7, 2).round_nearest() == 4);  // ties away from zero
  CHECK(Rat(-7, 2).round_nearest() == -4);
  CHECK(Rat(10, 3).round_nearest() == 3);
  CHECK(Rat(5).floor() == 5);
}

TEST_CASE("decimal rendering") {
  CHECK(Rat(1, 2).to_decimal() == "0.5");
  CHECK(Rat(0).to_decimal() == "0");
  CHECK(Rat(-3, 8).to_decimal() == "-0.375");
  CHECK(Rat(3000).to_decimal() == "3000");
  CHECK(Rat(1, 20).to_decimal() == "0.05");
  CHECK(Rat(12, 5).to_decimal() == "2.4");
  // Non-terminating expansions round at the digit limit.
  CHECK(Rat(1, 3).to_decimal(4) == "0.3333");
  CHECK(Rat(2, 3).to_decimal(4) == "0.6667");
  CHECK(Rat(1, 2).to_fixed(2) == "0.50");
  CHECK(Rat(2381, 100).to_fixed(2) == "23.81");
  CHECK(Rat(0).to_fixed(2) == "0.00");
  CHECK(Rat(-1, 8).to_fixed(2) == "-0.13");
}

TEST_CASE("parse") {
  CHECK(Rat::parse("2.4") == Rat(12, 5));
  CHECK(Rat::parse("-0.125") == Rat(-1, 8));
  CHECK(Rat::parse("500") == Rat(500));
  CHECK(Rat::parse("7/2") == Rat(7, 2));
  CHECK(Rat::parse("-7/2") == Rat(-7, 2));
  CHECK(!Rat::parse("").has_value());
  CHECK(!Rat::parse("abc").has_value());
  CHECK(!Rat::parse("1.2.3").has_value());
  CHECK(!Rat::parse("1/0").has_value());
  CHECK(!Rat::parse(".").has_value());
}

TEST_CASE("parse round-trips terminating decimals") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 2000; ++i) {
    const std::int64_t num = static_cast<std::int64_t>(rng() % 2000000) - 1000000;
    const std::int64_t den = 1 + static_cast<std::int64_t>(rng() % 1000);
    const Rat r(num, den);
    const Rat t(num, static_cast<std::int64_t>(1) << (i % 10));
    CHECK(Rat::parse(t.to_decimal()) == t);
    CHECK(r.to_double() == doctest::Approx(static_cast<double>(num) / static_cast<double>(den)));
  }
}

TEST_CASE("division by zero throws") {
  CHECK_THROWS(Rat(1) / Rat(0));
  CHECK_THROWS(Rat(1, 0));
}

TEST_CASE("overflow throws instead of wrapping") {
  const Rat big(INT64_MAX / 2, 1);
  CHECK_THROWS_AS(big * big, std::overflow_error);
}

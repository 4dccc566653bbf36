// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <vector>

#include "slackdown/errors.hpp"
#include "slackdown/hw.hpp"

using namespace slackdown;

namespace {

HwConfig default_hw() { return HwConfig{}; }

// Drives a CoreSet through a write sequence, applying the controller at every
// grid instant up to the horizon, and returns the effective frequency right
// after each instant.
struct TimedWrite {
  std::int64_t t;
  bool is_freq;
  FreqRequest freq;
  Rat duty;
};

std::vector<Rat> run_coreset(const HwConfig& hw, const std::vector<TimedWrite>& writes,
                             std::int64_t horizon_us) {
  CoreSet cores(2, hw);
  cores.preapply(0, FreqRequest::fixed(hw.freq_levels_ghz.back()), Rat(1));
  std::vector<Rat> out;
  std::size_t wi = 0;
  const std::int64_t period = hw.sample_period_us.num();
  for (std::int64_t t = 0; t <= horizon_us; ++t) {
    if (t % period == 0 && t > 0) {
      cores.apply_pending(Rat(t));
      out.push_back(cores.effective_freq_ghz(0));
    }
    while (wi < writes.size() && writes[wi].t == t) {
      if (writes[wi].is_freq) {
        cores.write_freq_request(0, writes[wi].freq, Rat(t));
      } else {
        cores.write_duty_request(0, writes[wi].duty, Rat(t));
      }
      ++wi;
    }
  }
  return out;
}

// Independent 1us-step register replayer: effective value at a sampling
// instant is the most recent write strictly before it.
std::vector<Rat> replay(const HwConfig& hw, const std::vector<TimedWrite>& writes,
                        std::int64_t horizon_us, int active_cores) {
  Rat eff = hw.freq_levels_ghz.back();
  std::vector<Rat> out;
  const std::int64_t period = hw.sample_period_us.num();
  for (std::int64_t s = period; s <= horizon_us; s += period) {
    const TimedWrite* last = nullptr;
    for (const auto& w : writes)
      if (w.is_freq && w.t < s && (last == nullptr || w.t >= last->t)) last = &w;
    if (last != nullptr)
      eff = last->freq.turbo ? hw.turbo_for(active_cores) : last->freq.level_ghz;
    out.push_back(eff);
  }
  return out;
}

} // namespace

TEST_CASE("write before grid has no effect until the instant") {
  CoreSet cores(1, default_hw());
  cores.preapply(0, FreqRequest::fixed(Rat(12, 5)), Rat(1));
  cores.write_freq_request(0, FreqRequest::fixed(Rat(6, 5)), Rat(100));
  // t=300: nothing has been sampled yet.
  CHECK(cores.effective_freq_ghz(0) == Rat(12, 5));
  cores.apply_pending(Rat(500));
  CHECK(cores.effective_freq_ghz(0) == Rat(6, 5));
}

TEST_CASE("overwrite within one period: first request is never effective") {
  CoreSet cores(1, default_hw());
  cores.preapply(0, FreqRequest::fixed(Rat(12, 5)), Rat(1));
  cores.write_freq_request(0, FreqRequest::fixed(Rat(6, 5)), Rat(100));
  cores.write_freq_request(0, FreqRequest::fixed(Rat(12, 5)), Rat(400));
  cores.apply_pending(Rat(500));
  CHECK(cores.effective_freq_ghz(0) == Rat(12, 5));
}

TEST_CASE("write exactly at a grid instant applies at the next one") {
  CoreSet cores(1, default_hw());
  cores.preapply(0, FreqRequest::fixed(Rat(12, 5)), Rat(1));
  cores.write_freq_request(0, FreqRequest::fixed(Rat(6, 5)), Rat(500));
  cores.apply_pending(Rat(500));
  CHECK(cores.effective_freq_ghz(0) == Rat(12, 5)); // strict inequality rule
  cores.apply_pending(Rat(1000));
  CHECK(cores.effective_freq_ghz(0) == Rat(6, 5));
}

TEST_CASE("duty requests share the latching semantics") {
  CoreSet cores(1, default_hw());
  cores.preapply(0, FreqRequest::fixed(Rat(12, 5)), Rat(1));
  cores.write_duty_request(0, Rat(1, 8), Rat(100));
  CHECK(cores.effective_duty(0) == Rat(1));
  cores.apply_pending(Rat(500));
  CHECK(cores.effective_duty(0) == Rat(1, 8));

  // last-writer-wins within one period
  cores.write_duty_request(0, Rat(1, 8), Rat(600));
  cores.write_duty_request(0, Rat(1), Rat(700));
  cores.apply_pending(Rat(1000));
  CHECK(cores.effective_duty(0) == Rat(1));
}

TEST_CASE("level checks") {
  HwConfig hw;
  hw.duty_levels = {Rat(1, 8), Rat(1)};
  CoreSet cores(1, hw);
  CHECK_THROWS_WITH_AS(cores.write_duty_request(0, Rat(1, 2), Rat(0)),
                       doctest::Contains("valid levels"), ConfigError);
  CHECK_THROWS_WITH_AS(cores.write_freq_request(0, FreqRequest::fixed(Rat(5)), Rat(0)),
                       doctest::Contains("valid levels"), ConfigError);
}

TEST_CASE("effective speed") {
  CoreSet cores(1, default_hw());
  cores.preapply(0, FreqRequest::fixed(Rat(12, 5)), Rat(1));
  CHECK(cores.effective_speed(0) == Rat(2400)); // 2.4 GHz, full duty
  cores.preapply(0, FreqRequest::fixed(Rat(12, 5)), Rat(1, 8));
  CHECK(cores.effective_speed(0) == Rat(300)); // gated to 1/8
  cores.begin_sleep(0, Rat(0));
  CHECK(cores.effective_speed(0) == Rat(0));
  cores.finish_sleep_entry(0);
  CHECK(cores.effective_speed(0) == Rat(0));
}

TEST_CASE("turbo arbitration table") {
  const HwConfig hw = default_hw();
  CHECK(hw.turbo_for(1) == Rat(16, 5)); // 3.2
  CHECK(hw.turbo_for(2) == Rat(13, 5)); // 2.6
  CHECK(hw.turbo_for(8) == Rat(13, 5)); // largest key <= count
  CHECK(hw.turbo_for(0) == Rat(16, 5)); // below smallest key: first entry
  // Non-increasing in the active-core count.
  for (int n = 1; n < 16; ++n) CHECK(hw.turbo_for(n + 1) <= hw.turbo_for(n));
}

TEST_CASE("sleep and wake transitions re-arbitrate turbo") {
  CoreSet cores(2, default_hw());
  cores.preapply(0, FreqRequest::turbo_request(), Rat(1));
  cores.preapply(1, FreqRequest::turbo_request(), Rat(1));
  CHECK(cores.effective_freq_ghz(0) == Rat(13, 5)); // 2 active -> 2.6

  cores.begin_sleep(1, Rat(0));
  CHECK(cores.active_cores() == 2); // entry window still counts
  const auto changes = cores.finish_sleep_entry(1);
  CHECK(cores.active_cores() == 1);
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].core == 0);
  CHECK(cores.effective_freq_ghz(0) == Rat(16, 5)); // lone core boosts to 3.2

  cores.wake(1, Rat(100));
  CHECK(cores.active_cores() == 2);
  CHECK(cores.effective_freq_ghz(0) == Rat(13, 5)); // back to 2.6 at the transition
  cores.finish_wake(1);
  CHECK(cores.sleep_state(1) == SleepState::Active);
}

TEST_CASE("sleep state machine errors") {
  CoreSet cores(1, default_hw());
  cores.begin_sleep(0, Rat(0));
  CHECK_THROWS_AS(cores.begin_sleep(0, Rat(1)), SimError); // double sleep
  cores.finish_sleep_entry(0);
  cores.wake(0, Rat(5));
  CHECK_THROWS_AS(cores.wake(0, Rat(6)), SimError); // double wake
  cores.finish_wake(0);
  CHECK_THROWS_AS(cores.finish_wake(0), SimError);
}

TEST_CASE("config invariants") {
  HwConfig hw;
  hw.turbo_table_ghz = {{1, Rat(1)}}; // below max P-state level
  CHECK_THROWS_AS(hw.check(), ConfigError);
  hw = HwConfig{};
  hw.duty_levels = {Rat(1, 8)}; // missing 1.0
  CHECK_THROWS_AS(hw.check(), ConfigError);
  hw = HwConfig{};
  hw.sample_period_us = 0;
  CHECK_THROWS_AS(hw.check(), ConfigError);
}

TEST_CASE("latching matches the 1us-step replayer on random sequences") {
  std::mt19937_64 rng(2024);
  const HwConfig hw = default_hw();
  const std::vector<FreqRequest> choices = {
      FreqRequest::fixed(Rat(6, 5)), FreqRequest::fixed(Rat(12, 5)),
      FreqRequest::turbo_request()};
  for (int iter = 0; iter < 100; ++iter) {
    std::vector<TimedWrite> writes;
    const int n = 1 + static_cast<int>(rng() % 20);
    std::vector<std::int64_t> times;
    for (int i = 0; i < n; ++i) {
      // Bias toward grid-aligned instants to stress the strict rule.
      std::int64_t t = static_cast<std::int64_t>(rng() % 10000);
      if (rng() % 4 == 0) t = (t / 500) * 500;
      times.push_back(t);
    }
    std::sort(times.begin(), times.end());
    for (const auto t : times)
      writes.push_back({t, true, choices[rng() % choices.size()], Rat(1)});
    const auto got = run_coreset(hw, writes, 10000);
    const auto want = replay(hw, writes, 10000, 2);
    CHECK(got == want);
  }
}

TEST_CASE("grid_after") {
  const HwConfig hw = default_hw();
  CHECK(hw.grid_after(Rat(0)) == Rat(500));
  CHECK(hw.grid_after(Rat(499)) == Rat(500));
  CHECK(hw.grid_after(Rat(500)) == Rat(1000)); // strictly after
  CHECK(hw.grid_after(Rat(1, 2)) == Rat(500));
  CHECK(hw.grid_after(Rat(1501)) == Rat(2000));
}

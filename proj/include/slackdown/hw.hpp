// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slackdown/rational.hpp"

namespace slackdown {

/// A P-state request: either a fixed level or the symbolic turbo request,
/// which the controller resolves against the active-core count.
struct FreqRequest {
  bool turbo = false;
  Rat level_ghz; // meaningful when !turbo

  static FreqRequest turbo_request() { return {true, Rat(0)}; }
  static FreqRequest fixed(Rat ghz) { return {false, ghz}; }

  friend bool operator==(const FreqRequest&, const FreqRequest&) = default;
};

struct HwConfig {
  Rat sample_period_us = 500;
  // Requestable P-state levels; turbo frequencies live in the turbo table.
  std::vector<Rat> freq_levels_ghz = {Rat(6, 5), Rat(12, 5)}; // 1.2, 2.4
  // active-core-count -> granted turbo frequency; lookups use the largest
  // key <= count, and counts below the smallest key use the smallest key.
  std::map<int, Rat> turbo_table_ghz = {{1, Rat(16, 5)}, {2, Rat(13, 5)}}; // 3.2, 2.6
  std::vector<Rat> duty_levels = {Rat(1, 8), Rat(2, 8), Rat(3, 8), Rat(4, 8),
                                  Rat(5, 8), Rat(6, 8), Rat(7, 8), Rat(1)};
  Rat cstate_entry_us = 10;
  Rat cstate_wake_us = 10;

  /// Throws ConfigError if any structural invariant is broken.
  void check() const;

  /// Granted turbo frequency for the given active-core count.
  Rat turbo_for(int active_cores) const;

  /// Smallest sampling instant strictly greater than t. Requests written at
  /// a grid instant are picked up only at the next one.
  Rat grid_after(const Rat& t) const;

  bool is_freq_level(const Rat& ghz) const;
  bool is_duty_level(const Rat& duty) const;

  friend bool operator==(const HwConfig&, const HwConfig&) = default;
};

enum class SleepState { Active, EnteringSleep, Sleeping, Waking };

const char* to_string(SleepState s);

/// Effective speed change produced by a controller action; old_speed is the
/// cycles/us rate that was in force up to the instant of the change.
struct SpeedChange {
  int core = 0;
  Rat old_speed;
  Rat new_speed;
};

/// The power-state machine for all cores of the simulated node.
///
/// Frequency and duty requests are latched: a write at time t has no effect
/// before the next sampling instant strictly after t, and an overwrite before
/// that instant discards the previous request entirely. Applied turbo
/// requests are re-resolved against the active-core count at every sleep/wake
/// transition. Single-writer; owned by exactly one simulation run.
class CoreSet {
public:
  CoreSet(int n_cores, const HwConfig& cfg);

  int size() const { return static_cast<int>(cores_.size()); }
  const HwConfig& config() const { return cfg_; }

  /// Latches a request; throws ConfigError for a level outside the table.
  void write_freq_request(int core, const FreqRequest& req, const Rat& t);
  void write_duty_request(int core, const Rat& duty, const Rat& t);

  /// Sets initial register state directly, bypassing latching. Only valid
  /// before any simulated time has elapsed.
  void preapply(int core, const FreqRequest& freq, const Rat& duty);

  /// Controller sampling at grid instant s: applies every request written
  /// strictly before s on every core. Returns the effective speed changes.
  std::vector<SpeedChange> apply_pending(const Rat& s);

  /// Sleep transitions. begin_sleep: Active -> EnteringSleep (entry window
  /// consumes active power and executes nothing). finish_sleep_entry:
  /// EnteringSleep -> Sleeping (drops the active count and re-arbitrates).
  /// wake: Sleeping|EnteringSleep -> Waking (restores the active count).
  /// finish_wake: Waking -> Active.
  void begin_sleep(int core, const Rat& t);
  std::vector<SpeedChange> finish_sleep_entry(int core);
  std::vector<SpeedChange> wake(int core, const Rat& t);
  void finish_wake(int core);

  Rat effective_freq_ghz(int core) const { return at(core).eff_freq; }
  Rat effective_duty(int core) const { return at(core).eff_duty; }
  SleepState sleep_state(int core) const { return at(core).sleep; }

  /// Executable rate in cycles/us: freq_ghz * 1000 * duty while Active, else
  /// zero. Piecewise constant and right-continuous at change instants.
  Rat effective_speed(int core) const;

  /// Cores not in the Sleeping state (entry and wake windows count as
  /// active; they draw active power).
  int active_cores() const { return active_; }

  bool has_pending(int core) const {
    return at(core).pending_freq.has_value() || at(core).pending_duty.has_value();
  }

private:
  struct Core {
    std::optional<std::pair<FreqRequest, Rat>> pending_freq; // value + write time
    std::optional<std::pair<Rat, Rat>> pending_duty;
    FreqRequest applied_freq;
    Rat eff_freq;
    Rat eff_duty = 1;
    SleepState sleep = SleepState::Active;
  };

  Core& at(int core);
  const Core& at(int core) const;
  Rat resolve(const FreqRequest& req) const;
  Rat speed_of(const Core& c) const;
  // Recomputes effective frequencies of cores with an applied turbo request.
  void rearbitrate(std::vector<SpeedChange>& out);

  HwConfig cfg_;
  std::vector<Core> cores_;
  int active_ = 0;
};

} // namespace slackdown

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>

#include "slackdown/hw.hpp"
#include "slackdown/rational.hpp"

namespace slackdown {

enum class PolicyKind {
  BusyWait,
  WaitMode,
  SpinWait,
  NaiveDvfs,
  NaiveThrottle,
  CountdownDvfs,
  CountdownThrottle,
};

const char* to_string(PolicyKind k);
PolicyKind policy_kind_from_name(const std::string& name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::BusyWait;
  Rat timeout_us = 500;            // countdown_*
  std::uint64_t spin_count = 10000; // spin_wait
  Rat spin_iteration_us = Rat(1, 20); // wall-clock per spin iteration (0.05us)
  Rat low_freq_ghz = Rat(6, 5);    // *_dvfs
  Rat low_duty = Rat(1, 8);        // *_throttle
  FreqRequest high_freq = FreqRequest::turbo_request();
  // Simulated cost charged per prologue/epilogue/timer callback. Zero keeps
  // callbacks free; nonzero enables sensitivity studies.
  Rat event_cost_us = 0;

  std::string name() const { return to_string(kind); }

  /// Validates parameter completeness and that every level the policy can
  /// request exists in the hardware config. Throws ConfigError.
  void check(const HwConfig& hw) const;

  friend bool operator==(const PolicySpec&, const PolicySpec&) = default;
};

/// Capabilities handed to a policy at each event. Writes are latched by the
/// hardware model; arming while armed replaces the previous timer.
class PolicyContext {
public:
  virtual ~PolicyContext() = default;
  virtual void write_freq_request(const FreqRequest& req) = 0;
  virtual void write_duty_request(const Rat& duty) = 0;
  /// Asks the engine to put the core to sleep once the phase's wait portion
  /// has lasted delay_us (0 = sleep as soon as the wait begins).
  virtual void request_sleep_at_wait(const Rat& delay_us) = 0;
  virtual void arm_timer(const Rat& delay_us) = 0;
  virtual void disarm_timer() = 0;
  virtual Rat now_us() const = 0;
  virtual int rank() const = 0;
};

/// Per-rank policy state machine. The engine invokes on_mpi_enter exactly
/// when a rank begins an Mpi phase, on_timer when an armed timer expires
/// strictly before the phase ends, and on_mpi_exit when the phase completes
/// (after wake latency, if the core slept).
class Policy {
public:
  virtual ~Policy() = default;
  virtual void on_mpi_enter(PolicyContext& ctx) = 0;
  virtual void on_timer(PolicyContext& ctx) = 0;
  virtual void on_mpi_exit(PolicyContext& ctx) = 0;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec);

/// Request pre-applied to every core at t=0 (the state the runtime leaves
/// cores in before the first phase).
FreqRequest initial_freq_request(const PolicySpec& spec);

/// Builds a spec from a policy name and a key/value parameter map; unknown
/// keys or malformed values throw ConfigError.
PolicySpec policy_spec_from_params(const std::string& name,
                                   const std::map<std::string, std::string>& params);

} // namespace slackdown

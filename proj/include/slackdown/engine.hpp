// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slackdown/hw.hpp"
#include "slackdown/policy.hpp"
#include "slackdown/rational.hpp"
#include "slackdown/trace.hpp"

namespace slackdown {

/// Piecewise-constant slice of one core's timeline. Within a segment the
/// frequency, duty, sleep state and executing phase are all constant.
/// Segments are contiguous, non-overlapping and cover [0, rank end].
struct Segment {
  Rat t0_us;
  Rat t1_us;
  Rat freq_ghz;
  Rat duty;
  SleepState sleep = SleepState::Active;
  int phase_index = 0;
  PhaseKind phase_kind = PhaseKind::App;

  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class RegKind { Freq, Duty };

struct RegisterWrite {
  Rat t_us;
  int rank = 0;
  RegKind reg = RegKind::Freq;
  bool turbo = false; // freq writes only
  Rat value;          // GHz or duty fraction

  friend bool operator==(const RegisterWrite&, const RegisterWrite&) = default;
};

struct SimResult {
  std::vector<std::vector<Segment>> segments; // per rank
  Rat tts_us;
  std::vector<Rat> rank_end_us;
  std::vector<std::uint64_t> executed_cycles; // per rank, exact
  // Canonically ordered by (t, rank, reg, value) so independent
  // implementations of the same semantics produce identical logs.
  std::vector<RegisterWrite> writes;
  std::uint64_t workload_hash = 0;
  std::string policy_name;
  PolicySpec policy;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Event ordering used by the engine: ties in time break on a fixed kind
/// priority (samples first, then timer fires, work completions, releases,
/// sleep transitions, wake completions), then on scheduling order.
enum class EventKind : int {
  SampleInstant = 0,
  TimerFire = 1,
  PhaseWorkDone = 2,
  PauseDone = 3,   // end of a policy-callback cost window
  SyncRelease = 4,
  WaitEnd = 5,     // fixed extra_wait elapsed
  SleepEntered = 6, // core begins the sleep entry window
  SleepComplete = 7,
  WakeDone = 8,
};

/// Runs the workload under the policy on one core per rank. Time is exact
/// rational microseconds except that work-completion instants snap up to the
/// integer-nanosecond grid (each phase still credits exactly its cycle
/// count); this keeps denominators bounded across arbitrarily long runs.
/// Throws SimError if the workload fails validation or an internal state
/// machine is violated.
SimResult simulate(const Workload& w, const PolicySpec& policy, const HwConfig& hw);

void canonicalize_writes(std::vector<RegisterWrite>& writes);

} // namespace slackdown

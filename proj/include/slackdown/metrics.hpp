// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <vector>

#include "slackdown/engine.hpp"
#include "slackdown/rational.hpp"

namespace slackdown {

enum class PowerMode { Table, Parametric };

/// Per-core power as a function of the effective operating point.
/// Active power at full duty comes either from a frequency table or from
/// p_static + k_dyn * f^alpha; duty gates only the dynamic share:
///   P(f, d) = p_static + d * (P_active(f) - p_static).
/// Sleeping cores draw p_sleep_w; entry and wake windows draw active power.
/// uncore_w is charged per node for the whole time-to-solution.
struct PowerModel {
  PowerMode mode = PowerMode::Table;
  std::map<Rat, Rat> table_w = {
      {Rat(6, 5), Rat(4)},        // 1.2 GHz -> 4.0 W
      {Rat(12, 5), Rat(10)},      // 2.4 GHz -> 10.0 W
      {Rat(13, 5), Rat(23, 2)},   // 2.6 GHz -> 11.5 W
      {Rat(16, 5), Rat(15)},      // 3.2 GHz -> 15.0 W
  };
  Rat p_sleep_w = 1;
  Rat p_static_w = 3;
  Rat k_dyn = Rat(1, 2); // W / GHz^alpha
  Rat alpha = 3;
  Rat uncore_w = 20;

  void check() const;
  /// Power draw for one core in the given state. Throws ConfigError when a
  /// frequency is missing from the table in table mode.
  Rat power_w(const Rat& freq_ghz, const Rat& duty, SleepState sleep) const;

  friend bool operator==(const PowerModel&, const PowerModel&) = default;
};

struct EnergyBreakdown {
  Rat total_j;
  std::vector<Rat> per_rank_j; // core energy only; uncore accounted separately
  Rat uncore_j;
};

/// Exact integral of the piecewise-constant power over all segments plus the
/// uncore draw over the time-to-solution.
EnergyBreakdown energy(const SimResult& result, const PowerModel& pm);

enum class LoadMetric {
  NonSleepShare, // share of core-time outside the Sleeping state
  DutyScaled,    // same, but non-sleep time weighted by the effective duty
};

struct RunStats {
  Rat tts_us;
  Rat energy_j;
  Rat avg_freq_ghz; // cycle-weighted over non-sleeping time
  Rat avg_load_pct;
};

RunStats run_stats(const SimResult& result, const PowerModel& pm,
                   LoadMetric load = LoadMetric::NonSleepShare);

struct ComparisonReport {
  RunStats baseline;
  RunStats candidate;
  Rat overhead_pct;      // (T_c - T_b) / T_b * 100
  Rat energy_saving_pct; // (E_b - E_c) / E_b * 100
  Rat power_saving_pct;  // (P_b - P_c) / P_b * 100 with P = E / T
};

/// Throws ConfigError when the two runs do not share workload provenance.
ComparisonReport compare(const SimResult& baseline, const SimResult& candidate,
                         const PowerModel& pm, LoadMetric load = LoadMetric::NonSleepShare);

/// Consecutive (App, Mpi) phase pairs classified by whether each side
/// exceeds the threshold ("long" is strictly greater):
///   I: both long; II: app long, mpi short; III: app short, mpi long;
///   IV: both short.
struct RegionStats {
  int count = 0;
  Rat time_us;          // summed app+mpi duration of the region's pairs
  Rat app_freq_sum_ghz; // sum of per-phase settled mean frequencies
  Rat mpi_freq_sum_ghz;

  Rat mean_app_freq_ghz() const { return count ? app_freq_sum_ghz / Rat(count) : Rat(0); }
  Rat mean_mpi_freq_ghz() const { return count ? mpi_freq_sum_ghz / Rat(count) : Rat(0); }
};

struct QuadrantReport {
  Rat threshold_us;
  std::vector<std::array<RegionStats, 4>> per_rank;
  std::array<RegionStats, 4> total;
};

/// Phase durations come from the segment timeline. A phase's frequency is
/// the time-weighted mean over its settled window: from the first sampling
/// instant strictly inside the phase (when the controller has had a chance
/// to act on the phase's own requests) to the phase end, falling back to the
/// whole phase when no instant falls inside. The threshold doubles as the
/// sampling grid.
QuadrantReport quadrant_analysis(const SimResult& result, const Rat& threshold_us = 500);

struct RankDurationShare {
  Rat app_long_pct;
  Rat app_short_pct;
  Rat mpi_long_pct;
  Rat mpi_short_pct;
};

/// Per-rank share of time spent in phases longer/shorter than the threshold;
/// the four shares sum to 100 for every rank with a nonempty timeline.
std::vector<RankDurationShare> duration_split(const SimResult& result,
                                              const Rat& threshold_us = 500);

/// Phase spans reconstructed from a segment timeline (exposed for the
/// analyzers and their tests).
struct PhaseSpan {
  int phase_index = 0;
  PhaseKind kind = PhaseKind::App;
  Rat t0_us;
  Rat t1_us;
  std::vector<const Segment*> segments;
};

std::vector<PhaseSpan> phase_spans(const std::vector<Segment>& segments);

} // namespace slackdown

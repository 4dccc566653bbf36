// SPDX-License-Identifier: Apache-2.0
#include "slackdown/metrics.hpp"

#include <cmath>

#include "slackdown/errors.hpp"

namespace slackdown {

void PowerModel::check() const {
  if (mode == PowerMode::Table) {
    if (table_w.empty()) throw ConfigError("power: table mode needs at least one entry");
    Rat prev_p;
    bool first = true;
    for (const auto& [f, p] : table_w) {
      if (!(f > Rat(0))) throw ConfigError("power: table frequencies must be > 0");
      if (!first && !(p > prev_p))
        throw ConfigError("power: active power must be strictly increasing in frequency");
      prev_p = p;
      first = false;
    }
  } else {
    if (!(k_dyn > Rat(0))) throw ConfigError("power: k_dyn must be > 0");
    if (!(alpha > Rat(0))) throw ConfigError("power: alpha must be > 0");
  }
  if (p_sleep_w < Rat(0) || p_static_w < Rat(0) || uncore_w < Rat(0))
    throw ConfigError("power: watt values must be >= 0");
  if (p_sleep_w > p_static_w)
    throw ConfigError("power: p_sleep_w must not exceed p_static_w");
}

namespace {

Rat pow_rat(const Rat& base, const Rat& exp) {
  if (exp.is_integer() && exp.num() >= 0) {
    Rat acc(1);
    for (std::int64_t i = 0; i < exp.num(); ++i) acc *= base;
    return acc;
  }
  // Non-integer exponents fall back to floating point at nano resolution.
  const double v = std::pow(base.to_double(), exp.to_double());
  return Rat(static_cast<std::int64_t>(std::llround(v * 1e9)), 1000000000);
}

} // namespace

Rat PowerModel::power_w(const Rat& freq_ghz, const Rat& duty, SleepState sleep) const {
  if (sleep == SleepState::Sleeping) return p_sleep_w;
  Rat active;
  if (mode == PowerMode::Table) {
    const auto it = table_w.find(freq_ghz);
    if (it == table_w.end())
      throw ConfigError("power: frequency " + freq_ghz.to_decimal() +
                        " GHz absent from power table");
    active = it->second;
  } else {
    active = p_static_w + k_dyn * pow_rat(freq_ghz, alpha);
  }
  return p_static_w + duty * (active - p_static_w);
}

EnergyBreakdown energy(const SimResult& result, const PowerModel& pm) {
  pm.check();
  EnergyBreakdown out;
  out.per_rank_j.resize(result.segments.size());
  const Rat us_per_s(1000000);
  Rat total(0);
  for (std::size_t r = 0; r < result.segments.size(); ++r) {
    Rat e(0);
    for (const auto& s : result.segments[r])
      e += (s.t1_us - s.t0_us) * pm.power_w(s.freq_ghz, s.duty, s.sleep);
    out.per_rank_j[r] = e / us_per_s;
    total += out.per_rank_j[r];
  }
  out.uncore_j = pm.uncore_w * result.tts_us / us_per_s;
  out.total_j = total + out.uncore_j;
  return out;
}

RunStats run_stats(const SimResult& result, const PowerModel& pm, LoadMetric load) {
  RunStats st;
  st.tts_us = result.tts_us;
  st.energy_j = energy(result, pm).total_j;

  Rat freq_weighted(0), cycle_time(0);
  Rat loaded(0), total_time(0);
  for (std::size_t r = 0; r < result.segments.size(); ++r) {
    for (const auto& s : result.segments[r]) {
      const Rat dt = s.t1_us - s.t0_us;
      if (s.sleep != SleepState::Sleeping) {
        freq_weighted += s.freq_ghz * s.duty * dt;
        cycle_time += s.duty * dt;
        loaded += (load == LoadMetric::DutyScaled) ? s.duty * dt : dt;
      }
    }
    total_time += result.rank_end_us[r];
  }
  st.avg_freq_ghz = cycle_time.is_zero() ? Rat(0) : freq_weighted / cycle_time;
  st.avg_load_pct = total_time.is_zero() ? Rat(0) : loaded / total_time * Rat(100);
  return st;
}

ComparisonReport compare(const SimResult& baseline, const SimResult& candidate,
                         const PowerModel& pm, LoadMetric load) {
  if (baseline.workload_hash != candidate.workload_hash)
    throw ConfigError("compare: runs come from different workloads (meta hash mismatch)");
  ComparisonReport rep;
  rep.baseline = run_stats(baseline, pm, load);
  rep.candidate = run_stats(candidate, pm, load);
  if (rep.baseline.tts_us.is_zero()) throw SimError("compare: baseline has zero TTS");
  if (rep.baseline.energy_j.is_zero()) throw SimError("compare: baseline has zero energy");
  rep.overhead_pct =
      (rep.candidate.tts_us - rep.baseline.tts_us) / rep.baseline.tts_us * Rat(100);
  rep.energy_saving_pct =
      (rep.baseline.energy_j - rep.candidate.energy_j) / rep.baseline.energy_j * Rat(100);
  const Rat pb = rep.baseline.energy_j / rep.baseline.tts_us;
  const Rat pc = rep.candidate.energy_j / rep.candidate.tts_us;
  rep.power_saving_pct = (pb - pc) / pb * Rat(100);
  return rep;
}

std::vector<PhaseSpan> phase_spans(const std::vector<Segment>& segments) {
  std::vector<PhaseSpan> spans;
  for (const auto& s : segments) {
    if (spans.empty() || spans.back().phase_index != s.phase_index) {
      PhaseSpan span;
      span.phase_index = s.phase_index;
      span.kind = s.phase_kind;
      span.t0_us = s.t0_us;
      span.t1_us = s.t1_us;
      spans.push_back(span);
    }
    spans.back().t1_us = s.t1_us;
    spans.back().segments.push_back(&s);
  }
  return spans;
}

namespace {

// Time-weighted mean frequency over the phase's settled window. The first
// sampling instant strictly after the phase start is where the controller
// can first have honored the phase's own requests; before it the phase still
// runs at whatever the previous phase left behind.
Rat settled_mean_freq(const PhaseSpan& span, const Rat& grid_us) {
  const Rat q = span.t0_us / grid_us;
  Rat from = grid_us * Rat(q.floor() + 1);
  if (!(from < span.t1_us)) from = span.t0_us;
  Rat weighted(0), time(0);
  for (const Segment* s : span.segments) {
    const Rat a = (s->t0_us > from) ? s->t0_us : from;
    const Rat b = s->t1_us;
    if (!(a < b)) continue;
    weighted += s->freq_ghz * (b - a);
    time += b - a;
  }
  if (time.is_zero()) return Rat(0);
  // Snapped to nano-GHz so that sums of per-phase means keep bounded
  // denominators; exact level values are unaffected.
  return Rat(Rat::mul_round_nearest(weighted / time, Rat(1000000000)), 1000000000);
}

int region_of(bool app_long, bool mpi_long) {
  if (app_long && mpi_long) return 0;  // I
  if (app_long && !mpi_long) return 1; // II
  if (!app_long && mpi_long) return 2; // III
  return 3;                            // IV
}

} // namespace

QuadrantReport quadrant_analysis(const SimResult& result, const Rat& threshold_us) {
  QuadrantReport rep;
  rep.threshold_us = threshold_us;
  rep.per_rank.resize(result.segments.size());
  for (std::size_t r = 0; r < result.segments.size(); ++r) {
    const auto spans = phase_spans(result.segments[r]);
    for (std::size_t i = 0; i + 1 < spans.size(); ++i) {
      if (spans[i].kind != PhaseKind::App || spans[i + 1].kind != PhaseKind::Mpi) continue;
      const Rat d_app = spans[i].t1_us - spans[i].t0_us;
      const Rat d_mpi = spans[i + 1].t1_us - spans[i + 1].t0_us;
      const int reg = region_of(d_app > threshold_us, d_mpi > threshold_us);
      const Rat f_app = settled_mean_freq(spans[i], threshold_us);
      const Rat f_mpi = settled_mean_freq(spans[i + 1], threshold_us);
      for (RegionStats* st : {&rep.per_rank[r][static_cast<std::size_t>(reg)],
                              &rep.total[static_cast<std::size_t>(reg)]}) {
        st->count += 1;
        st->time_us += d_app + d_mpi;
        st->app_freq_sum_ghz += f_app;
        st->mpi_freq_sum_ghz += f_mpi;
      }
    }
  }
  return rep;
}

std::vector<RankDurationShare> duration_split(const SimResult& result,
                                              const Rat& threshold_us) {
  std::vector<RankDurationShare> out(result.segments.size());
  for (std::size_t r = 0; r < result.segments.size(); ++r) {
    Rat app_long(0), app_short(0), mpi_long(0), mpi_short(0), total(0);
    for (const auto& span : phase_spans(result.segments[r])) {
      const Rat d = span.t1_us - span.t0_us;
      total += d;
      const bool is_long = d > threshold_us;
      if (span.kind == PhaseKind::App) {
        (is_long ? app_long : app_short) += d;
      } else {
        (is_long ? mpi_long : mpi_short) += d;
      }
    }
    if (total.is_zero()) continue;
    out[r].app_long_pct = app_long / total * Rat(100);
    out[r].app_short_pct = app_short / total * Rat(100);
    out[r].mpi_long_pct = mpi_long / total * Rat(100);
    out[r].mpi_short_pct = mpi_short / total * Rat(100);
  }
  return out;
}

} // namespace slackdown

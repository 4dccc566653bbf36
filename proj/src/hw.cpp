// SPDX-License-Identifier: Apache-2.0
#include "slackdown/hw.hpp"

#include <algorithm>

#include "slackdown/errors.hpp"

namespace slackdown {

void HwConfig::check() const {
  if (!(sample_period_us > Rat(0))) throw ConfigError("hw: sample_period_us must be > 0");
  if (freq_levels_ghz.empty()) throw ConfigError("hw: freq_levels_ghz must not be empty");
  if (!std::is_sorted(freq_levels_ghz.begin(), freq_levels_ghz.end()))
    throw ConfigError("hw: freq_levels_ghz must be sorted ascending");
  for (const auto& f : freq_levels_ghz)
    if (!(f > Rat(0))) throw ConfigError("hw: frequency levels must be > 0");
  if (std::adjacent_find(freq_levels_ghz.begin(), freq_levels_ghz.end()) !=
      freq_levels_ghz.end())
    throw ConfigError("hw: duplicate frequency level");
  if (turbo_table_ghz.empty()) throw ConfigError("hw: turbo_table_ghz must not be empty");
  const Rat max_level = freq_levels_ghz.back();
  for (const auto& [count, ghz] : turbo_table_ghz) {
    if (count < 1) throw ConfigError("hw: turbo table keys must be >= 1");
    if (ghz < max_level)
      throw ConfigError("hw: turbo frequencies must be >= the highest P-state level");
  }
  if (duty_levels.empty()) throw ConfigError("hw: duty_levels must not be empty");
  bool has_full = false;
  for (const auto& d : duty_levels) {
    if (!(d > Rat(0)) || d > Rat(1)) throw ConfigError("hw: duty levels must be in (0,1]");
    if (d == Rat(1)) has_full = true;
  }
  if (!has_full) throw ConfigError("hw: duty_levels must include 1.0");
  if (cstate_entry_us < Rat(0) || cstate_wake_us < Rat(0))
    throw ConfigError("hw: c-state latencies must be >= 0");
}

Rat HwConfig::turbo_for(int active_cores) const {
  // Largest key <= count; counts below the smallest key use the smallest.
  auto it = turbo_table_ghz.upper_bound(active_cores);
  if (it == turbo_table_ghz.begin()) return it->second;
  return std::prev(it)->second;
}

Rat HwConfig::grid_after(const Rat& t) const {
  const Rat q = t / sample_period_us;
  return sample_period_us * Rat(q.floor() + 1);
}

bool HwConfig::is_freq_level(const Rat& ghz) const {
  return std::find(freq_levels_ghz.begin(), freq_levels_ghz.end(), ghz) !=
         freq_levels_ghz.end();
}

bool HwConfig::is_duty_level(const Rat& duty) const {
  return std::find(duty_levels.begin(), duty_levels.end(), duty) != duty_levels.end();
}

const char* to_string(SleepState s) {
  switch (s) {
    case SleepState::Active: return "active";
    case SleepState::EnteringSleep: return "entering_sleep";
    case SleepState::Sleeping: return "sleeping";
    case SleepState::Waking: return "waking";
  }
  return "?";
}

CoreSet::CoreSet(int n_cores, const HwConfig& cfg) : cfg_(cfg) {
  cfg_.check();
  if (n_cores < 1) throw ConfigError("hw: need at least one core");
  cores_.resize(static_cast<std::size_t>(n_cores));
  active_ = n_cores;
  for (auto& c : cores_) {
    c.applied_freq = FreqRequest::fixed(cfg_.freq_levels_ghz.back());
    c.eff_freq = c.applied_freq.level_ghz;
  }
}

CoreSet::Core& CoreSet::at(int core) {
  if (core < 0 || core >= size()) throw SimError("hw: core index out of range");
  return cores_[static_cast<std::size_t>(core)];
}

const CoreSet::Core& CoreSet::at(int core) const {
  if (core < 0 || core >= size()) throw SimError("hw: core index out of range");
  return cores_[static_cast<std::size_t>(core)];
}

Rat CoreSet::resolve(const FreqRequest& req) const {
  return req.turbo ? cfg_.turbo_for(active_) : req.level_ghz;
}

Rat CoreSet::speed_of(const Core& c) const {
  if (c.sleep != SleepState::Active) return Rat(0);
  return c.eff_freq * Rat(1000) * c.eff_duty;
}

Rat CoreSet::effective_speed(int core) const { return speed_of(at(core)); }

void CoreSet::write_freq_request(int core, const FreqRequest& req, const Rat& t) {
  if (!req.turbo && !cfg_.is_freq_level(req.level_ghz)) {
    std::string msg = "hw: unknown frequency level " + req.level_ghz.to_decimal() +
                      " GHz; valid levels:";
    for (const auto& f : cfg_.freq_levels_ghz) msg += " " + f.to_decimal();
    msg += " or turbo";
    throw ConfigError(msg);
  }
  at(core).pending_freq = {req, t};
}

void CoreSet::write_duty_request(int core, const Rat& duty, const Rat& t) {
  if (!cfg_.is_duty_level(duty)) {
    std::string msg = "hw: unknown duty level " + duty.to_decimal() + "; valid levels:";
    for (const auto& d : cfg_.duty_levels) msg += " " + d.to_decimal();
    throw ConfigError(msg);
  }
  at(core).pending_duty = {duty, t};
}

void CoreSet::preapply(int core, const FreqRequest& freq, const Rat& duty) {
  if (!freq.turbo && !cfg_.is_freq_level(freq.level_ghz))
    throw ConfigError("hw: initial frequency is not a valid level");
  if (!cfg_.is_duty_level(duty)) throw ConfigError("hw: initial duty is not a valid level");
  Core& c = at(core);
  c.applied_freq = freq;
  c.eff_freq = resolve(freq);
  c.eff_duty = duty;
  c.pending_freq.reset();
  c.pending_duty.reset();
}

std::vector<SpeedChange> CoreSet::apply_pending(const Rat& s) {
  std::vector<SpeedChange> out;
  for (int i = 0; i < size(); ++i) {
    Core& c = cores_[static_cast<std::size_t>(i)];
    const Rat old_speed = speed_of(c);
    bool touched = false;
    if (c.pending_freq && c.pending_freq->second < s) {
      c.applied_freq = c.pending_freq->first;
      c.eff_freq = resolve(c.applied_freq);
      c.pending_freq.reset();
      touched = true;
    }
    if (c.pending_duty && c.pending_duty->second < s) {
      c.eff_duty = c.pending_duty->first;
      c.pending_duty.reset();
      touched = true;
    }
    if (touched) {
      const Rat ns = speed_of(c);
      out.push_back({i, old_speed, ns});
    }
  }
  return out;
}

void CoreSet::rearbitrate(std::vector<SpeedChange>& out) {
  for (int i = 0; i < size(); ++i) {
    Core& c = cores_[static_cast<std::size_t>(i)];
    if (!c.applied_freq.turbo) continue;
    // A sleeping core holds no grant; it is re-resolved at its own wake.
    if (c.sleep == SleepState::Sleeping) continue;
    const Rat granted = cfg_.turbo_for(active_);
    if (granted == c.eff_freq) continue;
    const Rat old_speed = speed_of(c);
    c.eff_freq = granted;
    out.push_back({i, old_speed, speed_of(c)});
  }
}

void CoreSet::begin_sleep(int core, const Rat&) {
  Core& c = at(core);
  if (c.sleep != SleepState::Active)
    throw SimError("hw: sleep requested while not Active (double sleep)");
  c.sleep = SleepState::EnteringSleep;
  // Entry window: no execution, active power, core still counted active.
}

std::vector<SpeedChange> CoreSet::finish_sleep_entry(int core) {
  Core& c = at(core);
  if (c.sleep != SleepState::EnteringSleep)
    throw SimError("hw: sleep entry completion while not entering sleep");
  c.sleep = SleepState::Sleeping;
  active_ -= 1;
  std::vector<SpeedChange> out;
  rearbitrate(out);
  return out;
}

std::vector<SpeedChange> CoreSet::wake(int core, const Rat&) {
  Core& c = at(core);
  std::vector<SpeedChange> out;
  if (c.sleep == SleepState::Sleeping) {
    active_ += 1;
    c.sleep = SleepState::Waking;
    rearbitrate(out);
  } else if (c.sleep == SleepState::EnteringSleep) {
    // Woken before the entry window completed; it never reached Sleeping.
    c.sleep = SleepState::Waking;
    rearbitrate(out);
  } else {
    throw SimError("hw: wake while not sleeping (double wake)");
  }
  return out;
}

void CoreSet::finish_wake(int core) {
  Core& c = at(core);
  if (c.sleep != SleepState::Waking) throw SimError("hw: wake completion while not waking");
  c.sleep = SleepState::Active;
}

} // namespace slackdown

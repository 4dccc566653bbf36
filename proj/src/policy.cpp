// SPDX-License-Identifier: Apache-2.0
#include "slackdown/policy.hpp"

#include "slackdown/errors.hpp"

namespace slackdown {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::BusyWait: return "busy_wait";
    case PolicyKind::WaitMode: return "wait_mode";
    case PolicyKind::SpinWait: return "spin_wait";
    case PolicyKind::NaiveDvfs: return "naive_dvfs";
    case PolicyKind::NaiveThrottle: return "naive_throttle";
    case PolicyKind::CountdownDvfs: return "countdown_dvfs";
    case PolicyKind::CountdownThrottle: return "countdown_throttle";
  }
  return "?";
}

PolicyKind policy_kind_from_name(const std::string& name) {
  if (name == "busy_wait") return PolicyKind::BusyWait;
  if (name == "wait_mode") return PolicyKind::WaitMode;
  if (name == "spin_wait") return PolicyKind::SpinWait;
  if (name == "naive_dvfs") return PolicyKind::NaiveDvfs;
  if (name == "naive_throttle") return PolicyKind::NaiveThrottle;
  if (name == "countdown_dvfs") return PolicyKind::CountdownDvfs;
  if (name == "countdown_throttle") return PolicyKind::CountdownThrottle;
  throw ConfigError("unknown policy \"" + name +
                    "\"; expected one of busy_wait, wait_mode, spin_wait, naive_dvfs, "
                    "naive_throttle, countdown_dvfs, countdown_throttle");
}

void PolicySpec::check(const HwConfig& hw) const {
  if (event_cost_us < Rat(0)) throw ConfigError("policy: event_cost_us must be >= 0");
  switch (kind) {
    case PolicyKind::BusyWait:
    case PolicyKind::WaitMode:
      break;
    case PolicyKind::SpinWait:
      if (!(spin_iteration_us > Rat(0)))
        throw ConfigError("policy: spin_iteration_us must be > 0");
      break;
    case PolicyKind::NaiveDvfs:
    case PolicyKind::CountdownDvfs:
      if (!hw.is_freq_level(low_freq_ghz))
        throw ConfigError("policy: low_freq_ghz " + low_freq_ghz.to_decimal() +
                          " is not a configured P-state level");
      if (!high_freq.turbo && !hw.is_freq_level(high_freq.level_ghz))
        throw ConfigError("policy: high_freq is not a configured P-state level");
      if (kind == PolicyKind::CountdownDvfs && !(timeout_us > Rat(0)))
        throw ConfigError("policy: timeout_us must be > 0");
      break;
    case PolicyKind::NaiveThrottle:
    case PolicyKind::CountdownThrottle:
      if (!hw.is_duty_level(low_duty))
        throw ConfigError("policy: low_duty " + low_duty.to_decimal() +
                          " is not a configured duty level");
      if (!hw.is_duty_level(Rat(1)))
        throw ConfigError("policy: duty level 1.0 missing from hardware config");
      if (kind == PolicyKind::CountdownThrottle && !(timeout_us > Rat(0)))
        throw ConfigError("policy: timeout_us must be > 0");
      break;
  }
}

FreqRequest initial_freq_request(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::NaiveDvfs:
    case PolicyKind::CountdownDvfs:
      return spec.high_freq;
    default:
      return FreqRequest::turbo_request();
  }
}

namespace {

class BusyWait final : public Policy {
public:
  void on_mpi_enter(PolicyContext&) override {}
  void on_timer(PolicyContext&) override {}
  void on_mpi_exit(PolicyContext&) override {}
};

class WaitMode final : public Policy {
public:
  void on_mpi_enter(PolicyContext& ctx) override { ctx.request_sleep_at_wait(Rat(0)); }
  void on_timer(PolicyContext&) override {}
  void on_mpi_exit(PolicyContext&) override {}
};

class SpinWait final : public Policy {
public:
  explicit SpinWait(const PolicySpec& s)
      : spin_us_(Rat(static_cast<std::int64_t>(s.spin_count)) * s.spin_iteration_us) {}
  void on_mpi_enter(PolicyContext& ctx) override { ctx.request_sleep_at_wait(spin_us_); }
  void on_timer(PolicyContext&) override {}
  void on_mpi_exit(PolicyContext&) override {}

private:
  Rat spin_us_;
};

class NaiveDvfs final : public Policy {
public:
  explicit NaiveDvfs(const PolicySpec& s) : low_(s.low_freq_ghz), high_(s.high_freq) {}
  void on_mpi_enter(PolicyContext& ctx) override {
    ctx.write_freq_request(FreqRequest::fixed(low_));
  }
  void on_timer(PolicyContext&) override {}
  void on_mpi_exit(PolicyContext& ctx) override { ctx.write_freq_request(high_); }

private:
  Rat low_;
  FreqRequest high_;
};

class NaiveThrottle final : public Policy {
public:
  explicit NaiveThrottle(const PolicySpec& s) : low_(s.low_duty) {}
  void on_mpi_enter(PolicyContext& ctx) override { ctx.write_duty_request(low_); }
  void on_timer(PolicyContext&) override {}
  void on_mpi_exit(PolicyContext& ctx) override { ctx.write_duty_request(Rat(1)); }

private:
  Rat low_;
};

// Common countdown logic: arm on entry, act on expiry, disarm on exit and
// restore only if the timer actually fired during the phase.
class CountdownBase : public Policy {
public:
  explicit CountdownBase(Rat timeout) : timeout_(timeout) {}
  void on_mpi_enter(PolicyContext& ctx) override {
    fired_ = false;
    ctx.arm_timer(timeout_);
  }
  void on_timer(PolicyContext& ctx) override {
    fired_ = true;
    lower(ctx);
  }
  void on_mpi_exit(PolicyContext& ctx) override {
    ctx.disarm_timer();
    if (fired_) {
      restore(ctx);
      fired_ = false;
    }
  }

protected:
  virtual void lower(PolicyContext& ctx) = 0;
  virtual void restore(PolicyContext& ctx) = 0;

private:
  Rat timeout_;
  bool fired_ = false;
};

class CountdownDvfs final : public CountdownBase {
public:
  explicit CountdownDvfs(const PolicySpec& s)
      : CountdownBase(s.timeout_us), low_(s.low_freq_ghz), high_(s.high_freq) {}

protected:
  void lower(PolicyContext& ctx) override { ctx.write_freq_request(FreqRequest::fixed(low_)); }
  void restore(PolicyContext& ctx) override { ctx.write_freq_request(high_); }

private:
  Rat low_;
  FreqRequest high_;
};

class CountdownThrottle final : public CountdownBase {
public:
  explicit CountdownThrottle(const PolicySpec& s)
      : CountdownBase(s.timeout_us), low_(s.low_duty) {}

protected:
  void lower(PolicyContext& ctx) override { ctx.write_duty_request(low_); }
  void restore(PolicyContext& ctx) override { ctx.write_duty_request(Rat(1)); }

private:
  Rat low_;
};

} // namespace

std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
  switch (spec.kind) {
    case PolicyKind::BusyWait: return std::make_unique<BusyWait>();
    case PolicyKind::WaitMode: return std::make_unique<WaitMode>();
    case PolicyKind::SpinWait: return std::make_unique<SpinWait>(spec);
    case PolicyKind::NaiveDvfs: return std::make_unique<NaiveDvfs>(spec);
    case PolicyKind::NaiveThrottle: return std::make_unique<NaiveThrottle>(spec);
    case PolicyKind::CountdownDvfs: return std::make_unique<CountdownDvfs>(spec);
    case PolicyKind::CountdownThrottle: return std::make_unique<CountdownThrottle>(spec);
  }
  throw ConfigError("unhandled policy kind");
}

namespace {

Rat parse_rat_param(const std::string& key, const std::string& value) {
  const auto r = Rat::parse(value);
  if (!r) throw ConfigError("policy parameter " + key + ": cannot parse \"" + value + "\"");
  return *r;
}

} // namespace

PolicySpec policy_spec_from_params(const std::string& name,
                                   const std::map<std::string, std::string>& params) {
  PolicySpec spec;
  spec.kind = policy_kind_from_name(name);
  for (const auto& [key, value] : params) {
    if (key == "timeout_us") {
      spec.timeout_us = parse_rat_param(key, value);
    } else if (key == "spin_count") {
      try {
        spec.spin_count = std::stoull(value);
      } catch (const std::exception&) {
        throw ConfigError("policy parameter spin_count: cannot parse \"" + value + "\"");
      }
    } else if (key == "spin_iteration_us") {
      spec.spin_iteration_us = parse_rat_param(key, value);
    } else if (key == "low_freq_ghz") {
      spec.low_freq_ghz = parse_rat_param(key, value);
    } else if (key == "low_duty") {
      spec.low_duty = parse_rat_param(key, value);
    } else if (key == "high_freq") {
      if (value == "turbo" || value == "TURBO") {
        spec.high_freq = FreqRequest::turbo_request();
      } else {
        spec.high_freq = FreqRequest::fixed(parse_rat_param(key, value));
      }
    } else if (key == "event_cost_us") {
      spec.event_cost_us = parse_rat_param(key, value);
    } else {
      throw ConfigError("unknown policy parameter \"" + key + "\"");
    }
  }
  return spec;
}

} // namespace slackdown

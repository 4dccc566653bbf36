// SPDX-License-Identifier: Apache-2.0
#include "slackdown/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "slackdown/errors.hpp"

namespace slackdown {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

Rat parse_rat(const std::string& key, const std::string& value) {
  const auto r = Rat::parse(value);
  if (!r) throw ConfigError("config " + key + ": cannot parse number \"" + value + "\"");
  return *r;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

} // namespace

KvConfig KvConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  KvConfig kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    kv.values[key] = value;
  }
  return kv;
}

void KvConfig::merge(const KvConfig& overrides) {
  for (const auto& [k, v] : overrides.values) values[k] = v;
}

std::string KvConfig::get(const std::string& key, const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

Rat KvConfig::get_rat(const std::string& key, const Rat& fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  return parse_rat(key, it->second);
}

RunConfig RunConfig::from_kv(const KvConfig& kv) {
  static const std::set<std::string> known = {
      "workload", "policy", "baseline", "timeout_us", "spin_count", "spin_iteration_us",
      "low_freq_ghz", "low_duty", "high_freq", "event_cost_us", "sample_period_us",
      "freq_levels_ghz", "turbo_table_ghz", "duty_levels", "cstate_entry_us",
      "cstate_wake_us", "power_mode", "power_table_w", "power_sleep_w", "power_static_w",
      "power_k_dyn", "power_alpha", "power_uncore_w", "load_metric", "out"};
  for (const auto& [k, _] : kv.values) {
    if (known.find(k) == known.end())
      throw ConfigError("config: unknown key \"" + k + "\"");
  }

  RunConfig rc;
  rc.workload = kv.get("workload", "");
  rc.out_dir = kv.get("out", ".");

  // Hardware.
  rc.hw.sample_period_us = kv.get_rat("sample_period_us", rc.hw.sample_period_us);
  if (kv.has("freq_levels_ghz")) {
    rc.hw.freq_levels_ghz.clear();
    for (const auto& item : split_list(kv.get("freq_levels_ghz", "")))
      rc.hw.freq_levels_ghz.push_back(parse_rat("freq_levels_ghz", item));
  }
  if (kv.has("turbo_table_ghz")) {
    rc.hw.turbo_table_ghz.clear();
    for (const auto& item : split_list(kv.get("turbo_table_ghz", ""))) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ConfigError("config turbo_table_ghz: expected count:ghz entries");
      int count = 0;
      try {
        count = std::stoi(trim(item.substr(0, colon)));
      } catch (const std::exception&) {
        throw ConfigError("config turbo_table_ghz: bad core count in \"" + item + "\"");
      }
      rc.hw.turbo_table_ghz[count] =
          parse_rat("turbo_table_ghz", trim(item.substr(colon + 1)));
    }
  }
  if (kv.has("duty_levels")) {
    rc.hw.duty_levels.clear();
    for (const auto& item : split_list(kv.get("duty_levels", "")))
      rc.hw.duty_levels.push_back(parse_rat("duty_levels", item));
  }
  rc.hw.cstate_entry_us = kv.get_rat("cstate_entry_us", rc.hw.cstate_entry_us);
  rc.hw.cstate_wake_us = kv.get_rat("cstate_wake_us", rc.hw.cstate_wake_us);
  rc.hw.check();

  // Policies: candidate and baseline share the parameter set.
  std::map<std::string, std::string> params;
  for (const char* key : {"timeout_us", "spin_count", "spin_iteration_us", "low_freq_ghz",
                          "low_duty", "high_freq", "event_cost_us"}) {
    if (kv.has(key)) params[key] = kv.get(key, "");
  }
  rc.policy = policy_spec_from_params(kv.get("policy", "busy_wait"), params);
  rc.baseline_name = kv.get("baseline", "busy_wait");
  rc.baseline = policy_spec_from_params(rc.baseline_name, params);
  rc.policy.check(rc.hw);
  rc.baseline.check(rc.hw);

  // Power model.
  const std::string pmode = kv.get("power_mode", "table");
  if (pmode == "table") {
    rc.power.mode = PowerMode::Table;
  } else if (pmode == "parametric") {
    rc.power.mode = PowerMode::Parametric;
  } else {
    throw ConfigError("config power_mode: expected table or parametric");
  }
  if (kv.has("power_table_w")) {
    rc.power.table_w.clear();
    for (const auto& item : split_list(kv.get("power_table_w", ""))) {
      const auto colon = item.find(':');
      if (colon == std::string::npos)
        throw ConfigError("config power_table_w: expected ghz:watts entries");
      rc.power.table_w[parse_rat("power_table_w", trim(item.substr(0, colon)))] =
          parse_rat("power_table_w", trim(item.substr(colon + 1)));
    }
  }
  rc.power.p_sleep_w = kv.get_rat("power_sleep_w", rc.power.p_sleep_w);
  rc.power.p_static_w = kv.get_rat("power_static_w", rc.power.p_static_w);
  rc.power.k_dyn = kv.get_rat("power_k_dyn", rc.power.k_dyn);
  rc.power.alpha = kv.get_rat("power_alpha", rc.power.alpha);
  rc.power.uncore_w = kv.get_rat("power_uncore_w", rc.power.uncore_w);
  rc.power.check();

  const std::string lm = kv.get("load_metric", "cstate");
  if (lm == "cstate") {
    rc.load_metric = LoadMetric::NonSleepShare;
  } else if (lm == "duty_scaled") {
    rc.load_metric = LoadMetric::DutyScaled;
  } else {
    throw ConfigError("config load_metric: expected cstate or duty_scaled");
  }
  return rc;
}

} // namespace slackdown

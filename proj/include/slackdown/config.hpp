// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "slackdown/hw.hpp"
#include "slackdown/metrics.hpp"
#include "slackdown/policy.hpp"

namespace slackdown {

/// Flat key = value configuration ('#' starts a comment). CLI flags override
/// file values by merging a second map on top.
struct KvConfig {
  std::map<std::string, std::string> values;

  static KvConfig from_file(const std::filesystem::path& path);
  void merge(const KvConfig& overrides);

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  Rat get_rat(const std::string& key, const Rat& fallback) const;
};

/// Assembled simulation inputs. Unknown keys are rejected to catch typos.
struct RunConfig {
  std::filesystem::path workload;
  PolicySpec policy;
  std::string baseline_name = "busy_wait";
  PolicySpec baseline;
  HwConfig hw;
  PowerModel power;
  LoadMetric load_metric = LoadMetric::NonSleepShare;
  std::filesystem::path out_dir = ".";

  static RunConfig from_kv(const KvConfig& kv);
};

} // namespace slackdown

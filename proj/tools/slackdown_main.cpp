// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "slackdown/config.hpp"
#include "slackdown/csvio.hpp"
#include "slackdown/engine.hpp"
#include "slackdown/errors.hpp"
#include "slackdown/log.hpp"
#include "slackdown/metrics.hpp"
#include "slackdown/trace.hpp"

namespace fs = std::filesystem;
using namespace slackdown;

namespace {

Rat rat_arg(const std::string& flag, const std::string& value) {
  const auto r = Rat::parse(value);
  if (!r) throw ConfigError(flag + ": cannot parse number \"" + value + "\"");
  return *r;
}

std::vector<Rat> rat_list(const std::string& flag, const std::string& csv) {
  std::vector<Rat> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(rat_arg(flag, cur));
      cur.clear();
    }
  };
  for (const char c : csv) {
    if (c == ',') {
      flush();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  flush();
  if (out.empty()) throw ConfigError(flag + ": needs at least one value");
  return out;
}

struct GenerateArgs {
  std::string kind;
  int ranks = 4;
  int iters = 100;
  std::string app_us = "200";
  std::string mpi_us = "50";
  std::string work_fraction = "1";
  std::string jitter_pct = "0";
  int diag_rank = 0;
  std::string diag_app_us = "3000";
  std::string other_app_us = "1000";
  std::string ref_ghz = "2.4";
  std::uint64_t seed = 0;
  std::string out = "workload.json";
};

int cmd_generate(const GenerateArgs& a) {
  Workload w;
  if (a.kind == "balanced") {
    BalancedParams p;
    p.n_ranks = a.ranks;
    p.n_iters = a.iters;
    p.app_us = rat_arg("--app-us", a.app_us);
    p.mpi_us = rat_arg("--mpi-us", a.mpi_us);
    p.mpi_work_fraction = rat_arg("--work-fraction", a.work_fraction);
    p.jitter_pct = rat_arg("--jitter-pct", a.jitter_pct);
    p.seed = a.seed;
    p.ref_freq_ghz = rat_arg("--ref-ghz", a.ref_ghz);
    w = gen_balanced(p);
  } else if (a.kind == "unbalanced") {
    UnbalancedParams p;
    p.n_ranks = a.ranks;
    p.n_iters = a.iters;
    p.diag_rank = a.diag_rank;
    p.diag_app_us = rat_arg("--diag-app-us", a.diag_app_us);
    p.other_app_us = rat_arg("--other-app-us", a.other_app_us);
    p.seed = a.seed;
    p.ref_freq_ghz = rat_arg("--ref-ghz", a.ref_ghz);
    w = gen_unbalanced(p);
  } else {
    throw ConfigError("generate: kind must be balanced or unbalanced");
  }
  const auto violations = validate(w);
  if (!violations.empty()) throw SimError("generated workload failed validation");
  if (const fs::path dir = fs::path(a.out).parent_path(); !dir.empty())
    fs::create_directories(dir);
  save_workload(w, a.out);

  std::size_t phases = 0;
  for (const auto& r : w.ranks) phases += r.phases.size();
  std::cout << "generated " << a.kind << " workload: ranks=" << w.ranks.size()
            << " phases=" << phases << " file=" << a.out << "\n";
  return 0;
}

struct SimInputs {
  RunConfig rc;
  Workload workload;
};

SimInputs load_inputs(const KvConfig& merged) {
  SimInputs in;
  in.rc = RunConfig::from_kv(merged);
  if (in.rc.workload.empty())
    throw ConfigError("no workload given (config key workload= or --workload)");
  in.workload = load_workload(in.rc.workload);
  return in;
}

ReportRow make_row(const PolicySpec& spec, const ComparisonReport& rep) {
  ReportRow row;
  row.policy = spec.name();
  row.timeout_us = (spec.kind == PolicyKind::CountdownDvfs ||
                    spec.kind == PolicyKind::CountdownThrottle)
                       ? spec.timeout_us
                       : Rat(0);
  row.rep = rep;
  return row;
}

void print_summary(const ComparisonReport& rep, const std::string& policy,
                   const std::string& baseline) {
  std::cout << "policy=" << policy << " baseline=" << baseline
            << " tts_us=" << rep.candidate.tts_us.to_decimal()
            << " baseline_tts_us=" << rep.baseline.tts_us.to_decimal()
            << " overhead_pct=" << rep.overhead_pct.to_fixed(2)
            << " energy_j=" << rep.candidate.energy_j.to_decimal(6)
            << " energy_saving_pct=" << rep.energy_saving_pct.to_fixed(2)
            << " power_saving_pct=" << rep.power_saving_pct.to_fixed(2) << "\n";
}

int cmd_simulate(const KvConfig& merged) {
  const SimInputs in = load_inputs(merged);
  fs::create_directories(in.rc.out_dir);
  slog::info("simulating " + in.rc.policy.name() + " vs " + in.rc.baseline_name);
  const SimResult base = simulate(in.workload, in.rc.baseline, in.rc.hw);
  const SimResult cand = simulate(in.workload, in.rc.policy, in.rc.hw);
  const ComparisonReport rep = compare(base, cand, in.rc.power, in.rc.load_metric);

  write_report_csv({make_row(in.rc.policy, rep)}, in.rc.out_dir / "report.csv");
  write_segments_csv(cand, in.rc.out_dir / "segments.csv");
  write_segments_csv(base, in.rc.out_dir / "segments_baseline.csv");
  print_summary(rep, in.rc.policy.name(), in.rc.baseline_name);
  return 0;
}

int cmd_sweep(const KvConfig& merged, const std::string& timeouts,
              const std::string& spin_counts, const std::string& sample_periods) {
  const int given = (!timeouts.empty() ? 1 : 0) + (!spin_counts.empty() ? 1 : 0) +
                    (!sample_periods.empty() ? 1 : 0);
  if (given != 1)
    throw ConfigError("sweep: give exactly one of --timeouts, --spin-counts, "
                      "--sample-periods");
  const SimInputs in = load_inputs(merged);
  fs::create_directories(in.rc.out_dir);

  std::string param;
  std::vector<Rat> values;
  if (!timeouts.empty()) {
    param = "timeout_us";
    values = rat_list("--timeouts", timeouts);
  } else if (!spin_counts.empty()) {
    param = "spin_count";
    values = rat_list("--spin-counts", spin_counts);
    for (const auto& v : values)
      if (!v.is_integer() || v.num() < 0)
        throw ConfigError("--spin-counts: values must be non-negative integers");
  } else {
    param = "sample_period_us";
    values = rat_list("--sample-periods", sample_periods);
  }
  std::sort(values.begin(), values.end());

  // The baseline never issues register writes, so it is shared across all
  // points of a timeout/spin sweep; sample-period points change the hardware
  // and recompute it.
  SimResult shared_base;
  if (param != "sample_period_us")
    shared_base = simulate(in.workload, in.rc.baseline, in.rc.hw);

  auto run_point = [&](const Rat& value) -> ComparisonReport {
    RunConfig rc = in.rc;
    if (param == "timeout_us") {
      rc.policy.timeout_us = value;
    } else if (param == "spin_count") {
      rc.policy.spin_count = static_cast<std::uint64_t>(value.num());
    } else {
      rc.hw.sample_period_us = value;
      rc.hw.check();
    }
    const SimResult cand = simulate(in.workload, rc.policy, rc.hw);
    const SimResult base = (param == "sample_period_us")
                               ? simulate(in.workload, rc.baseline, rc.hw)
                               : shared_base;
    return compare(base, cand, rc.power, rc.load_metric);
  };

  std::vector<std::future<ComparisonReport>> futures;
  futures.reserve(values.size());
  for (const auto& v : values)
    futures.push_back(std::async(std::launch::async, run_point, v));

  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ComparisonReport rep = futures[i].get();
    PolicySpec spec = in.rc.policy;
    if (param == "timeout_us") spec.timeout_us = values[i];
    rows.push_back(make_row(spec, rep));
    std::cout << param << "=" << values[i].to_decimal()
              << " overhead_pct=" << rep.overhead_pct.to_fixed(2)
              << " energy_saving_pct=" << rep.energy_saving_pct.to_fixed(2) << "\n";
  }
  write_sweep_csv(param, values, rows, in.rc.out_dir / "sweep.csv");
  return 0;
}

int cmd_analyze(const std::string& segments_path, const std::string& threshold,
                const fs::path& out_dir) {
  const Rat theta = rat_arg("--threshold-us", threshold);
  const SimResult r = read_segments_csv(segments_path);
  fs::create_directories(out_dir);
  write_quadrant_csv(quadrant_analysis(r, theta), out_dir / "quadrant.csv");
  write_duration_csv(duration_split(r, theta), out_dir / "duration.csv");
  std::cout << "analyzed " << segments_path << " ranks=" << r.segments.size()
            << " threshold_us=" << theta.to_decimal() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"slackdown: trace-driven simulator for power policies over MPI slack"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "key = value run configuration file");
  app.add_option("--out", out_dir, "output directory (or file for generate)");
  app.add_flag_callback("--version", [] {
    std::cout << "slackdown 0.1.0\n";
    throw CLI::Success{};
  });
  auto* seed_opt = app.add_option("--seed", seed, "generator seed");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic workload file");
  g->add_option("kind", gen.kind, "balanced | unbalanced")->required();
  g->add_option("--ranks", gen.ranks);
  g->add_option("--iters", gen.iters);
  g->add_option("--app-us", gen.app_us);
  g->add_option("--mpi-us", gen.mpi_us);
  g->add_option("--work-fraction", gen.work_fraction);
  g->add_option("--jitter-pct", gen.jitter_pct);
  g->add_option("--diag-rank", gen.diag_rank);
  g->add_option("--diag-app-us", gen.diag_app_us);
  g->add_option("--other-app-us", gen.other_app_us);
  g->add_option("--ref-ghz", gen.ref_ghz);

  // simulate/sweep share the config override surface.
  std::map<std::string, std::string> overrides;
  auto add_kv_options = [&overrides](CLI::App* cmd) {
    for (const auto& [flag, key] :
         std::vector<std::pair<std::string, std::string>>{
             {"--workload", "workload"},
             {"--policy", "policy"},
             {"--baseline", "baseline"},
             {"--timeout-us", "timeout_us"},
             {"--spin-count", "spin_count"},
             {"--spin-iteration-us", "spin_iteration_us"},
             {"--low-freq", "low_freq_ghz"},
             {"--low-duty", "low_duty"},
             {"--high-freq", "high_freq"},
             {"--event-cost-us", "event_cost_us"},
             {"--sample-period-us", "sample_period_us"},
             {"--freq-levels", "freq_levels_ghz"},
             {"--turbo-table", "turbo_table_ghz"},
             {"--duty-levels", "duty_levels"},
             {"--cstate-entry-us", "cstate_entry_us"},
             {"--cstate-wake-us", "cstate_wake_us"},
             {"--power-mode", "power_mode"},
             {"--power-table", "power_table_w"},
             {"--power-sleep-w", "power_sleep_w"},
             {"--power-static-w", "power_static_w"},
             {"--power-k-dyn", "power_k_dyn"},
             {"--power-alpha", "power_alpha"},
             {"--power-uncore-w", "power_uncore_w"},
             {"--load-metric", "load_metric"}}) {
      const std::string k = key;
      cmd->add_option_function<std::string>(
          flag, [&overrides, k](const std::string& v) { overrides[k] = v; });
    }
  };

  auto* s = app.add_subcommand("simulate", "run a policy against the baseline");
  add_kv_options(s);

  std::string timeouts, spin_counts, sample_periods;
  auto* sw = app.add_subcommand("sweep", "compare one policy across a parameter range");
  add_kv_options(sw);
  sw->add_option("--timeouts", timeouts, "comma list of timeout_us values");
  sw->add_option("--spin-counts", spin_counts, "comma list of spin counts");
  sw->add_option("--sample-periods", sample_periods, "comma list of sample periods (us)");

  std::string segments_path;
  std::string threshold = "500";
  auto* an = app.add_subcommand("analyze", "quadrant and duration analyses of a segments CSV");
  an->add_option("segments", segments_path, "segments CSV path")->required();
  an->add_option("--threshold-us", threshold, "long/short phase threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  seed_given = seed_opt->count() > 0;

  try {
    KvConfig merged;
    if (!config_path.empty()) merged = KvConfig::from_file(config_path);
    merged.merge(KvConfig{overrides});
    if (!out_dir.empty() && !app.get_subcommand("generate")->parsed())
      merged.values["out"] = out_dir;

    if (app.get_subcommand("generate")->parsed()) {
      if (seed_given) gen.seed = seed;
      if (!out_dir.empty()) gen.out = out_dir;
      return cmd_generate(gen);
    }
    if (app.get_subcommand("simulate")->parsed()) return cmd_simulate(merged);
    if (app.get_subcommand("sweep")->parsed())
      return cmd_sweep(merged, timeouts, spin_counts, sample_periods);
    if (app.get_subcommand("analyze")->parsed())
      return cmd_analyze(segments_path, threshold, merged.values.count("out")
                                                       ? fs::path(merged.values["out"])
                                                       : fs::path("."));
    return 2;
  } catch (const ConfigError& e) {
    slog::error(e.what());
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const SimError& e) {
    std::cerr << "simulation error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

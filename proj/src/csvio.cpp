// SPDX-License-Identifier: Apache-2.0
#include "slackdown/csvio.hpp"

#include <fstream>
#include <sstream>

#include "slackdown/errors.hpp"

namespace slackdown {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  return out;
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

SleepState sleep_from_string(const std::string& s, int row) {
  if (s == "active") return SleepState::Active;
  if (s == "entering_sleep") return SleepState::EnteringSleep;
  if (s == "sleeping") return SleepState::Sleeping;
  if (s == "waking") return SleepState::Waking;
  throw ConfigError("segments csv row " + std::to_string(row) + ": bad sleep state \"" + s +
                    "\"");
}

Rat rat_field(const std::string& s, int row, const char* col) {
  const auto r = Rat::parse(s);
  if (!r)
    throw ConfigError("segments csv row " + std::to_string(row) + ": bad " + col + " \"" + s +
                      "\"");
  return *r;
}

} // namespace

void write_segments_csv(const SimResult& result, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "rank,t0_us,t1_us,freq_ghz,duty,sleep,phase_index,phase_kind\n";
  for (std::size_t r = 0; r < result.segments.size(); ++r) {
    for (const auto& s : result.segments[r]) {
      out << r << ',' << s.t0_us.to_decimal() << ',' << s.t1_us.to_decimal() << ','
          << s.freq_ghz.to_decimal() << ',' << s.duty.to_decimal() << ','
          << to_string(s.sleep) << ',' << s.phase_index << ','
          << (s.phase_kind == PhaseKind::App ? "app" : "mpi") << '\n';
    }
  }
  if (!out) throw ConfigError("write failed: " + path.string());
}

SimResult read_segments_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open segments csv: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("segments csv row 1: missing header");
  if (split_csv_row(line) !=
      std::vector<std::string>{"rank", "t0_us", "t1_us", "freq_ghz", "duty", "sleep",
                               "phase_index", "phase_kind"})
    throw ConfigError("segments csv row 1: unexpected header");

  SimResult res;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv_row(line);
    if (f.size() != 8)
      throw ConfigError("segments csv row " + std::to_string(row) + ": expected 8 columns, got " +
                        std::to_string(f.size()));
    int rank = 0;
    try {
      rank = std::stoi(f[0]);
    } catch (const std::exception&) {
      throw ConfigError("segments csv row " + std::to_string(row) + ": bad rank \"" + f[0] +
                        "\"");
    }
    if (rank < 0)
      throw ConfigError("segments csv row " + std::to_string(row) + ": negative rank");
    Segment s;
    s.t0_us = rat_field(f[1], row, "t0_us");
    s.t1_us = rat_field(f[2], row, "t1_us");
    s.freq_ghz = rat_field(f[3], row, "freq_ghz");
    s.duty = rat_field(f[4], row, "duty");
    s.sleep = sleep_from_string(f[5], row);
    try {
      s.phase_index = std::stoi(f[6]);
    } catch (const std::exception&) {
      throw ConfigError("segments csv row " + std::to_string(row) + ": bad phase_index");
    }
    if (f[7] == "app") {
      s.phase_kind = PhaseKind::App;
    } else if (f[7] == "mpi") {
      s.phase_kind = PhaseKind::Mpi;
    } else {
      throw ConfigError("segments csv row " + std::to_string(row) + ": bad phase_kind \"" +
                        f[7] + "\"");
    }
    if (static_cast<std::size_t>(rank) >= res.segments.size())
      res.segments.resize(static_cast<std::size_t>(rank) + 1);
    res.segments[static_cast<std::size_t>(rank)].push_back(s);
  }
  res.rank_end_us.assign(res.segments.size(), Rat(0));
  res.executed_cycles.assign(res.segments.size(), 0);
  res.tts_us = Rat(0);
  for (std::size_t r = 0; r < res.segments.size(); ++r) {
    if (!res.segments[r].empty()) res.rank_end_us[r] = res.segments[r].back().t1_us;
    if (res.rank_end_us[r] > res.tts_us) res.tts_us = res.rank_end_us[r];
  }
  return res;
}

std::string report_csv_header() {
  return "policy,timeout_us,tts_us,overhead_pct,energy_j,energy_saving_pct,"
         "power_saving_pct,avg_freq_ghz,avg_load_pct";
}

std::string report_csv_row(const ReportRow& row) {
  std::ostringstream os;
  os << row.policy << ',' << row.timeout_us.to_decimal() << ','
     << row.rep.candidate.tts_us.to_decimal() << ',' << row.rep.overhead_pct.to_fixed(2) << ','
     << row.rep.candidate.energy_j.to_decimal() << ','
     << row.rep.energy_saving_pct.to_fixed(2) << ',' << row.rep.power_saving_pct.to_fixed(2)
     << ',' << row.rep.candidate.avg_freq_ghz.to_fixed(3) << ','
     << row.rep.candidate.avg_load_pct.to_fixed(2);
  return os.str();
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << report_csv_header() << '\n';
  for (const auto& row : rows) out << report_csv_row(row) << '\n';
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_sweep_csv(const std::string& param, const std::vector<Rat>& values,
                     const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
  if (values.size() != rows.size()) throw SimError("sweep csv: value/row count mismatch");
  auto out = open_out(path);
  out << "param,value," << report_csv_header() << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << param << ',' << values[i].to_decimal() << ',' << report_csv_row(rows[i]) << '\n';
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_quadrant_csv(const QuadrantReport& rep, const std::filesystem::path& path) {
  static const char* names[4] = {"I", "II", "III", "IV"};
  auto out = open_out(path);
  out << "rank,region,count,time_share_pct,mean_app_freq_ghz,mean_mpi_freq_ghz\n";
  for (std::size_t r = 0; r < rep.per_rank.size(); ++r) {
    Rat total_time(0);
    for (const auto& st : rep.per_rank[r]) total_time += st.time_us;
    for (std::size_t reg = 0; reg < 4; ++reg) {
      const auto& st = rep.per_rank[r][reg];
      const Rat share =
          total_time.is_zero() ? Rat(0) : st.time_us / total_time * Rat(100);
      out << r << ',' << names[reg] << ',' << st.count << ',' << share.to_fixed(2) << ','
          << st.mean_app_freq_ghz().to_fixed(3) << ',' << st.mean_mpi_freq_ghz().to_fixed(3)
          << '\n';
    }
  }
  if (!out) throw ConfigError("write failed: " + path.string());
}

void write_duration_csv(const std::vector<RankDurationShare>& shares,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "rank,app_long_pct,app_short_pct,mpi_long_pct,mpi_short_pct\n";
  for (std::size_t r = 0; r < shares.size(); ++r) {
    const auto& s = shares[r];
    out << r << ',' << s.app_long_pct.to_fixed(2) << ',' << s.app_short_pct.to_fixed(2) << ','
        << s.mpi_long_pct.to_fixed(2) << ',' << s.mpi_short_pct.to_fixed(2) << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path.string());
}

} // namespace slackdown

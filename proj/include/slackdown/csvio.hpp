// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slackdown/engine.hpp"
#include "slackdown/metrics.hpp"

namespace slackdown {

/// Segments CSV: rank,t0_us,t1_us,freq_ghz,duty,sleep,phase_index,phase_kind.
/// Times and levels print as exact decimals (up to 12 fractional digits).
void write_segments_csv(const SimResult& result, const std::filesystem::path& path);

/// Reads a segments CSV back into a bare SimResult (segments, rank ends,
/// TTS). Throws ConfigError with the offending row number on malformed input.
SimResult read_segments_csv(const std::filesystem::path& path);

/// One comparison row:
/// policy,timeout_us,tts_us,overhead_pct,energy_j,energy_saving_pct,
/// power_saving_pct,avg_freq_ghz,avg_load_pct
struct ReportRow {
  std::string policy;
  Rat timeout_us;
  ComparisonReport rep;
};

std::string report_csv_header();
std::string report_csv_row(const ReportRow& row);
void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);

/// Sweep CSV prefixes each report row with the swept parameter:
/// param,value,<report columns>
void write_sweep_csv(const std::string& param, const std::vector<Rat>& values,
                     const std::vector<ReportRow>& rows, const std::filesystem::path& path);

/// Quadrant CSV: rank,region,count,time_share_pct,mean_app_freq_ghz,mean_mpi_freq_ghz
void write_quadrant_csv(const QuadrantReport& rep, const std::filesystem::path& path);

/// Duration split CSV: rank,app_long_pct,app_short_pct,mpi_long_pct,mpi_short_pct
void write_duration_csv(const std::vector<RankDurationShare>& shares,
                        const std::filesystem::path& path);

} // namespace slackdown

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slackdown/rational.hpp"

namespace slackdown {

enum class PhaseKind { App, Mpi };

/// One unit of a rank's timeline. App phases are pure CPU work measured in
/// cycles; their wall-clock duration emerges from the effective core speed at
/// simulation time. Mpi phases carry an optional CPU-work portion (cycles)
/// followed by a wait: either a collective synchronization (sync_id) or a
/// fixed extra_wait_us, never both.
struct Phase {
  PhaseKind kind = PhaseKind::App;
  std::uint64_t cycles = 0;
  std::optional<std::string> sync_id;  // Mpi only
  Rat extra_wait_us;                   // Mpi only
  std::optional<std::string> call_name; // Mpi only, informational

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct RankTrace {
  int rank_id = 0;
  std::vector<Phase> phases;

  friend bool operator==(const RankTrace&, const RankTrace&) = default;
};

struct Workload {
  std::vector<RankTrace> ranks;
  std::map<std::string, std::string> meta;

  friend bool operator==(const Workload&, const Workload&) = default;
};

/// One invariant violation; rank/phase are -1 for workload-level problems.
struct Violation {
  int rank = -1;
  int phase = -1;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

/// Collects every invariant violation. An empty report means the workload is
/// well-formed and its sync structure is deadlock-free.
ValidationReport validate(const Workload& w);

Workload load_workload(const std::filesystem::path& path);
void save_workload(const Workload& w, const std::filesystem::path& path);

/// Canonical serialization (sorted keys, no whitespace). save_workload writes
/// an indented variant of the same document.
std::string workload_to_json(const Workload& w, bool pretty = false);
Workload workload_from_json(const std::string& text);

/// FNV-1a over the canonical serialization; used to pair baseline and
/// candidate runs of the same workload.
std::uint64_t workload_hash(const Workload& w);

struct BalancedParams {
  int n_ranks = 2;
  int n_iters = 1;
  Rat app_us = 200;
  Rat mpi_us = 50;
  Rat mpi_work_fraction = 1; // in [0,1]
  Rat jitter_pct = 0;
  std::uint64_t seed = 0;
  Rat ref_freq_ghz = Rat(12, 5); // 2.4
};

/// Fine-grained balanced pattern: every iteration is an App phase followed by
/// an all-ranks sync Mpi phase whose work portion is mpi_work_fraction of the
/// nominal Mpi duration. App cycle counts are perturbed by a seeded uniform
/// +/- jitter_pct.
Workload gen_balanced(const BalancedParams& p);

struct UnbalancedParams {
  int n_ranks = 2;
  int n_iters = 1;
  int diag_rank = 0;
  Rat diag_app_us = 3000;
  Rat other_app_us = 1000;
  std::uint64_t seed = 0;
  Rat ref_freq_ghz = Rat(12, 5);
};

/// One rank works long per iteration while the others work short and then
/// wait on an all-ranks sync with no work cycles.
Workload gen_unbalanced(const UnbalancedParams& p);

} // namespace slackdown

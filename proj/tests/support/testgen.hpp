// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <vector>

#include "slackdown/policy.hpp"
#include "slackdown/trace.hpp"

namespace slackdown::testing {

/// Random deadlock-free workload: sync ids are created in a global round
/// order and each participating rank appends them in that order, so every
/// per-rank sync sequence is a subsequence of one global order.
inline Workload make_random_workload(std::mt19937_64& rng, int max_ranks = 8,
                                     int max_phases_per_rank = 200) {
  const int n_ranks = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_ranks - 1));
  Workload w;
  w.ranks.resize(static_cast<std::size_t>(n_ranks));
  for (int r = 0; r < n_ranks; ++r) w.ranks[static_cast<std::size_t>(r)].rank_id = r;

  int round = 0;
  auto phases_left = [&](int r) {
    return max_phases_per_rank -
           static_cast<int>(w.ranks[static_cast<std::size_t>(r)].phases.size());
  };
  bool room = true;
  while (room && static_cast<int>(rng() % 100) < 90) {
    const int kind = static_cast<int>(rng() % 10);
    if (kind < 4) { // app burst on every rank, uneven lengths
      for (int r = 0; r < n_ranks; ++r) {
        if (phases_left(r) < 1) continue;
        Phase p;
        p.kind = PhaseKind::App;
        p.cycles = 1 + rng() % 1200000; // up to ~500us at 2.4GHz
        w.ranks[static_cast<std::size_t>(r)].phases.push_back(p);
      }
    } else if (kind < 7) { // collective sync over a random subset
      std::vector<int> members;
      for (int r = 0; r < n_ranks; ++r)
        if (rng() % 3 != 0 && phases_left(r) >= 1) members.push_back(r);
      if (members.size() < 2) continue;
      const std::string id = "r" + std::to_string(round++);
      for (const int r : members) {
        Phase p;
        p.kind = PhaseKind::Mpi;
        p.cycles = rng() % 3 == 0 ? rng() % 200000 : 0;
        p.sync_id = id;
        w.ranks[static_cast<std::size_t>(r)].phases.push_back(p);
      }
    } else if (kind < 9) { // fixed waits, possibly with a work portion
      for (int r = 0; r < n_ranks; ++r) {
        if (rng() % 2 != 0 || phases_left(r) < 1) continue;
        Phase p;
        p.kind = PhaseKind::Mpi;
        p.cycles = rng() % 100000;
        p.extra_wait_us = Rat(static_cast<std::int64_t>(rng() % 2000000), 1000);
        w.ranks[static_cast<std::size_t>(r)].phases.push_back(p);
      }
    } else { // degenerate instant phases
      const int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n_ranks));
      if (phases_left(r) >= 1) {
        Phase p;
        p.kind = PhaseKind::Mpi;
        p.cycles = 0;
        w.ranks[static_cast<std::size_t>(r)].phases.push_back(p);
      }
    }
    room = false;
    for (int r = 0; r < n_ranks; ++r)
      if (phases_left(r) > 2) room = true;
  }
  // Guarantee at least one phase somewhere.
  if (w.ranks[0].phases.empty()) {
    Phase p;
    p.kind = PhaseKind::App;
    p.cycles = 240000;
    w.ranks[0].phases.push_back(p);
  }
  w.meta["generator"] = "test-random";
  return w;
}

/// One spec per policy kind, parameterized for short randomized traces.
inline std::vector<PolicySpec> all_policy_specs() {
  std::vector<PolicySpec> specs;
  for (const PolicyKind kind :
       {PolicyKind::BusyWait, PolicyKind::WaitMode, PolicyKind::SpinWait,
        PolicyKind::NaiveDvfs, PolicyKind::NaiveThrottle, PolicyKind::CountdownDvfs,
        PolicyKind::CountdownThrottle}) {
    PolicySpec s;
    s.kind = kind;
    s.timeout_us = 300;
    s.spin_count = 2000; // 100us at the default 0.05us per iteration
    specs.push_back(s);
  }
  return specs;
}

} // namespace slackdown::testing

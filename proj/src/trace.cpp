// SPDX-License-Identifier: Apache-2.0
#include "slackdown/trace.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "slackdown/errors.hpp"

namespace slackdown {

using nlohmann::json;

namespace {

std::string phase_path(std::size_t rank, std::size_t phase, const char* field = nullptr) {
  std::ostringstream os;
  os << "ranks[" << rank << "][" << phase << "]";
  if (field != nullptr) os << "." << field;
  return os.str();
}

// Microseconds are carried with at most 3 fractional digits; anything finer
// is a producer error.
Rat micros_from_json_number(double v, const std::string& where) {
  if (!(v >= 0) || !std::isfinite(v))
    throw ConfigError(where + ": microseconds must be a finite non-negative number");
  const double scaled = v * 1000.0;
  const double rounded = std::nearbyint(scaled);
  if (std::fabs(scaled - rounded) > 1e-6)
    throw ConfigError(where + ": more than 3 fractional digits in microseconds value");
  return Rat(static_cast<std::int64_t>(rounded), 1000);
}

json phase_to_json(const Phase& p) {
  json j;
  j["kind"] = (p.kind == PhaseKind::App) ? "app" : "mpi";
  j["cycles"] = p.cycles;
  if (p.sync_id) j["sync"] = *p.sync_id;
  if (!p.extra_wait_us.is_zero()) j["extra_wait_us"] = p.extra_wait_us.to_double();
  if (p.call_name) j["call"] = *p.call_name;
  return j;
}

Phase phase_from_json(const json& j, std::size_t rank, std::size_t phase) {
  if (!j.is_object()) throw ConfigError(phase_path(rank, phase) + ": phase must be an object");
  static const std::set<std::string> known = {"kind", "cycles", "sync", "extra_wait_us", "call"};
  for (const auto& [key, _] : j.items()) {
    if (known.find(key) == known.end())
      throw ConfigError(phase_path(rank, phase) + ": unknown key \"" + key + "\"");
  }

  Phase p;
  const auto kind_it = j.find("kind");
  if (kind_it == j.end() || !kind_it->is_string())
    throw ConfigError(phase_path(rank, phase, "kind") + ": required string \"app\" or \"mpi\"");
  const std::string kind = kind_it->get<std::string>();
  if (kind == "app") {
    p.kind = PhaseKind::App;
  } else if (kind == "mpi") {
    p.kind = PhaseKind::Mpi;
  } else {
    throw ConfigError(phase_path(rank, phase, "kind") + ": must be \"app\" or \"mpi\"");
  }

  const auto cyc_it = j.find("cycles");
  if (cyc_it == j.end() || !cyc_it->is_number_integer() || cyc_it->is_number_float())
    throw ConfigError(phase_path(rank, phase, "cycles") + ": required exact integer");
  if (cyc_it->is_number_integer() && !cyc_it->is_number_unsigned() &&
      cyc_it->get<std::int64_t>() < 0)
    throw ConfigError(phase_path(rank, phase, "cycles") + ": must be non-negative");
  p.cycles = cyc_it->get<std::uint64_t>();

  if (const auto it = j.find("sync"); it != j.end()) {
    if (!it->is_string())
      throw ConfigError(phase_path(rank, phase, "sync") + ": must be a string");
    if (p.kind == PhaseKind::App)
      throw ConfigError(phase_path(rank, phase, "sync") + ": app phases cannot carry a sync id");
    p.sync_id = it->get<std::string>();
  }
  if (const auto it = j.find("extra_wait_us"); it != j.end()) {
    if (!it->is_number())
      throw ConfigError(phase_path(rank, phase, "extra_wait_us") + ": must be a number");
    if (p.kind == PhaseKind::App)
      throw ConfigError(phase_path(rank, phase, "extra_wait_us") +
                        ": app phases cannot carry a wait");
    p.extra_wait_us = micros_from_json_number(it->get<double>(),
                                              phase_path(rank, phase, "extra_wait_us"));
  }
  if (const auto it = j.find("call"); it != j.end()) {
    if (!it->is_string())
      throw ConfigError(phase_path(rank, phase, "call") + ": must be a string");
    if (p.kind == PhaseKind::App)
      throw ConfigError(phase_path(rank, phase, "call") + ": app phases cannot carry a call name");
    p.call_name = it->get<std::string>();
  }
  return p;
}

} // namespace

std::string workload_to_json(const Workload& w, bool pretty) {
  json root;
  root["meta"] = json::object();
  for (const auto& [k, v] : w.meta) root["meta"][k] = v;
  json ranks = json::array();
  for (const auto& r : w.ranks) {
    json phases = json::array();
    for (const auto& p : r.phases) phases.push_back(phase_to_json(p));
    ranks.push_back(std::move(phases));
  }
  root["ranks"] = std::move(ranks);
  return pretty ? root.dump(2) : root.dump();
}

Workload workload_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("top level must be an object");
  for (const auto& [key, _] : root.items()) {
    if (key != "meta" && key != "ranks")
      throw ConfigError("unknown top-level key \"" + key + "\"");
  }

  Workload w;
  if (const auto it = root.find("meta"); it != root.end()) {
    if (!it->is_object()) throw ConfigError("meta: must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) throw ConfigError("meta." + k + ": values must be strings");
      w.meta[k] = v.get<std::string>();
    }
  }
  const auto ranks_it = root.find("ranks");
  if (ranks_it == root.end() || !ranks_it->is_array())
    throw ConfigError("ranks: required array of per-rank phase arrays");
  if (ranks_it->empty()) throw ConfigError("workload has no ranks");

  std::size_t rank_idx = 0;
  for (const auto& rj : *ranks_it) {
    if (!rj.is_array())
      throw ConfigError("ranks[" + std::to_string(rank_idx) + "]: must be an array of phases");
    RankTrace rt;
    rt.rank_id = static_cast<int>(rank_idx);
    std::size_t phase_idx = 0;
    for (const auto& pj : rj) {
      rt.phases.push_back(phase_from_json(pj, rank_idx, phase_idx));
      ++phase_idx;
    }
    w.ranks.push_back(std::move(rt));
    ++rank_idx;
  }
  return w;
}

Workload load_workload(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open workload file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return workload_from_json(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_workload(const Workload& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write workload file: " + path.string());
  out << workload_to_json(w, /*pretty=*/true) << "\n";
  if (!out) throw ConfigError("write failed: " + path.string());
}

std::uint64_t workload_hash(const Workload& w) {
  const std::string s = workload_to_json(w, /*pretty=*/false);
  std::uint64_t h = 1469598103934665603ull; // FNV-1a 64
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

ValidationReport validate(const Workload& w) {
  ValidationReport rep;
  if (w.ranks.empty()) {
    rep.push_back({-1, -1, "workload has no ranks"});
    return rep;
  }

  // sync_id -> list of (rank, phase)
  std::unordered_map<std::string, std::vector<std::pair<int, int>>> groups;

  for (std::size_t r = 0; r < w.ranks.size(); ++r) {
    const auto& rt = w.ranks[r];
    if (rt.rank_id != static_cast<int>(r))
      rep.push_back({static_cast<int>(r), -1,
                     "rank_id " + std::to_string(rt.rank_id) + " does not match position " +
                         std::to_string(r)});
    std::set<std::string> seen;
    for (std::size_t p = 0; p < rt.phases.size(); ++p) {
      const auto& ph = rt.phases[p];
      const int ri = static_cast<int>(r), pi = static_cast<int>(p);
      if (ph.kind == PhaseKind::App) {
        if (ph.sync_id) rep.push_back({ri, pi, "app phase carries a sync id"});
        if (!ph.extra_wait_us.is_zero()) rep.push_back({ri, pi, "app phase carries a wait"});
        if (ph.call_name) rep.push_back({ri, pi, "app phase carries a call name"});
        continue;
      }
      if (ph.extra_wait_us < Rat(0))
        rep.push_back({ri, pi, "negative extra_wait_us"});
      if (ph.sync_id) {
        if (!ph.extra_wait_us.is_zero())
          rep.push_back({ri, pi, "mpi phase has both a sync id and extra_wait_us"});
        if (!seen.insert(*ph.sync_id).second)
          rep.push_back({ri, pi, "sync id \"" + *ph.sync_id + "\" used more than once in rank"});
        groups[*ph.sync_id].emplace_back(ri, pi);
      }
    }
  }

  for (const auto& [id, members] : groups) {
    if (members.size() < 2)
      rep.push_back({members.front().first, members.front().second,
                     "sync group \"" + id + "\" size < 2"});
  }

  // Deadlock freedom: the union of per-rank sync orders must admit a global
  // schedule. Edges between consecutive syncs of each rank; a cycle in the
  // union graph means no such schedule exists.
  std::unordered_map<std::string, std::set<std::string>> succ;
  std::unordered_map<std::string, int> indeg;
  for (const auto& [id, _] : groups) indeg[id] = 0;
  for (const auto& rt : w.ranks) {
    const std::string* prev = nullptr;
    for (const auto& ph : rt.phases) {
      if (ph.kind != PhaseKind::Mpi || !ph.sync_id) continue;
      if (prev != nullptr && *prev != *ph.sync_id) {
        if (succ[*prev].insert(*ph.sync_id).second) indeg[*ph.sync_id]++;
      }
      prev = &*ph.sync_id;
    }
  }
  std::deque<std::string> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.push_back(id);
  std::size_t done = 0;
  while (!ready.empty()) {
    const std::string id = ready.front();
    ready.pop_front();
    ++done;
    for (const auto& nxt : succ[id])
      if (--indeg[nxt] == 0) ready.push_back(nxt);
  }
  if (done < indeg.size()) {
    std::vector<std::string> stuck;
    for (const auto& [id, d] : indeg)
      if (d > 0) stuck.push_back(id);
    std::sort(stuck.begin(), stuck.end());
    std::string msg = "cyclic sync dependency among:";
    for (const auto& s : stuck) msg += " \"" + s + "\"";
    rep.push_back({-1, -1, msg});
  }

  std::sort(rep.begin(), rep.end(), [](const Violation& a, const Violation& b) {
    return std::tie(a.rank, a.phase, a.message) < std::tie(b.rank, b.phase, b.message);
  });
  return rep;
}

namespace {

// 53-bit uniform in [0,1) from a standardized mt19937_64 draw, so generated
// workloads are identical across platforms and standard libraries.
Rat uniform01(std::mt19937_64& rng) {
  const std::uint64_t bits = rng() >> 11;
  return Rat(static_cast<std::int64_t>(bits), static_cast<std::int64_t>(1) << 53);
}

std::uint64_t cycles_for(const Rat& us, const Rat& ref_freq_ghz) {
  const Rat c = us * ref_freq_ghz * Rat(1000);
  const std::int64_t v = c.round_nearest();
  if (v < 0) throw ConfigError("negative cycle count");
  return static_cast<std::uint64_t>(v);
}

} // namespace

Workload gen_balanced(const BalancedParams& p) {
  if (p.n_ranks < 2) throw ConfigError("gen_balanced: need at least 2 ranks for sync phases");
  if (p.n_iters < 1) throw ConfigError("gen_balanced: n_iters must be >= 1");
  if (!(p.app_us > Rat(0))) throw ConfigError("gen_balanced: app_us must be > 0");
  if (p.mpi_us < Rat(0)) throw ConfigError("gen_balanced: mpi_us must be >= 0");
  if (p.mpi_work_fraction < Rat(0) || p.mpi_work_fraction > Rat(1))
    throw ConfigError("gen_balanced: mpi_work_fraction must be in [0,1]");
  if (p.jitter_pct < Rat(0) || p.jitter_pct > Rat(100))
    throw ConfigError("gen_balanced: jitter_pct must be in [0,100]");
  if (!(p.ref_freq_ghz > Rat(0))) throw ConfigError("gen_balanced: ref_freq_ghz must be > 0");

  const std::uint64_t mpi_cycles = cycles_for(p.mpi_work_fraction * p.mpi_us, p.ref_freq_ghz);
  const Rat app_base = p.app_us * p.ref_freq_ghz * Rat(1000);

  std::mt19937_64 rng(p.seed);
  const bool jitter = !p.jitter_pct.is_zero();

  Workload w;
  w.ranks.resize(static_cast<std::size_t>(p.n_ranks));
  for (int r = 0; r < p.n_ranks; ++r) {
    auto& rt = w.ranks[static_cast<std::size_t>(r)];
    rt.rank_id = r;
    rt.phases.reserve(static_cast<std::size_t>(p.n_iters) * 2);
  }
  for (int r = 0; r < p.n_ranks; ++r) {
    auto& rt = w.ranks[static_cast<std::size_t>(r)];
    for (int i = 0; i < p.n_iters; ++i) {
      std::int64_t cycles = app_base.round_nearest();
      if (jitter) {
        const Rat u = uniform01(rng);
        const Rat factor = Rat(1) + p.jitter_pct * (Rat(2) * u - Rat(1)) / Rat(100);
        cycles = Rat::mul_round_nearest(app_base, factor);
      }
      Phase app;
      app.kind = PhaseKind::App;
      app.cycles = static_cast<std::uint64_t>(cycles);
      rt.phases.push_back(app);

      Phase mpi;
      mpi.kind = PhaseKind::Mpi;
      mpi.cycles = mpi_cycles;
      mpi.sync_id = "it" + std::to_string(i);
      mpi.call_name = "Allreduce";
      rt.phases.push_back(mpi);
    }
  }

  w.meta["generator"] = "balanced";
  w.meta["n_ranks"] = std::to_string(p.n_ranks);
  w.meta["n_iters"] = std::to_string(p.n_iters);
  w.meta["app_us"] = p.app_us.to_decimal();
  w.meta["mpi_us"] = p.mpi_us.to_decimal();
  w.meta["mpi_work_fraction"] = p.mpi_work_fraction.to_decimal();
  w.meta["jitter_pct"] = p.jitter_pct.to_decimal();
  w.meta["ref_freq_ghz"] = p.ref_freq_ghz.to_decimal();
  // An inert seed would break byte-identity of jitter-free outputs.
  if (jitter) w.meta["seed"] = std::to_string(p.seed);
  return w;
}

Workload gen_unbalanced(const UnbalancedParams& p) {
  if (p.n_ranks < 2) throw ConfigError("gen_unbalanced: need at least 2 ranks for sync phases");
  if (p.n_iters < 1) throw ConfigError("gen_unbalanced: n_iters must be >= 1");
  if (p.diag_rank < 0 || p.diag_rank >= p.n_ranks)
    throw ConfigError("gen_unbalanced: diag_rank out of range");
  if (!(p.other_app_us > Rat(0)))
    throw ConfigError("gen_unbalanced: other_app_us must be > 0");
  if (p.diag_app_us < p.other_app_us)
    throw ConfigError("gen_unbalanced: diag_app_us must be >= other_app_us");
  if (!(p.ref_freq_ghz > Rat(0))) throw ConfigError("gen_unbalanced: ref_freq_ghz must be > 0");

  const std::uint64_t diag_cycles = cycles_for(p.diag_app_us, p.ref_freq_ghz);
  const std::uint64_t other_cycles = cycles_for(p.other_app_us, p.ref_freq_ghz);

  Workload w;
  w.ranks.resize(static_cast<std::size_t>(p.n_ranks));
  for (int r = 0; r < p.n_ranks; ++r) {
    auto& rt = w.ranks[static_cast<std::size_t>(r)];
    rt.rank_id = r;
    for (int i = 0; i < p.n_iters; ++i) {
      Phase app;
      app.kind = PhaseKind::App;
      app.cycles = (r == p.diag_rank) ? diag_cycles : other_cycles;
      rt.phases.push_back(app);

      Phase mpi;
      mpi.kind = PhaseKind::Mpi;
      mpi.cycles = 0;
      mpi.sync_id = "it" + std::to_string(i);
      mpi.call_name = "Barrier";
      rt.phases.push_back(mpi);
    }
  }

  w.meta["generator"] = "unbalanced";
  w.meta["n_ranks"] = std::to_string(p.n_ranks);
  w.meta["n_iters"] = std::to_string(p.n_iters);
  w.meta["diag_rank"] = std::to_string(p.diag_rank);
  w.meta["diag_app_us"] = p.diag_app_us.to_decimal();
  w.meta["other_app_us"] = p.other_app_us.to_decimal();
  w.meta["ref_freq_ghz"] = p.ref_freq_ghz.to_decimal();
  return w;
}

} // namespace slackdown

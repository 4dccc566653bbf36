// SPDX-License-Identifier: Apache-2.0
#include "slackdown/engine.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "slackdown/errors.hpp"
#include "slackdown/log.hpp"

namespace slackdown {

void canonicalize_writes(std::vector<RegisterWrite>& writes) {
  std::stable_sort(writes.begin(), writes.end(),
                   [](const RegisterWrite& a, const RegisterWrite& b) {
                     if (a.t_us != b.t_us) return a.t_us < b.t_us;
                     if (a.rank != b.rank) return a.rank < b.rank;
                     if (a.reg != b.reg) return a.reg < b.reg;
                     if (a.turbo != b.turbo) return a.turbo < b.turbo;
                     return a.value < b.value;
                   });
}

namespace {

struct QEvent {
  Rat t;
  EventKind kind;
  std::uint64_t seq = 0;
  int rank = -1;
  int sync = -1;
  std::uint64_t gen = 0;
};

struct QEventLater {
  bool operator()(const QEvent& a, const QEvent& b) const {
    if (a.t != b.t) return b.t < a.t;
    if (a.kind != b.kind) return static_cast<int>(b.kind) < static_cast<int>(a.kind);
    return b.seq < a.seq;
  }
};

struct SyncRt {
  std::vector<int> members;
  std::size_t arrived = 0;
  bool released = false;
};

enum class Stage {
  AppWork,
  MpiProlog, // prologue cost window (event_cost_us > 0 only)
  MpiWork,
  MpiCallback, // timer-callback cost window interrupting MPI work
  MpiWait,
  Waking,
  MpiEpilog, // epilogue cost window
  Done,
};

struct RankRt {
  const RankTrace* trace = nullptr;
  int phase = 0;
  Stage stage = Stage::Done;
  // Work integration for the current work portion.
  std::uint64_t target_cycles = 0;
  Rat done_cycles;
  Rat integ_t; // time up to which done_cycles is accounted
  std::uint64_t work_gen = 0;
  // MPI bookkeeping.
  Rat enter_t;
  bool timer_armed = false;
  Rat timer_t;
  std::uint64_t timer_gen = 0;
  bool sleep_requested = false;
  Rat sleep_delay;
  std::uint64_t sleep_gen = 0;
  bool stashed_fire = false;
  Rat stash_t;
  std::uint64_t total_cycles = 0;
  Rat end_t;
  std::unique_ptr<Policy> policy;
};

// Observable per-core state for segment recording.
struct SegTracker {
  Rat t0;
  Rat freq;
  Rat duty;
  SleepState sleep = SleepState::Active;
  int phase = 0;
  PhaseKind kind = PhaseKind::App;
  bool closed = false; // rank finished; later controller activity is not recorded
};

class Engine {
public:
  Engine(const Workload& w, const PolicySpec& spec, const HwConfig& hw)
      : wl_(w), spec_(spec), cores_(static_cast<int>(w.ranks.size()), hw) {}

  SimResult run();

private:
  class Ctx;

  const Phase& cur_phase(const RankRt& r) const {
    return r.trace->phases[static_cast<std::size_t>(r.phase)];
  }
  bool in_mpi_phase(const RankRt& r) const {
    return r.stage == Stage::MpiProlog || r.stage == Stage::MpiWork ||
           r.stage == Stage::MpiCallback || r.stage == Stage::MpiWait ||
           r.stage == Stage::Waking || r.stage == Stage::MpiEpilog;
  }

  void push(QEvent ev) {
    ev.seq = next_seq_++;
    queue_.push(ev);
  }
  void schedule_sample(const Rat& t) {
    if (scheduled_samples_.insert(t).second)
      push({t, EventKind::SampleInstant});
  }

  void flush_stashed_fires();
  void handle_speed_changes(const std::vector<SpeedChange>& changes, const Rat& t);
  void reschedule_work(int rank, const Rat& t);
  void integrate_work(int rank, const Rat& t, const Rat& speed_until_t);
  void advance(int rank, const Rat& t);
  void begin_work(int rank, const Rat& t, std::uint64_t cycles);
  void work_done(int rank, const Rat& t);
  void begin_wait(int rank, const Rat& t);
  void release(int rank, const Rat& t);
  void mpi_exit(int rank, const Rat& t);
  void finish_phase(int rank, const Rat& t);
  void seg_update(int core, const Rat& t);
  void close_segments(int core, const Rat& t);
  void assert_state(bool cond, const char* what) const {
    if (!cond) throw SimError(std::string("engine state violation: ") + what);
  }

  const Workload& wl_;
  PolicySpec spec_;
  CoreSet cores_;
  std::vector<RankRt> ranks_;
  std::vector<SyncRt> syncs_;
  std::unordered_map<std::string, int> sync_index_;
  std::priority_queue<QEvent, std::vector<QEvent>, QEventLater> queue_;
  std::uint64_t next_seq_ = 0;
  std::set<Rat> scheduled_samples_;
  std::vector<int> stash_order_;
  std::vector<RegisterWrite> writes_;
  std::vector<SegTracker> seg_;
  std::vector<std::vector<Segment>> segments_;
  Rat now_;
};

// PolicyContext backed by the engine; `now` is pinned per callback so that
// deferred timer callbacks stamp their writes with the expiry time.
class Engine::Ctx final : public PolicyContext {
public:
  Ctx(Engine& e, int rank, Rat now) : e_(e), rank_(rank), now_(now) {}

  void write_freq_request(const FreqRequest& req) override {
    e_.cores_.write_freq_request(rank_, req, now_);
    e_.writes_.push_back({now_, rank_, RegKind::Freq, req.turbo,
                          req.turbo ? Rat(0) : req.level_ghz});
    e_.schedule_sample(e_.cores_.config().grid_after(now_));
  }
  void write_duty_request(const Rat& duty) override {
    e_.cores_.write_duty_request(rank_, duty, now_);
    e_.writes_.push_back({now_, rank_, RegKind::Duty, false, duty});
    e_.schedule_sample(e_.cores_.config().grid_after(now_));
  }
  void request_sleep_at_wait(const Rat& delay_us) override {
    auto& r = e_.ranks_[static_cast<std::size_t>(rank_)];
    r.sleep_requested = true;
    r.sleep_delay = delay_us;
  }
  void arm_timer(const Rat& delay_us) override {
    auto& r = e_.ranks_[static_cast<std::size_t>(rank_)];
    r.timer_gen++;
    r.timer_armed = true;
    r.timer_t = now_ + delay_us;
    e_.push({r.timer_t, EventKind::TimerFire, 0, rank_, -1, r.timer_gen});
  }
  void disarm_timer() override {
    auto& r = e_.ranks_[static_cast<std::size_t>(rank_)];
    r.timer_armed = false;
    r.timer_gen++;
  }
  Rat now_us() const override { return now_; }
  int rank() const override { return rank_; }

private:
  Engine& e_;
  int rank_;
  Rat now_;
};

void Engine::seg_update(int core, const Rat& t) {
  auto& s = seg_[static_cast<std::size_t>(core)];
  if (s.closed) return;
  const auto& r = ranks_[static_cast<std::size_t>(core)];
  SegTracker next;
  next.t0 = t;
  next.freq = cores_.effective_freq_ghz(core);
  next.duty = cores_.effective_duty(core);
  next.sleep = cores_.sleep_state(core);
  if (r.stage != Stage::Done && r.phase < static_cast<int>(r.trace->phases.size())) {
    next.phase = r.phase;
    next.kind = cur_phase(r).kind;
  } else {
    next.phase = s.phase;
    next.kind = s.kind;
  }
  if (next.freq == s.freq && next.duty == s.duty && next.sleep == s.sleep &&
      next.phase == s.phase && next.kind == s.kind)
    return;
  if (t > s.t0)
    segments_[static_cast<std::size_t>(core)].push_back(
        {s.t0, t, s.freq, s.duty, s.sleep, s.phase, s.kind});
  s = next;
}

void Engine::close_segments(int core, const Rat& t) {
  auto& s = seg_[static_cast<std::size_t>(core)];
  if (s.closed) return;
  if (t > s.t0)
    segments_[static_cast<std::size_t>(core)].push_back(
        {s.t0, t, s.freq, s.duty, s.sleep, s.phase, s.kind});
  s.closed = true;
}

void Engine::integrate_work(int rank, const Rat& t, const Rat& speed_until_t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  if (t > r.integ_t) {
    r.done_cycles += speed_until_t * (t - r.integ_t);
    r.integ_t = t;
  }
}

void Engine::reschedule_work(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  r.work_gen++;
  const Rat speed = cores_.effective_speed(rank);
  assert_state(speed > Rat(0), "work scheduled on a core with zero speed");
  const Rat remaining = Rat(static_cast<std::int64_t>(r.target_cycles)) - r.done_cycles;
  if (!(remaining > Rat(0))) {
    // Quantized overshoot from an earlier completion estimate; finish now.
    push({t, EventKind::PhaseWorkDone, 0, rank, -1, r.work_gen});
    return;
  }
  // Completion instants snap up to the nanosecond grid; the phase's cycle
  // count is credited exactly at completion regardless.
  const Rat t_done = (t + remaining / speed).ceil_nanos();
  push({t_done, EventKind::PhaseWorkDone, 0, rank, -1, r.work_gen});
}

void Engine::handle_speed_changes(const std::vector<SpeedChange>& changes, const Rat& t) {
  for (const auto& ch : changes) {
    auto& r = ranks_[static_cast<std::size_t>(ch.core)];
    if (r.stage == Stage::AppWork || r.stage == Stage::MpiWork) {
      integrate_work(ch.core, t, ch.old_speed);
      reschedule_work(ch.core, t);
    }
    seg_update(ch.core, t);
  }
}

void Engine::begin_work(int rank, const Rat& t, std::uint64_t cycles) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  r.target_cycles = cycles;
  r.done_cycles = Rat(0);
  r.integ_t = t;
  reschedule_work(rank, t);
}

void Engine::advance(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  while (true) {
    if (r.phase >= static_cast<int>(r.trace->phases.size())) {
      r.stage = Stage::Done;
      r.end_t = t;
      close_segments(rank, t);
      return;
    }
    const Phase& p = cur_phase(r);
    if (p.kind == PhaseKind::App) {
      if (p.cycles == 0) {
        r.phase++;
        continue;
      }
      r.stage = Stage::AppWork;
      seg_update(rank, t);
      begin_work(rank, t, p.cycles);
      return;
    }
    // MPI phase: prologue, work portion, then wait.
    r.enter_t = t;
    r.sleep_requested = false;
    r.stage = Stage::MpiWork; // provisional; callbacks may ask for sleep
    seg_update(rank, t);
    {
      Ctx ctx(*this, rank, t);
      r.policy->on_mpi_enter(ctx);
    }
    if (spec_.event_cost_us > Rat(0)) {
      r.stage = Stage::MpiProlog;
      r.work_gen++;
      push({t + spec_.event_cost_us, EventKind::PauseDone, 0, rank, -1, r.work_gen});
      return;
    }
    if (p.cycles > 0) {
      r.stage = Stage::MpiWork;
      begin_work(rank, t, p.cycles);
      return;
    }
    begin_wait(rank, t);
    return;
  }
}

void Engine::work_done(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  integrate_work(rank, t, cores_.effective_speed(rank));
  assert_state(r.done_cycles >= Rat(static_cast<std::int64_t>(r.target_cycles)),
               "work completion fired before the cycles were executed");
  r.total_cycles += r.target_cycles;
  if (r.stage == Stage::AppWork) {
    r.phase++;
    advance(rank, t);
    return;
  }
  assert_state(r.stage == Stage::MpiWork, "work completion outside a work stage");
  begin_wait(rank, t);
}

void Engine::begin_wait(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  const Phase& p = cur_phase(r);
  r.stage = Stage::MpiWait;
  if (p.sync_id) {
    const int si = sync_index_.at(*p.sync_id);
    auto& g = syncs_[static_cast<std::size_t>(si)];
    g.arrived++;
    if (g.arrived == g.members.size()) {
      // This rank is the last arrival, so the release time is now.
      push({t, EventKind::SyncRelease, 0, -1, si});
    }
    if (r.sleep_requested) {
      r.sleep_gen++;
      push({t + r.sleep_delay, EventKind::SleepEntered, 0, rank, -1, r.sleep_gen});
    }
    return;
  }
  if (!p.extra_wait_us.is_zero()) {
    push({t + p.extra_wait_us, EventKind::WaitEnd, 0, rank});
    if (r.sleep_requested && r.sleep_delay < p.extra_wait_us) {
      r.sleep_gen++;
      push({t + r.sleep_delay, EventKind::SleepEntered, 0, rank, -1, r.sleep_gen});
    }
    return;
  }
  // No sync and no wait: the phase completes instantly.
  mpi_exit(rank, t);
}

void Engine::release(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  assert_state(r.stage == Stage::MpiWait, "release outside a wait");
  r.sleep_gen++; // cancel any scheduled sleep trigger or entry completion
  const SleepState ss = cores_.sleep_state(rank);
  if (ss == SleepState::Sleeping || ss == SleepState::EnteringSleep) {
    handle_speed_changes(cores_.wake(rank, t), t);
    seg_update(rank, t);
    r.stage = Stage::Waking;
    push({t + cores_.config().cstate_wake_us, EventKind::WakeDone, 0, rank});
    return;
  }
  mpi_exit(rank, t);
}

void Engine::mpi_exit(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  // A timer expiring exactly at the exit instant does not count as fired.
  r.stashed_fire = false;
  r.sleep_requested = false;
  {
    Ctx ctx(*this, rank, t);
    r.policy->on_mpi_exit(ctx);
  }
  r.timer_armed = false;
  r.timer_gen++;
  if (spec_.event_cost_us > Rat(0)) {
    r.stage = Stage::MpiEpilog;
    r.work_gen++;
    push({t + spec_.event_cost_us, EventKind::PauseDone, 0, rank, -1, r.work_gen});
    return;
  }
  finish_phase(rank, t);
}

void Engine::finish_phase(int rank, const Rat& t) {
  auto& r = ranks_[static_cast<std::size_t>(rank)];
  r.phase++;
  advance(rank, t);
}

void Engine::flush_stashed_fires() {
  if (stash_order_.empty()) return;
  for (const int rank : stash_order_) {
    auto& r = ranks_[static_cast<std::size_t>(rank)];
    if (!r.stashed_fire) continue;
    r.stashed_fire = false;
    const Rat fire_t = r.stash_t;
    {
      Ctx ctx(*this, rank, fire_t);
      r.policy->on_timer(ctx);
    }
    if (spec_.event_cost_us > Rat(0) && r.stage == Stage::MpiWork) {
      // Callback interrupts the work portion for its fixed cost.
      integrate_work(rank, fire_t, cores_.effective_speed(rank));
      r.stage = Stage::MpiCallback;
      r.work_gen++;
      push({fire_t + spec_.event_cost_us, EventKind::PauseDone, 0, rank, -1, r.work_gen});
    }
  }
  stash_order_.clear();
}

SimResult Engine::run() {
  const auto violations = validate(wl_);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "workload failed validation:";
    for (const auto& v : violations)
      os << " [rank " << v.rank << " phase " << v.phase << ": " << v.message << "]";
    throw SimError(os.str());
  }
  spec_.check(cores_.config());

  const int n = static_cast<int>(wl_.ranks.size());
  ranks_.resize(static_cast<std::size_t>(n));
  seg_.resize(static_cast<std::size_t>(n));
  segments_.resize(static_cast<std::size_t>(n));

  // Sync groups.
  for (const auto& rt : wl_.ranks) {
    for (const auto& p : rt.phases) {
      if (p.kind != PhaseKind::Mpi || !p.sync_id) continue;
      auto [it, fresh] = sync_index_.try_emplace(*p.sync_id, static_cast<int>(syncs_.size()));
      if (fresh) syncs_.emplace_back();
      syncs_[static_cast<std::size_t>(it->second)].members.push_back(rt.rank_id);
    }
  }

  const FreqRequest init = initial_freq_request(spec_);
  for (int i = 0; i < n; ++i) {
    auto& r = ranks_[static_cast<std::size_t>(i)];
    r.trace = &wl_.ranks[static_cast<std::size_t>(i)];
    r.policy = make_policy(spec_);
    cores_.preapply(i, init, Rat(1));
    auto& s = seg_[static_cast<std::size_t>(i)];
    s.t0 = Rat(0);
    s.freq = cores_.effective_freq_ghz(i);
    s.duty = cores_.effective_duty(i);
    s.sleep = SleepState::Active;
    s.phase = 0;
    s.kind = r.trace->phases.empty() ? PhaseKind::App : r.trace->phases.front().kind;
  }
  now_ = Rat(0);
  for (int i = 0; i < n; ++i) advance(i, Rat(0));

  while (!queue_.empty()) {
    // Deferred timer callbacks run once time is about to advance past their
    // expiry; they may enqueue sampling instants earlier than the current
    // queue head, so flush before popping and re-examine the queue.
    if (!stash_order_.empty() && queue_.top().t > now_) {
      flush_stashed_fires();
      continue;
    }
    const QEvent ev = queue_.top();
    queue_.pop();
    now_ = ev.t;
    switch (ev.kind) {
      case EventKind::SampleInstant: {
        scheduled_samples_.erase(ev.t);
        handle_speed_changes(cores_.apply_pending(ev.t), ev.t);
        break;
      }
      case EventKind::TimerFire: {
        auto& r = ranks_[static_cast<std::size_t>(ev.rank)];
        if (ev.gen != r.timer_gen || !r.timer_armed) break;
        assert_state(in_mpi_phase(r), "timer fired outside an MPI phase");
        r.timer_armed = false;
        // Deferred until time advances; dropped if the phase exits at this
        // exact instant, which keeps expiry-at-exit from counting as a fire.
        r.stashed_fire = true;
        r.stash_t = ev.t;
        stash_order_.push_back(ev.rank);
        break;
      }
      case EventKind::PhaseWorkDone: {
        auto& r = ranks_[static_cast<std::size_t>(ev.rank)];
        if (ev.gen != r.work_gen) break;
        work_done(ev.rank, ev.t);
        break;
      }
      case EventKind::PauseDone: {
        auto& r = ranks_[static_cast<std::size_t>(ev.rank)];
        if (ev.gen != r.work_gen) break;
        if (r.stage == Stage::MpiProlog) {
          const Phase& p = cur_phase(r);
          if (p.cycles > 0) {
            r.stage = Stage::MpiWork;
            begin_work(ev.rank, ev.t, p.cycles);
          } else {
            begin_wait(ev.rank, ev.t);
          }
        } else if (r.stage == Stage::MpiCallback) {
          r.stage = Stage::MpiWork;
          r.integ_t = ev.t;
          reschedule_work(ev.rank, ev.t);
        } else if (r.stage == Stage::MpiEpilog) {
          finish_phase(ev.rank, ev.t);
        } else {
          assert_state(false, "pause completion in unexpected stage");
        }
        break;
      }
      case EventKind::SyncRelease: {
        auto& g = syncs_[static_cast<std::size_t>(ev.sync)];
        assert_state(!g.released, "sync group released twice");
        g.released = true;
        for (const int member : g.members) release(member, ev.t);
        break;
      }
      case EventKind::WaitEnd: {
        release(ev.rank, ev.t);
        break;
      }
      case EventKind::SleepEntered: {
        auto& r = ranks_[static_cast<std::size_t>(ev.rank)];
        if (ev.gen != r.sleep_gen) break;
        assert_state(r.stage == Stage::MpiWait, "sleep trigger outside a wait");
        cores_.begin_sleep(ev.rank, ev.t);
        seg_update(ev.rank, ev.t);
        push({ev.t + cores_.config().cstate_entry_us, EventKind::SleepComplete, 0, ev.rank,
              -1, r.sleep_gen});
        break;
      }
      case EventKind::SleepComplete: {
        auto& r = ranks_[static_cast<std::size_t>(ev.rank)];
        if (ev.gen != r.sleep_gen) break;
        handle_speed_changes(cores_.finish_sleep_entry(ev.rank), ev.t);
        seg_update(ev.rank, ev.t);
        break;
      }
      case EventKind::WakeDone: {
        auto& r = ranks_[static_cast<std::size_t>(ev.rank)];
        assert_state(r.stage == Stage::Waking, "wake completion outside waking");
        cores_.finish_wake(ev.rank);
        seg_update(ev.rank, ev.t);
        mpi_exit(ev.rank, ev.t);
        break;
      }
    }
  }
  for (const auto& r : ranks_)
    assert_state(!r.stashed_fire, "dangling timer callback at end of simulation");

  SimResult res;
  res.segments.resize(static_cast<std::size_t>(n));
  res.rank_end_us.resize(static_cast<std::size_t>(n));
  res.executed_cycles.resize(static_cast<std::size_t>(n));
  res.tts_us = Rat(0);
  for (int i = 0; i < n; ++i) {
    auto& r = ranks_[static_cast<std::size_t>(i)];
    assert_state(r.stage == Stage::Done, "rank did not finish (deadlock?)");
    res.segments[static_cast<std::size_t>(i)] =
        std::move(segments_[static_cast<std::size_t>(i)]);
    res.rank_end_us[static_cast<std::size_t>(i)] = r.end_t;
    res.executed_cycles[static_cast<std::size_t>(i)] = r.total_cycles;
    if (r.end_t > res.tts_us) res.tts_us = r.end_t;
  }
  res.writes = std::move(writes_);
  canonicalize_writes(res.writes);
  res.workload_hash = workload_hash(wl_);
  res.policy_name = spec_.name();
  res.policy = spec_;
  return res;
}

} // namespace

SimResult simulate(const Workload& w, const PolicySpec& policy, const HwConfig& hw) {
  Engine e(w, policy, hw);
  return e.run();
}

} // namespace slackdown

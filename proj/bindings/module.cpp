// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "slackdown/config.hpp"
#include "slackdown/csvio.hpp"
#include "slackdown/engine.hpp"
#include "slackdown/errors.hpp"
#include "slackdown/metrics.hpp"
#include "slackdown/trace.hpp"

namespace py = pybind11;
using namespace slackdown;

namespace {

// Accepts int (exact), str (parsed as decimal or a/b), or float (converted at
// nano resolution, which keeps customary values like 1.2 or 0.125 exact).
Rat rat_from_py(const py::handle& h) {
  if (py::isinstance<py::int_>(h)) return Rat(h.cast<std::int64_t>());
  if (py::isinstance<py::str>(h)) {
    const auto r = Rat::parse(h.cast<std::string>());
    if (!r) throw ConfigError("cannot parse number \"" + h.cast<std::string>() + "\"");
    return *r;
  }
  const double v = h.cast<double>();
  if (!std::isfinite(v)) throw ConfigError("number must be finite");
  return Rat(static_cast<std::int64_t>(std::llround(v * 1e9)), 1000000000);
}

FreqRequest freq_req_from_py(const py::handle& h) {
  if (py::isinstance<py::str>(h)) {
    const std::string s = h.cast<std::string>();
    if (s == "turbo" || s == "TURBO") return FreqRequest::turbo_request();
  }
  return FreqRequest::fixed(rat_from_py(h));
}

PolicySpec policy_from_kwargs(const std::string& name, const py::kwargs& kwargs) {
  PolicySpec spec;
  spec.kind = policy_kind_from_name(name);
  for (const auto& [key_h, value] : kwargs) {
    const std::string key = key_h.cast<std::string>();
    if (key == "timeout_us") {
      spec.timeout_us = rat_from_py(value);
    } else if (key == "spin_count") {
      spec.spin_count = value.cast<std::uint64_t>();
    } else if (key == "spin_iteration_us") {
      spec.spin_iteration_us = rat_from_py(value);
    } else if (key == "low_freq_ghz") {
      spec.low_freq_ghz = rat_from_py(value);
    } else if (key == "low_duty") {
      spec.low_duty = rat_from_py(value);
    } else if (key == "high_freq") {
      spec.high_freq = freq_req_from_py(value);
    } else if (key == "event_cost_us") {
      spec.event_cost_us = rat_from_py(value);
    } else {
      throw ConfigError("unknown policy parameter \"" + key + "\"");
    }
  }
  return spec;
}

LoadMetric load_metric_from_str(const std::string& s) {
  if (s == "cstate") return LoadMetric::NonSleepShare;
  if (s == "duty_scaled") return LoadMetric::DutyScaled;
  throw ConfigError("load metric must be cstate or duty_scaled");
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Trace-driven simulator for CPU power policies over MPI slack";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SimError>(m, "SimError", PyExc_RuntimeError);

  py::class_<Phase>(m, "Phase")
      .def_property_readonly("kind",
                             [](const Phase& p) {
                               return p.kind == PhaseKind::App ? "app" : "mpi";
                             })
      .def_readonly("cycles", &Phase::cycles)
      .def_property_readonly("sync", [](const Phase& p) { return p.sync_id; })
      .def_property_readonly("extra_wait_us",
                             [](const Phase& p) { return p.extra_wait_us.to_double(); })
      .def_property_readonly("call", [](const Phase& p) { return p.call_name; })
      .def("__repr__", [](const Phase& p) {
        std::string s = "Phase(kind=";
        s += (p.kind == PhaseKind::App ? "app" : "mpi");
        s += ", cycles=" + std::to_string(p.cycles);
        if (p.sync_id) s += ", sync=" + *p.sync_id;
        s += ")";
        return s;
      });

  py::class_<Workload>(m, "Workload")
      .def_property_readonly("n_ranks",
                             [](const Workload& w) { return w.ranks.size(); })
      .def_property_readonly("meta", [](const Workload& w) { return w.meta; })
      .def("phases",
           [](const Workload& w, std::size_t rank) {
             if (rank >= w.ranks.size()) throw py::index_error("rank out of range");
             return w.ranks[rank].phases;
           },
           py::arg("rank"))
      .def("hash", &workload_hash)
      .def("to_json", [](const Workload& w) { return workload_to_json(w, true); });

  m.def("validate", [](const Workload& w) {
    py::list out;
    for (const auto& v : validate(w)) out.append(py::make_tuple(v.rank, v.phase, v.message));
    return out;
  });
  m.def("load_workload",
        [](const std::string& path) { return load_workload(path); }, py::arg("path"));
  m.def("save_workload",
        [](const Workload& w, const std::string& path) { save_workload(w, path); },
        py::arg("workload"), py::arg("path"));

  m.def(
      "gen_balanced",
      [](int n_ranks, int n_iters, const py::object& app_us, const py::object& mpi_us,
         const py::object& mpi_work_fraction, const py::object& jitter_pct,
         std::uint64_t seed, const py::object& ref_freq_ghz) {
        BalancedParams p;
        p.n_ranks = n_ranks;
        p.n_iters = n_iters;
        p.app_us = rat_from_py(app_us);
        p.mpi_us = rat_from_py(mpi_us);
        p.mpi_work_fraction = rat_from_py(mpi_work_fraction);
        p.jitter_pct = rat_from_py(jitter_pct);
        p.seed = seed;
        p.ref_freq_ghz = rat_from_py(ref_freq_ghz);
        return gen_balanced(p);
      },
      py::arg("n_ranks"), py::arg("n_iters"), py::arg("app_us"), py::arg("mpi_us"),
      py::arg("mpi_work_fraction") = 1, py::arg("jitter_pct") = 0, py::arg("seed") = 0,
      py::arg("ref_freq_ghz") = 2.4);

  m.def(
      "gen_unbalanced",
      [](int n_ranks, int n_iters, int diag_rank, const py::object& diag_app_us,
         const py::object& other_app_us, std::uint64_t seed, const py::object& ref_freq_ghz) {
        UnbalancedParams p;
        p.n_ranks = n_ranks;
        p.n_iters = n_iters;
        p.diag_rank = diag_rank;
        p.diag_app_us = rat_from_py(diag_app_us);
        p.other_app_us = rat_from_py(other_app_us);
        p.seed = seed;
        p.ref_freq_ghz = rat_from_py(ref_freq_ghz);
        return gen_unbalanced(p);
      },
      py::arg("n_ranks"), py::arg("n_iters"), py::arg("diag_rank"), py::arg("diag_app_us"),
      py::arg("other_app_us"), py::arg("seed") = 0, py::arg("ref_freq_ghz") = 2.4);

  py::class_<HwConfig>(m, "HwConfig")
      .def(py::init([](const py::object& sample_period_us, const py::object& freq_levels,
                       const py::object& turbo_table, const py::object& duty_levels,
                       const py::object& cstate_entry_us, const py::object& cstate_wake_us) {
             HwConfig hw;
             if (!sample_period_us.is_none())
               hw.sample_period_us = rat_from_py(sample_period_us);
             if (!freq_levels.is_none()) {
               hw.freq_levels_ghz.clear();
               for (const auto& f : freq_levels.cast<py::list>())
                 hw.freq_levels_ghz.push_back(rat_from_py(f));
             }
             if (!turbo_table.is_none()) {
               hw.turbo_table_ghz.clear();
               for (const auto& [k, v] : turbo_table.cast<py::dict>())
                 hw.turbo_table_ghz[k.cast<int>()] = rat_from_py(v);
             }
             if (!duty_levels.is_none()) {
               hw.duty_levels.clear();
               for (const auto& d : duty_levels.cast<py::list>())
                 hw.duty_levels.push_back(rat_from_py(d));
             }
             if (!cstate_entry_us.is_none()) hw.cstate_entry_us = rat_from_py(cstate_entry_us);
             if (!cstate_wake_us.is_none()) hw.cstate_wake_us = rat_from_py(cstate_wake_us);
             hw.check();
             return hw;
           }),
           py::arg("sample_period_us") = py::none(), py::arg("freq_levels_ghz") = py::none(),
           py::arg("turbo_table_ghz") = py::none(), py::arg("duty_levels") = py::none(),
           py::arg("cstate_entry_us") = py::none(), py::arg("cstate_wake_us") = py::none())
      .def_property_readonly("sample_period_us",
                             [](const HwConfig& hw) { return hw.sample_period_us.to_double(); })
      .def("turbo_for",
           [](const HwConfig& hw, int active) { return hw.turbo_for(active).to_double(); });

  py::class_<PolicySpec>(m, "PolicySpec")
      .def(py::init(&policy_from_kwargs), py::arg("name"))
      .def_property_readonly("name", [](const PolicySpec& s) { return s.name(); })
      .def_property_readonly("timeout_us",
                             [](const PolicySpec& s) { return s.timeout_us.to_double(); })
      .def("__repr__", [](const PolicySpec& s) { return "PolicySpec(" + s.name() + ")"; });

  py::class_<PowerModel>(m, "PowerModel")
      .def(py::init([](const py::object& table, const py::object& sleep_w,
                       const py::object& static_w, const py::object& uncore_w,
                       const std::string& mode, const py::object& k_dyn,
                       const py::object& alpha) {
             PowerModel pm;
             if (mode == "table") {
               pm.mode = PowerMode::Table;
             } else if (mode == "parametric") {
               pm.mode = PowerMode::Parametric;
             } else {
               throw ConfigError("power mode must be table or parametric");
             }
             if (!table.is_none()) {
               pm.table_w.clear();
               for (const auto& [k, v] : table.cast<py::dict>())
                 pm.table_w[rat_from_py(k)] = rat_from_py(v);
             }
             if (!sleep_w.is_none()) pm.p_sleep_w = rat_from_py(sleep_w);
             if (!static_w.is_none()) pm.p_static_w = rat_from_py(static_w);
             if (!uncore_w.is_none()) pm.uncore_w = rat_from_py(uncore_w);
             if (!k_dyn.is_none()) pm.k_dyn = rat_from_py(k_dyn);
             if (!alpha.is_none()) pm.alpha = rat_from_py(alpha);
             pm.check();
             return pm;
           }),
           py::arg("table_w") = py::none(), py::arg("sleep_w") = py::none(),
           py::arg("static_w") = py::none(), py::arg("uncore_w") = py::none(),
           py::arg("mode") = "table", py::arg("k_dyn") = py::none(),
           py::arg("alpha") = py::none());

  py::class_<Segment>(m, "Segment")
      .def_property_readonly("t0_us", [](const Segment& s) { return s.t0_us.to_double(); })
      .def_property_readonly("t1_us", [](const Segment& s) { return s.t1_us.to_double(); })
      .def_property_readonly("freq_ghz",
                             [](const Segment& s) { return s.freq_ghz.to_double(); })
      .def_property_readonly("duty", [](const Segment& s) { return s.duty.to_double(); })
      .def_property_readonly("sleep", [](const Segment& s) { return to_string(s.sleep); })
      .def_readonly("phase_index", &Segment::phase_index)
      .def_property_readonly("phase_kind", [](const Segment& s) {
        return s.phase_kind == PhaseKind::App ? "app" : "mpi";
      });

  py::class_<RegisterWrite>(m, "RegisterWrite")
      .def_property_readonly("t_us", [](const RegisterWrite& w) { return w.t_us.to_double(); })
      .def_readonly("rank", &RegisterWrite::rank)
      .def_property_readonly("reg",
                             [](const RegisterWrite& w) {
                               return w.reg == RegKind::Freq ? "freq" : "duty";
                             })
      .def_readonly("turbo", &RegisterWrite::turbo)
      .def_property_readonly("value",
                             [](const RegisterWrite& w) { return w.value.to_double(); });

  py::class_<SimResult>(m, "SimResult")
      .def_property_readonly("tts_us", [](const SimResult& r) { return r.tts_us.to_double(); })
      .def_property_readonly("tts_us_exact",
                             [](const SimResult& r) { return r.tts_us.to_decimal(); })
      .def_readonly("executed_cycles", &SimResult::executed_cycles)
      .def_readonly("writes", &SimResult::writes)
      .def_readonly("policy_name", &SimResult::policy_name)
      .def_property_readonly("rank_end_us",
                             [](const SimResult& r) {
                               std::vector<double> out;
                               out.reserve(r.rank_end_us.size());
                               for (const auto& t : r.rank_end_us) out.push_back(t.to_double());
                               return out;
                             })
      .def("segments",
           [](const SimResult& r, std::size_t rank) {
             if (rank >= r.segments.size()) throw py::index_error("rank out of range");
             return r.segments[rank];
           },
           py::arg("rank"))
      .def("write_segments_csv", [](const SimResult& r, const std::string& path) {
        write_segments_csv(r, path);
      });

  m.def("simulate", &simulate, py::arg("workload"), py::arg("policy"),
        py::arg("hw") = HwConfig{});

  m.def(
      "energy",
      [](const SimResult& r, const PowerModel& pm) {
        const auto e = energy(r, pm);
        std::vector<double> per_rank;
        per_rank.reserve(e.per_rank_j.size());
        for (const auto& x : e.per_rank_j) per_rank.push_back(x.to_double());
        return py::make_tuple(e.total_j.to_double(), per_rank);
      },
      py::arg("result"), py::arg("power") = PowerModel{});

  py::class_<ComparisonReport>(m, "ComparisonReport")
      .def_property_readonly("overhead_pct",
                             [](const ComparisonReport& r) { return r.overhead_pct.to_double(); })
      .def_property_readonly(
          "energy_saving_pct",
          [](const ComparisonReport& r) { return r.energy_saving_pct.to_double(); })
      .def_property_readonly(
          "power_saving_pct",
          [](const ComparisonReport& r) { return r.power_saving_pct.to_double(); })
      .def_property_readonly("tts_us",
                             [](const ComparisonReport& r) { return r.candidate.tts_us.to_double(); })
      .def_property_readonly("baseline_tts_us",
                             [](const ComparisonReport& r) { return r.baseline.tts_us.to_double(); })
      .def_property_readonly("energy_j",
                             [](const ComparisonReport& r) { return r.candidate.energy_j.to_double(); })
      .def_property_readonly("baseline_energy_j",
                             [](const ComparisonReport& r) { return r.baseline.energy_j.to_double(); })
      .def_property_readonly("avg_freq_ghz",
                             [](const ComparisonReport& r) { return r.candidate.avg_freq_ghz.to_double(); })
      .def_property_readonly("avg_load_pct",
                             [](const ComparisonReport& r) { return r.candidate.avg_load_pct.to_double(); });

  m.def(
      "compare",
      [](const SimResult& base, const SimResult& cand, const PowerModel& pm,
         const std::string& load_metric) {
        return compare(base, cand, pm, load_metric_from_str(load_metric));
      },
      py::arg("baseline"), py::arg("candidate"), py::arg("power") = PowerModel{},
      py::arg("load_metric") = "cstate");

  m.def(
      "quadrant_analysis",
      [](const SimResult& r, const py::object& threshold_us) {
        const auto rep = quadrant_analysis(r, rat_from_py(threshold_us));
        static const char* names[4] = {"I", "II", "III", "IV"};
        py::dict out;
        for (std::size_t reg = 0; reg < 4; ++reg) {
          const auto& st = rep.total[reg];
          py::dict d;
          d["count"] = st.count;
          d["time_us"] = st.time_us.to_double();
          d["mean_app_freq_ghz"] = st.mean_app_freq_ghz().to_double();
          d["mean_mpi_freq_ghz"] = st.mean_mpi_freq_ghz().to_double();
          out[names[reg]] = d;
        }
        return out;
      },
      py::arg("result"), py::arg("threshold_us") = 500);

  m.def(
      "duration_split",
      [](const SimResult& r, const py::object& threshold_us) {
        py::list out;
        for (const auto& s : duration_split(r, rat_from_py(threshold_us))) {
          py::dict d;
          d["app_long_pct"] = s.app_long_pct.to_double();
          d["app_short_pct"] = s.app_short_pct.to_double();
          d["mpi_long_pct"] = s.mpi_long_pct.to_double();
          d["mpi_short_pct"] = s.mpi_short_pct.to_double();
          out.append(d);
        }
        return out;
      },
      py::arg("result"), py::arg("threshold_us") = 500);

  m.attr("__version__") = "0.1.0";
}

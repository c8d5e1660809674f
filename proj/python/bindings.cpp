#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "leocp/pipeline.hpp"
#include "leocp/reporting.hpp"

namespace py = pybind11;
using namespace leocp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (T, S, G) array; non-finite entries are unreachable.
std::vector<DistanceField> fields_from_array(const Array& a, double step_s) {
  if (a.ndim() != 3) throw std::invalid_argument("distance array must have shape (snapshots, sats, stations)");
  const auto T = static_cast<std::size_t>(a.shape(0)), S = static_cast<std::size_t>(a.shape(1)),
             G = static_cast<std::size_t>(a.shape(2));
  const double* p = a.data();
  std::vector<DistanceField> out;
  out.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    DistanceField f(step_s * static_cast<double>(t), S, G);
    for (std::size_t i = 0; i < S * G; ++i) {
      const double v = p[t * S * G + i];
      if (std::isfinite(v)) {
        f.d[i] = v;
        f.reachable[i] = 1;
      }
    }
    out.push_back(std::move(f));
  }
  return out;
}

py::tuple fields_to_arrays(const std::vector<DistanceField>& fields) {
  const std::size_t T = fields.size(), S = T ? fields[0].n_sats : 0, G = T ? fields[0].n_stations : 0;
  py::array_t<double> times(static_cast<py::ssize_t>(T));
  py::array_t<double> d({static_cast<py::ssize_t>(T), static_cast<py::ssize_t>(S), static_cast<py::ssize_t>(G)});
  auto tm = times.mutable_unchecked<1>();
  double* dp = d.mutable_data();
  for (std::size_t t = 0; t < T; ++t) {
    tm(static_cast<py::ssize_t>(t)) = fields[t].t;
    std::copy(fields[t].d.begin(), fields[t].d.end(), dp + t * S * G);
  }
  return py::make_tuple(times, d);
}

std::vector<int> all_or(const std::optional<std::vector<int>>& candidates, std::size_t n) {
  if (candidates) return *candidates;
  std::vector<int> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<int>(i);
  return v;
}

py::dict solution_dict(const PlacementSolution& s) {
  py::dict d;
  d["selected"] = s.selected;
  d["objective_km"] = s.objective_km;
  d["objective_ms"] = s.objective_ms;
  d["method"] = s.method;
  d["seed"] = s.seed;
  return d;
}

py::dict record_dict(const HandoverRecord& r) {
  py::dict d;
  d["sat"] = r.sat;
  d["t_start"] = r.t_start;
  d["duration"] = r.duration;
  d["invisibility"] = r.invisibility;
  d["pod_unavailability"] = r.pod_unavailability;
  d["protocol"] = to_string(r.protocol);
  d["source"] = r.source;
  d["target"] = r.target;
  d["t_target_bound"] = r.t_target_bound;
  d["t_source_released"] = r.t_source_released;
  return d;
}

ScenarioConfig config_from(const std::string& text, const std::string& base_dir) {
  return parse_config(nlohmann::json::parse(text), base_dir);
}

}  // namespace

PYBIND11_MODULE(_leocp, m) {
  m.doc() = "LEO control-plane placement, assignment and handover simulator";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InfeasibleInstance>(m, "InfeasibleInstance", PyExc_RuntimeError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);

  m.def(
      "normalize_config",
      [](const std::string& text, const std::string& base_dir) { return to_json(config_from(text, base_dir)).dump(); },
      py::arg("config_json"), py::arg("base_dir") = "");
  m.def(
      "load_config", [](const std::string& path) { return to_json(load_config(path)).dump(); }, py::arg("path"));

  m.def(
      "constellation",
      [](int planes, int sats_per_plane, double inclination_deg, double altitude_km, int phasing_factor,
         double raan_span_deg) {
        WalkerShell s{planes, sats_per_plane, inclination_deg, altitude_km, phasing_factor, raan_span_deg};
        s.validate();
        const auto el = generate_constellation(s);
        py::array_t<double> out({static_cast<py::ssize_t>(el.size()), py::ssize_t{4}});
        auto o = out.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < out.shape(0); ++i) {
          const auto& e = el[static_cast<std::size_t>(i)];
          o(i, 0) = rad2deg(e.raan);
          o(i, 1) = rad2deg(e.initial_phase);
          o(i, 2) = e.semi_major_axis;
          o(i, 3) = rad2deg(e.inclination);
        }
        return out;
      },
      py::arg("planes"), py::arg("sats_per_plane"), py::arg("inclination_deg"), py::arg("altitude_km"),
      py::arg("phasing_factor") = 0, py::arg("raan_span_deg") = 360.0,
      "Rows of (raan_deg, phase_deg, semi_major_axis_km, inclination_deg) in plane-major order.");

  m.def(
      "positions",
      [](int planes, int sats_per_plane, double inclination_deg, double altitude_km, int phasing_factor,
         double raan_span_deg, double t) {
        WalkerShell s{planes, sats_per_plane, inclination_deg, altitude_km, phasing_factor, raan_span_deg};
        s.validate();
        const auto el = generate_constellation(s);
        py::array_t<double> out({static_cast<py::ssize_t>(el.size()), py::ssize_t{3}});
        auto o = out.mutable_unchecked<2>();
        for (py::ssize_t i = 0; i < out.shape(0); ++i) {
          const auto p = propagate(el[static_cast<std::size_t>(i)], t);
          o(i, 0) = p.x;
          o(i, 1) = p.y;
          o(i, 2) = p.z;
        }
        return out;
      },
      py::arg("planes"), py::arg("sats_per_plane"), py::arg("inclination_deg"), py::arg("altitude_km"),
      py::arg("phasing_factor") = 0, py::arg("raan_span_deg") = 360.0, py::arg("t") = 0.0,
      "Earth-fixed satellite positions in km at time t.");

  m.def("orbital_period", &orbital_period, py::arg("semi_major_axis_km"));

  m.def(
      "distance_fields",
      [](const std::string& text, const std::string& base_dir) {
        const auto c = config_from(text, base_dir);
        std::vector<DistanceField> fields;
        {
          py::gil_scoped_release release;
          fields = *build_fields(c, generate_constellation(c.shell));
        }
        return fields_to_arrays(fields);
      },
      py::arg("config_json"), py::arg("base_dir") = "",
      "Snapshot times and (T, S, G) shortest-path distances in km; inf where unreachable.");

  m.def(
      "evaluate",
      [](const std::vector<int>& selected, const Array& d) { return evaluate(selected, fields_from_array(d, 1.0)); },
      py::arg("selected"), py::arg("distances"));

  m.def(
      "cnpa",
      [](const Array& d, int k, int clusters, std::uint64_t seed, std::optional<std::vector<int>> candidates,
         const std::string& greedy_eval, int max_passes) {
        PlacementProblem p;
        p.fields = fields_from_array(d, 1.0);
        p.candidates = all_or(candidates, p.fields.empty() ? 0 : p.fields[0].n_stations);
        p.k = k;
        p.clusters = clusters;
        p.seed = seed;
        if (greedy_eval == "all")
          p.greedy_eval = GreedyEval::AllSnapshots;
        else if (greedy_eval != "representatives")
          throw std::invalid_argument("greedy_eval must be representatives or all");
        p.max_passes = max_passes;
        return solution_dict(cnpa(p));
      },
      py::arg("distances"), py::arg("k"), py::arg("clusters") = 8, py::arg("seed") = 0, py::arg("candidates") = py::none(),
      py::arg("greedy_eval") = "representatives", py::arg("max_passes") = 50);

  m.def(
      "exhaustive",
      [](const Array& d, int k, std::optional<std::vector<int>> candidates, double budget) {
        const auto f = fields_from_array(d, 1.0);
        return solution_dict(exhaustive_optimal(f, all_or(candidates, f.empty() ? 0 : f[0].n_stations), k, budget));
      },
      py::arg("distances"), py::arg("k"), py::arg("candidates") = py::none(), py::arg("budget") = kDefaultExhaustiveBudget);

  m.def(
      "random_select",
      [](const Array& d, int k, std::uint64_t seed, std::optional<std::vector<int>> candidates) {
        const auto f = fields_from_array(d, 1.0);
        return solution_dict(random_select(f, all_or(candidates, f.empty() ? 0 : f[0].n_stations), k, seed));
      },
      py::arg("distances"), py::arg("k"), py::arg("seed") = 0, py::arg("candidates") = py::none());

  m.def(
      "single_best",
      [](const Array& d, std::optional<std::vector<int>> candidates) {
        const auto f = fields_from_array(d, 1.0);
        return solution_dict(single_best(f, all_or(candidates, f.empty() ? 0 : f[0].n_stations)));
      },
      py::arg("distances"), py::arg("candidates") = py::none());

  m.def(
      "predict_handovers",
      [](const Array& times, const Array& km, double delta, double decide_dt_s) {
        if (times.ndim() != 1 || km.ndim() != 2 || km.shape(1) != times.shape(0))
          throw std::invalid_argument("expected times (n,) and distances (controllers, n)");
        const auto n = static_cast<std::size_t>(times.shape(0));
        if (n < 2) throw std::invalid_argument("need at least two samples");
        AssignmentParams p;
        p.horizon_s = times.at(n - 1);
        p.sample_dt_s = times.at(1) - times.at(0);
        p.decide_dt_s = decide_dt_s;
        p.delta = delta;
        p.validate();
        std::vector<DistanceSeries> series(static_cast<std::size_t>(km.shape(0)));
        for (std::size_t g = 0; g < series.size(); ++g) {
          series[g].gs_id = static_cast<int>(g);
          series[g].t.assign(times.data(), times.data() + n);
          series[g].km.assign(km.data() + g * n, km.data() + (g + 1) * n);
        }
        const auto s = predict_handovers(series, p);
        py::list events;
        for (const auto& e : s.events) events.append(py::make_tuple(e.t, e.source, e.target));
        return py::make_tuple(s.initial, events);
      },
      py::arg("times"), py::arg("distances"), py::arg("delta") = 0.9, py::arg("decide_dt_s") = 1.0,
      "Returns (initial_controller, [(t, source, target), ...]).");

  m.def(
      "run_scenario",
      [](const std::string& text, const std::string& base_dir) {
        const auto c = config_from(text, base_dir);
        ScenarioResult r;
        MetricsReport rep;
        {
          py::gil_scoped_release release;
          r = run_scenario(c);
          rep = aggregate(r.simulation.records, r.simulation.reports, static_cast<std::size_t>(c.shell.size()));
        }
        py::dict out;
        out["placement"] = solution_dict(r.placement);
        py::list recs;
        for (const auto& x : r.simulation.records) recs.append(record_dict(x));
        out["records"] = recs;
        out["metrics_json"] = to_json(rep).dump();
        std::ostringstream table;
        write_overhead_table(table, c.name, rep);
        out["overhead_table"] = table.str();
        return out;
      },
      py::arg("config_json"), py::arg("base_dir") = "");

  m.def(
      "run_pipeline",
      [](const std::string& config_path, const std::string& subcommand, std::optional<std::uint64_t> seed,
         std::optional<std::string> out, std::optional<std::string> protocol, std::optional<std::string> method,
         std::optional<double> delta, std::optional<int> k, std::optional<int> clusters) {
        Overrides o;
        o.seed = seed;
        o.out = out;
        if (protocol) o.protocol = parse_protocol(*protocol);
        if (method) o.method = parse_method(*method);
        o.delta = delta;
        o.k = k;
        o.clusters = clusters;
        std::ostringstream log, err;
        int code;
        {
          py::gil_scoped_release release;
          code = leocp::run_pipeline(config_path, subcommand, o, log, err);
        }
        return py::make_tuple(code, log.str(), err.str());
      },
      py::arg("config_path"), py::arg("subcommand") = "all", py::arg("seed") = py::none(), py::arg("out") = py::none(),
      py::arg("protocol") = py::none(), py::arg("method") = py::none(), py::arg("delta") = py::none(),
      py::arg("k") = py::none(), py::arg("clusters") = py::none(), "Returns (exit_code, log, errors).");
}

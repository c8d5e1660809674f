#include "leocp/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "leocp/format.hpp"
#include "leocp/reporting.hpp"

namespace leocp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

template <class Fn>
auto stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string join_ids(std::span<const int> ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? " " : "") + std::to_string(ids[i]);
  return s;
}

struct Pipeline {
  const ScenarioConfig& config;
  fs::path out;
  std::ostream& log;

  std::vector<SatelliteElement> elements;
  FieldSeries fields;
  PlacementSolution placement;
  std::vector<HandoverSchedule> schedules;
  SimulationResult sim;

  void gen() {
    stage("gen", [&] {
      elements = generate_constellation(config.shell);
      auto os = open_out(out / files::kConstellation);
      os << "sat_id,plane,slot,raan_deg,phase_deg,semi_major_axis_km,inclination_deg\n";
      for (std::size_t i = 0; i < elements.size(); ++i) {
        const auto& e = elements[i];
        os << i << ',' << e.id.plane << ',' << e.id.slot << ',' << fixed(rad2deg(e.raan)) << ','
           << fixed(rad2deg(e.initial_phase)) << ',' << fixed(e.semi_major_axis) << ',' << fixed(rad2deg(e.inclination))
           << '\n';
      }
      auto st = open_out(out / files::kStations);
      st << "gs_id,name,latitude_deg,longitude_deg,altitude_m\n";
      for (const auto& g : config.stations)
        st << g.id << ',' << g.name << ',' << fixed(g.latitude_deg) << ',' << fixed(g.longitude_deg) << ','
           << fixed(g.altitude_m) << '\n';
      log << "gen: " << elements.size() << " satellites (" << config.shell.planes << "x" << config.shell.sats_per_plane
          << "), " << config.stations.size() << " stations\n";
    });
  }

  void snapshot() {
    if (elements.empty()) elements = generate_constellation(config.shell);
    stage("snapshot", [&] {
      fields = build_fields(config, elements);
      auto os = open_out(out / files::kDistances);
      write_distance_csv(os, *fields);
      json summary = json::array();
      std::size_t unreachable = 0;
      for (const auto& f : *fields) {
        std::size_t reach = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < f.d.size(); ++i) {
          if (f.reachable[i]) {
            ++reach;
            worst = std::max(worst, f.d[i]);
          }
        }
        unreachable += f.d.size() - reach;
        summary.push_back({{"t", f.t}, {"reachable_pairs", reach}, {"max_km", worst}});
      }
      write_json(out / files::kSnapshots, summary);
      log << "snapshot: " << fields->size() << " snapshots every " << fixed(config.snapshots.step_s, 1)
          << " s, unreachable pairs " << unreachable << "\n";
    });
  }

  void place(bool compare) {
    if (!fields) snapshot();
    stage("place", [&] {
      placement = run_placement(config, fields);
      write_json(out / files::kPlacement, to_json(placement));
      if (compare) {
        auto os = open_out(out / files::kPlacementComparison);
        os << "method,selected_ids,objective_km,objective_ms,note\n";
        for (const auto& m : compare_methods(config, fields))
          os << m.method << ',' << join_ids(m.selected) << ',' << fixed(m.objective_km) << ',' << fixed(m.objective_ms)
             << ',' << m.note << '\n';
      }
      log << "place: method " << placement.method << ", selected [" << join_ids(placement.selected)
          << "], worst latency " << fixed(placement.objective_ms, 3) << " ms\n";
    });
  }

  void assign() {
    if (placement.selected.empty()) place(false);
    stage("assign", [&] {
      schedules = run_assignment(config, elements, placement.selected, fields);
      auto os = open_out(out / files::kScheduleCsv);
      write_schedule_csv(os, schedules);
      json arr = json::array();
      std::size_t events = 0;
      for (const auto& s : schedules) {
        arr.push_back(to_json(s));
        events += s.events.size();
      }
      write_json(out / files::kScheduleJson, arr);
      log << "assign: " << events << " scheduled handovers, delta " << fixed(config.assignment.delta, 3) << "\n";
    });
  }

  void simulate() {
    if (schedules.empty()) assign();
    stage("simulate", [&] {
      sim = run_simulation(config, schedules, placement.selected, fields);
      auto os = open_out(out / files::kHandovers);
      write_records_csv(os, sim.records);
      auto rs = open_out(out / files::kReportLatency);
      write_report_samples_csv(rs, sim.reports);
      if (config.simulation.trace) {
        auto ts = open_out(out / files::kTrace);
        write_trace_jsonl(ts, sim.trace);
      }
      double total = 0.0;
      for (const auto& r : sim.records) total += r.duration;
      log << "simulate: " << sim.records.size() << " " << to_string(config.simulation.protocol)
          << " handovers, mean duration "
          << fixed(sim.records.empty() ? 0.0 : total / static_cast<double>(sim.records.size()), 3) << " s\n";
    });
  }

  void report() {
    stage("report", [&] {
      auto hs = open_in(out / files::kHandovers);
      const auto records = read_records_csv(hs);
      auto rs = open_in(out / files::kReportLatency);
      const auto reports = read_report_samples_csv(rs);
      const auto rep = aggregate(records, reports, static_cast<std::size_t>(config.shell.size()));
      auto os = open_out(out / files::kOverheadTable);
      write_overhead_table(os, config.name, rep);
      auto ps = open_out(out / files::kPerSatellite);
      write_per_satellite_csv(ps, rep);
      auto cs = open_out(out / files::kLatencyCdf);
      write_cdf_csv(cs, rep.cdf_points);
      std::vector<double> durations;
      for (const auto& r : records) durations.push_back(r.duration);
      auto ds = open_out(out / files::kDurationCdf);
      if (durations.empty())
        write_cdf_csv(ds, {});
      else
        write_cdf_csv(ds, cdf(durations));
      write_json(out / files::kMetrics, to_json(rep));
      const auto& a = rep.aggregate;
      log << "report: " << a.total_handovers << " handovers, " << fixed(a.mean_duration_s, 2) << " s mean, invisibility "
          << fixed(a.total_invisibility_h, 2) << " h, pod unavailability " << fixed(a.total_pod_unavail_h, 2) << " h\n";
    });
  }
};

}  // namespace

void apply_overrides(ScenarioConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.protocol) c.simulation.protocol = *o.protocol;
  if (o.method) c.placement.method = *o.method;
  if (o.delta) c.assignment.delta = *o.delta;
  if (o.k) c.placement.k = *o.k;
  if (o.clusters) c.placement.clusters = *o.clusters;
  c.validate();
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"gen", "snapshot", "place", "assign", "simulate", "report", "all"};
  return names;
}

void run_stages(const ScenarioConfig& config, const std::string& subcommand, const fs::path& out_dir,
                std::ostream& log) {
  const auto& names = subcommands();
  if (std::find(names.begin(), names.end(), subcommand) == names.end())
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
  stage("setup", [&] {
    fs::create_directories(out_dir);
    write_json(out_dir / files::kEffectiveConfig, to_json(config));
  });

  Pipeline p{config, out_dir, log, {}, {}, {}, {}, {}};
  if (subcommand == "gen") {
    p.gen();
  } else if (subcommand == "snapshot") {
    p.snapshot();
  } else if (subcommand == "place") {
    p.place(true);
  } else if (subcommand == "assign") {
    p.assign();
  } else if (subcommand == "simulate") {
    p.simulate();
  } else if (subcommand == "report") {
    p.report();
  } else {
    p.gen();
    p.snapshot();
    p.place(true);
    p.assign();
    p.simulate();
    p.report();
  }
}

int run_pipeline(const fs::path& config_path, const std::string& subcommand, const Overrides& overrides,
                 std::ostream& log, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load_config(config_path);
    apply_overrides(config, overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
  try {
    run_stages(config, subcommand, config.output_dir, log);
  } catch (const StageError& e) {
    err << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace leocp

#include "leocp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <set>

#include "leocp/parallel.hpp"

namespace leocp {

using nlohmann::json;

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void get(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError(field(key), "integer out of range");
      out = static_cast<int>(x);
    }
  }

  void get(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
        throw ConfigError(field(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void get(const std::string& key, std::vector<int>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(field(key), "expected an array of integers");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number_integer()) throw ConfigError(field(key), "expected an array of integers");
        out.push_back(x.get<int>());
      }
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    if (find(key)) {
      T value{};
      get(key, value);
      out = value;
    } else {
      out.reset();
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class Fn>
void checked(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(field, e.what());
  }
}

std::vector<GroundStation> parse_stations(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ConfigError(path, "expected an array of stations");
  std::vector<GroundStation> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    Reader r(arr[i], p);
    GroundStation gs;
    gs.id = static_cast<int>(i);
    gs.name = "gs" + std::to_string(i);
    r.get("name", gs.name);
    r.get("latitude_deg", gs.latitude_deg);
    r.get("longitude_deg", gs.longitude_deg);
    r.get("altitude_m", gs.altitude_m);
    r.finish();
    checked(p, [&] { gs.validate(); });
    out.push_back(std::move(gs));
  }
  return out;
}

json stations_json(std::span<const GroundStation> stations) {
  json arr = json::array();
  for (const auto& g : stations)
    arr.push_back({{"name", g.name},
                   {"latitude_deg", g.latitude_deg},
                   {"longitude_deg", g.longitude_deg},
                   {"altitude_m", g.altitude_m}});
  return arr;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t placement_seed(const ScenarioConfig& c) {
  return c.placement.seed.value_or(stage_seed(c.seed, "placement"));
}

}  // namespace

const char* to_string(PlacementMethod m) {
  switch (m) {
    case PlacementMethod::Cnpa: return "cnpa";
    case PlacementMethod::Exhaustive: return "exhaustive";
    case PlacementMethod::Random: return "random";
    case PlacementMethod::Single: return "single";
  }
  return "?";
}

PlacementMethod parse_method(const std::string& name) {
  if (name == "cnpa") return PlacementMethod::Cnpa;
  if (name == "exhaustive") return PlacementMethod::Exhaustive;
  if (name == "random") return PlacementMethod::Random;
  if (name == "single") return PlacementMethod::Single;
  throw std::invalid_argument("unknown placement method '" + name + "' (expected cnpa|exhaustive|random|single)");
}

std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stage) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(seed ^ h);
}

double uniform01(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

void ScenarioConfig::validate() const {
  checked("shell", [&] { shell.validate(); });
  if (stations.empty()) throw ConfigError("stations", "at least one station required");
  for (std::size_t i = 0; i < stations.size(); ++i)
    checked("stations[" + std::to_string(i) + "]", [&] { stations[i].validate(); });
  if (!(topology.min_elevation_deg >= 0.0 && topology.min_elevation_deg < 90.0))
    throw ConfigError("topology.min_elevation_deg", "must be in [0, 90)");
  if (topology.max_gsl_per_sat < 0) throw ConfigError("topology.max_gsl_per_sat", "must be >= 0");
  if (!(snapshots.horizon_s > 0.0)) throw ConfigError("snapshots.horizon_s", "must be > 0");
  if (!(snapshots.step_s > 0.0)) throw ConfigError("snapshots.step_s", "must be > 0");

  const auto n = static_cast<int>(stations.size());
  const auto& p = placement;
  for (int g : p.candidates)
    if (g < 0 || g >= n) throw ConfigError("placement.candidates", "unknown station " + std::to_string(g));
  for (int g : p.fixed_controllers)
    if (g < 0 || g >= n) throw ConfigError("placement.fixed_controllers", "unknown station " + std::to_string(g));
  const int pool = p.candidates.empty() ? n : static_cast<int>(std::set<int>(p.candidates.begin(), p.candidates.end()).size());
  if (p.fixed_controllers.empty() && (p.k < 1 || p.k > pool))
    throw ConfigError("placement.k", "must be in [1, " + std::to_string(pool) + "]");
  if (p.clusters < 1) throw ConfigError("placement.clusters", "must be >= 1");
  if (p.max_passes < 0) throw ConfigError("placement.max_passes", "must be >= 0");
  if (p.random_trials < 1) throw ConfigError("placement.random_trials", "must be >= 1");
  if (!(p.exhaustive_budget > 0.0)) throw ConfigError("placement.exhaustive_budget", "must be > 0");

  checked("assignment", [&] { assignment.validate(); });
  if (assignment.metric == DistanceMetric::Network && assignment.horizon_s > snapshots.horizon_s + 1e-9)
    throw ConfigError("assignment.horizon_s", "network metric needs horizon <= snapshots.horizon_s");

  const auto& s = simulation;
  checked("simulation.delays", [&] { s.delays.validate(); });
  if (!(s.report_interval_s > 0.0)) throw ConfigError("simulation.report_interval_s", "must be > 0");
  if (!(s.visibility_grace_s >= 0.0)) throw ConfigError("simulation.visibility_grace_s", "must be >= 0");
  if (s.pods_per_satellite < 0) throw ConfigError("simulation.pods_per_satellite", "must be >= 0");
  if (s.fixed_one_way_ms && !(*s.fixed_one_way_ms >= 0.0 && std::isfinite(*s.fixed_one_way_ms)))
    throw ConfigError("simulation.fixed_one_way_ms", "must be finite and >= 0");
  if (!(s.terrestrial_factor > 0.0)) throw ConfigError("simulation.terrestrial_factor", "must be > 0");
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ScenarioConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  ScenarioConfig c;
  Reader root(j, "");
  root.get("name", c.name);
  root.get("seed", c.seed);
  root.get("output_dir", c.output_dir);

  if (const json* v = root.find("shell")) {
    Reader r(*v, "shell");
    r.get("planes", c.shell.planes);
    r.get("sats_per_plane", c.shell.sats_per_plane);
    r.get("inclination_deg", c.shell.inclination_deg);
    r.get("altitude_km", c.shell.altitude_km);
    r.get("phasing_factor", c.shell.phasing_factor);
    r.get("raan_span_deg", c.shell.raan_span_deg);
    r.finish();
  } else {
    throw ConfigError("shell", "required");
  }

  const json* inline_stations = root.find("stations");
  std::string stations_file;
  root.get("stations_file", stations_file);
  if (inline_stations && !stations_file.empty()) throw ConfigError("stations_file", "give stations or stations_file, not both");
  if (inline_stations) {
    c.stations = parse_stations(*inline_stations, "stations");
  } else if (!stations_file.empty()) {
    const auto path = base_dir / stations_file;
    std::ifstream in(path);
    if (!in) throw ConfigError("stations_file", "cannot open " + path.string());
    json arr;
    try {
      arr = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError("stations_file", e.what());
    }
    c.stations = parse_stations(arr, "stations_file");
  } else {
    throw ConfigError("stations", "required (inline or via stations_file)");
  }

  if (const json* v = root.find("topology")) {
    Reader r(*v, "topology");
    r.get("min_elevation_deg", c.topology.min_elevation_deg);
    std::string pairing = "same_slot";
    r.get("isl_pairing", pairing);
    if (pairing == "same_slot")
      c.topology.isl_pairing = IslPairing::SameSlot;
    else if (pairing == "nearest")
      c.topology.isl_pairing = IslPairing::NearestPerSnapshot;
    else
      throw ConfigError("topology.isl_pairing", "expected same_slot|nearest");
    r.get("max_gsl_per_sat", c.topology.max_gsl_per_sat);
    r.finish();
  }

  if (const json* v = root.find("snapshots")) {
    Reader r(*v, "snapshots");
    r.get("horizon_s", c.snapshots.horizon_s);
    r.get("step_s", c.snapshots.step_s);
    r.finish();
  }

  if (const json* v = root.find("placement")) {
    Reader r(*v, "placement");
    auto& p = c.placement;
    r.get("k", p.k);
    r.get("clusters", p.clusters);
    std::string method = to_string(p.method);
    r.get("method", method);
    checked("placement.method", [&] { p.method = parse_method(method); });
    std::string eval = "representatives";
    r.get("greedy_eval", eval);
    if (eval == "representatives")
      p.greedy_eval = GreedyEval::Representatives;
    else if (eval == "all")
      p.greedy_eval = GreedyEval::AllSnapshots;
    else
      throw ConfigError("placement.greedy_eval", "expected representatives|all");
    r.get("max_passes", p.max_passes);
    r.get("random_trials", p.random_trials);
    r.get("exhaustive_budget", p.exhaustive_budget);
    r.get("candidates", p.candidates);
    r.get("seed", p.seed);
    r.get("fixed_controllers", p.fixed_controllers);
    r.finish();
  }

  c.assignment.horizon_s = c.snapshots.horizon_s;
  if (const json* v = root.find("assignment")) {
    Reader r(*v, "assignment");
    auto& a = c.assignment;
    r.get("horizon_s", a.horizon_s);
    r.get("sample_dt_s", a.sample_dt_s);
    r.get("decide_dt_s", a.decide_dt_s);
    r.get("delta", a.delta);
    std::string metric = "geometric";
    r.get("metric", metric);
    if (metric == "geometric")
      a.metric = DistanceMetric::Geometric;
    else if (metric == "network")
      a.metric = DistanceMetric::Network;
    else
      throw ConfigError("assignment.metric", "expected geometric|network");
    r.finish();
  }

  if (const json* v = root.find("simulation")) {
    Reader r(*v, "simulation");
    auto& s = c.simulation;
    std::string protocol = to_string(s.protocol);
    r.get("protocol", protocol);
    checked("simulation.protocol", [&] { s.protocol = parse_protocol(protocol); });
    if (const json* d = r.find("delays"))
      checked("simulation.delays", [&] {
        if (!d->is_object()) throw std::invalid_argument("expected an object");
        for (const auto& [key, value] : d->items())
          if (key == "auth_roundtrips" ? !value.is_number_integer() : !value.is_number())
            throw ConfigError("simulation.delays." + key, "expected a number");
        apply_overrides(s.delays, *d);
      });
    r.get("report_interval_s", s.report_interval_s);
    s.visibility_grace_s = s.report_interval_s;
    r.get("visibility_grace_s", s.visibility_grace_s);
    r.get("pods_per_satellite", s.pods_per_satellite);
    r.get("fixed_one_way_ms", s.fixed_one_way_ms);
    r.get("terrestrial_factor", s.terrestrial_factor);
    r.get("trace", s.trace);
    r.finish();
  }

  root.finish();
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(j, path.parent_path());
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["shell"] = {{"planes", c.shell.planes},
                {"sats_per_plane", c.shell.sats_per_plane},
                {"inclination_deg", c.shell.inclination_deg},
                {"altitude_km", c.shell.altitude_km},
                {"phasing_factor", c.shell.phasing_factor},
                {"raan_span_deg", c.shell.raan_span_deg}};
  j["stations"] = stations_json(c.stations);
  j["topology"] = {{"min_elevation_deg", c.topology.min_elevation_deg},
                   {"isl_pairing", c.topology.isl_pairing == IslPairing::SameSlot ? "same_slot" : "nearest"},
                   {"max_gsl_per_sat", c.topology.max_gsl_per_sat}};
  j["snapshots"] = {{"horizon_s", c.snapshots.horizon_s}, {"step_s", c.snapshots.step_s}};
  const auto& p = c.placement;
  j["placement"] = {{"k", p.k},
                    {"clusters", p.clusters},
                    {"method", to_string(p.method)},
                    {"greedy_eval", p.greedy_eval == GreedyEval::Representatives ? "representatives" : "all"},
                    {"max_passes", p.max_passes},
                    {"random_trials", p.random_trials},
                    {"exhaustive_budget", p.exhaustive_budget},
                    {"candidates", p.candidates},
                    {"seed", p.seed ? json(*p.seed) : json()},
                    {"fixed_controllers", p.fixed_controllers}};
  const auto& a = c.assignment;
  j["assignment"] = {{"horizon_s", a.horizon_s},
                     {"sample_dt_s", a.sample_dt_s},
                     {"decide_dt_s", a.decide_dt_s},
                     {"delta", a.delta},
                     {"metric", a.metric == DistanceMetric::Geometric ? "geometric" : "network"}};
  const auto& s = c.simulation;
  j["simulation"] = {{"protocol", to_string(s.protocol)},
                     {"delays", to_json(s.delays)},
                     {"report_interval_s", s.report_interval_s},
                     {"visibility_grace_s", s.visibility_grace_s},
                     {"pods_per_satellite", s.pods_per_satellite},
                     {"fixed_one_way_ms", s.fixed_one_way_ms ? json(*s.fixed_one_way_ms) : json()},
                     {"terrestrial_factor", s.terrestrial_factor},
                     {"trace", s.trace}};
  return j;
}

FieldSeries build_fields(const ScenarioConfig& config, std::span<const SatelliteElement> elements) {
  const auto times = sample_times(config.snapshots.horizon_s, config.snapshots.step_s);
  return std::make_shared<const std::vector<DistanceField>>(
      distance_fields(config.shell, elements, config.stations, times, config.topology));
}

std::vector<int> candidate_stations(const ScenarioConfig& config) {
  if (!config.placement.candidates.empty()) {
    std::set<int> s(config.placement.candidates.begin(), config.placement.candidates.end());
    return {s.begin(), s.end()};
  }
  std::vector<int> all(config.stations.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

PlacementSolution run_placement(const ScenarioConfig& config, const FieldSeries& fields) {
  const auto& p = config.placement;
  const FieldSet fs(*fields);
  if (!p.fixed_controllers.empty()) {
    PlacementSolution sol;
    std::set<int> s(p.fixed_controllers.begin(), p.fixed_controllers.end());
    sol.selected.assign(s.begin(), s.end());
    sol.objective_km = evaluate(sol.selected, fs);
    sol.objective_ms = distance_to_latency_ms(sol.objective_km);
    sol.method = "fixed";
    return sol;
  }
  const auto candidates = candidate_stations(config);
  const std::uint64_t seed = placement_seed(config);
  switch (p.method) {
    case PlacementMethod::Cnpa: {
      PlacementProblem problem;
      problem.fields = *fields;
      problem.candidates = candidates;
      problem.k = p.k;
      problem.clusters = std::min<int>(p.clusters, static_cast<int>(fields->size()));
      problem.seed = seed;
      problem.greedy_eval = p.greedy_eval;
      problem.max_passes = p.max_passes;
      return cnpa(problem);
    }
    case PlacementMethod::Exhaustive: return exhaustive_optimal(fs, candidates, p.k, p.exhaustive_budget);
    case PlacementMethod::Random: return random_select(fs, candidates, p.k, seed);
    case PlacementMethod::Single: return single_best(fs, candidates);
  }
  throw std::logic_error("unhandled placement method");
}

std::vector<MethodComparison> compare_methods(const ScenarioConfig& config, const FieldSeries& fields) {
  const FieldSet fs(*fields);
  const auto candidates = candidate_stations(config);
  const auto& p = config.placement;
  std::vector<MethodComparison> out;
  auto row = [](const PlacementSolution& s, std::string note = {}) {
    return MethodComparison{s.method, s.selected, s.objective_km, s.objective_ms, std::move(note)};
  };

  ScenarioConfig cnpa_cfg = config;
  cnpa_cfg.placement.method = PlacementMethod::Cnpa;
  cnpa_cfg.placement.fixed_controllers.clear();
  out.push_back(row(run_placement(cnpa_cfg, fields)));

  try {
    out.push_back(row(exhaustive_optimal(fs, candidates, p.k, p.exhaustive_budget)));
  } catch (const BudgetExceeded&) {
    out.push_back({"exhaustive", {}, kInfinity, kInfinity, "budget exceeded"});
  }

  const std::uint64_t base = stage_seed(config.seed, "random");
  std::vector<double> objectives(static_cast<std::size_t>(p.random_trials));
  parallel_for(objectives.size(), [&](std::size_t i) {
    objectives[i] = random_select(fs, candidates, p.k, base + i).objective_km;
  });
  double sum = 0.0;
  for (double v : objectives) sum += v;
  const double mean = sum / static_cast<double>(objectives.size());
  out.push_back({"random", {}, mean, distance_to_latency_ms(mean), "mean of " + std::to_string(p.random_trials) + " trials"});

  out.push_back(row(single_best(fs, candidates)));
  return out;
}

std::vector<HandoverSchedule> run_assignment(const ScenarioConfig& config, std::span<const SatelliteElement> elements,
                                             std::span<const int> controllers, const FieldSeries& fields) {
  const auto& params = config.assignment;
  std::shared_ptr<const std::vector<DistanceField>> net;
  if (params.metric == DistanceMetric::Network) {
    const auto times = sample_times(params.horizon_s, params.sample_dt_s);
    bool reuse = fields && fields->size() == times.size();
    for (std::size_t i = 0; reuse && i < times.size(); ++i) reuse = (*fields)[i].t == times[i];
    net = reuse ? fields
                : std::make_shared<const std::vector<DistanceField>>(
                      distance_fields(config.shell, elements, config.stations, times, config.topology));
  }
  std::vector<HandoverSchedule> out(elements.size());
  parallel_for(elements.size(), [&](std::size_t s) {
    const auto series = params.metric == DistanceMetric::Network
                            ? sample_network_distances(s, *net, controllers, params)
                            : sample_distances(elements[s], config.stations, controllers, params);
    out[s] = predict_handovers(series, params, s);
  });
  return out;
}

SimulationResult run_simulation(const ScenarioConfig& config, std::span<const HandoverSchedule> schedules,
                                std::span<const int> controllers, const FieldSeries& fields,
                                std::unique_ptr<ControlPlaneSim>* keep) {
  const auto& sc = config.simulation;
  std::shared_ptr<const LatencyModel> latency;
  if (sc.fixed_one_way_ms)
    latency = std::make_shared<FixedLatency>(*sc.fixed_one_way_ms);
  else
    latency = std::make_shared<SnapshotLatency>(fields, config.stations, sc.terrestrial_factor);

  SimOptions opt;
  opt.delays = sc.delays;
  opt.report_interval_s = sc.report_interval_s;
  opt.visibility_grace_s = sc.visibility_grace_s;
  opt.pods_per_satellite = sc.pods_per_satellite;
  opt.trace = sc.trace;

  const std::size_t n = schedules.size();
  auto sim = std::make_unique<ControlPlaneSim>(n, std::vector<int>(controllers.begin(), controllers.end()), latency, opt);
  for (std::size_t s = 0; s < n; ++s) sim->attach(s, schedules[s].initial, 0.0);

  const double horizon = config.assignment.horizon_s;
  std::mt19937_64 rng(stage_seed(config.seed, "reports"));
  std::vector<double> first(n);
  for (auto& f : first) f = uniform01(rng()) * sc.report_interval_s;
  sim->start_reports(first, horizon);

  struct Cursor {
    std::size_t next = 0;
    int current = -1;
  };
  std::vector<Cursor> cursors(n);
  for (std::size_t s = 0; s < n; ++s) cursors[s].current = schedules[s].initial;

  auto launch = [&](std::size_t s) {
    auto& c = cursors[s];
    const auto& events = schedules[s].events;
    while (c.next < events.size()) {
      const auto& e = events[c.next++];
      if (e.target == c.current) continue;
      c.current = e.target;
      sim->begin_handover(sc.protocol, s, e.target, std::max(e.t, sim->queue().now()));
      return;
    }
  };
  sim->set_on_complete([&](const HandoverRecord& r) { launch(r.sat); });
  for (std::size_t s = 0; s < n; ++s) launch(s);
  sim->run();
  sim->set_on_complete(nullptr);

  SimulationResult out;
  out.records = sim->records();
  for (const auto& r : out.records)
    if (!r.complete) throw std::logic_error("handover of node " + std::to_string(r.sat) + " did not complete");
  std::stable_sort(out.records.begin(), out.records.end(), [](const HandoverRecord& a, const HandoverRecord& b) {
    return a.sat != b.sat ? a.sat < b.sat : a.t_start < b.t_start;
  });
  out.reports = sim->reports();
  std::stable_sort(out.reports.begin(), out.reports.end(), [](const ReportSample& a, const ReportSample& b) {
    return a.sat != b.sat ? a.sat < b.sat : a.t_generated < b.t_generated;
  });
  out.trace = sim->trace();
  out.requests = sim->requests();
  if (keep) *keep = std::move(sim);
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  ScenarioResult r;
  r.elements = generate_constellation(config.shell);
  r.fields = build_fields(config, r.elements);
  r.placement = run_placement(config, r.fields);
  r.schedules = run_assignment(config, r.elements, r.placement.selected, r.fields);
  r.simulation = run_simulation(config, r.schedules, r.placement.selected, r.fields);
  return r;
}

}  // namespace leocp

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "leocp/pipeline.hpp"
#include "leocp/reporting.hpp"

using namespace leocp;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kFixtures = fs::path(LEOCP_SOURCE_DIR) / "fixtures";

struct TempDir {
  fs::path path;
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path = fs::temp_directory_path() / ("leocp_test_" + std::to_string(rng()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json minimal() {
  return json::parse(R"({
    "shell": {"planes": 2, "sats_per_plane": 4, "inclination_deg": 53.0, "altitude_km": 2000.0},
    "stations": [{"name": "a", "latitude_deg": 0.0, "longitude_deg": 0.0},
                 {"name": "b", "latitude_deg": 0.0, "longitude_deg": 180.0}]
  })");
}

std::string config_error_field(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field;
  }
  return "<none>";
}

fs::path write_config(const fs::path& dir, json j, const fs::path& out) {
  j["output_dir"] = out.string();
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

}  // namespace

TEST_CASE("desk fixture parses with defaults filled in") {
  const auto c = load_config(kFixtures / "desk.json");
  CHECK(c.name == "desk-walker-6x8");
  CHECK(c.seed == 7);
  CHECK(c.shell.size() == 48);
  CHECK(c.stations.size() == 4);
  CHECK(c.stations[2].name == "tokyo");
  CHECK(c.stations[3].id == 3);
  CHECK(c.placement.k == 2);
  CHECK(c.placement.method == PlacementMethod::Cnpa);
  CHECK(c.assignment.delta == doctest::Approx(0.9));
  CHECK(c.assignment.horizon_s == c.snapshots.horizon_s);
  CHECK(c.simulation.protocol == Protocol::Seamless);
  CHECK(c.simulation.visibility_grace_s == c.simulation.report_interval_s);
}

TEST_CASE("minimal config takes documented defaults") {
  const auto c = parse_config(minimal());
  CHECK(c.seed == 1);
  CHECK(c.snapshots.horizon_s == 7200.0);
  CHECK(c.snapshots.step_s == 60.0);
  CHECK(c.placement.clusters == 8);
  CHECK(c.placement.greedy_eval == GreedyEval::Representatives);
  CHECK(c.simulation.report_interval_s == 10.0);
  CHECK_FALSE(c.simulation.fixed_one_way_ms.has_value());
  CHECK_FALSE(c.placement.seed.has_value());
}

TEST_CASE("unknown keys are rejected with their path") {
  auto j = minimal();
  j["placement"] = {{"kk", 2}};
  CHECK(config_error_field(j) == "placement.kk");

  j = minimal();
  j["extra"] = true;
  CHECK(config_error_field(j) == "extra");

  j = minimal();
  j["shell"]["altitude"] = 550;
  CHECK(config_error_field(j) == "shell.altitude");

  j = minimal();
  j["stations"][1]["lat"] = 1.0;
  CHECK(config_error_field(j).find("stations") == 0);

  j = minimal();
  j["simulation"] = {{"delays", {{"pod_stopp", 1.0}}}};
  CHECK(config_error_field(j).find("simulation.delays") == 0);
}

TEST_CASE("type mismatches and bad values are rejected") {
  auto j = minimal();
  j["placement"] = {{"k", "two"}};
  CHECK(config_error_field(j) == "placement.k");

  j = minimal();
  j["seed"] = -3;
  CHECK(config_error_field(j) == "seed");

  j = minimal();
  j["assignment"] = {{"delta", 1.5}};
  CHECK(config_error_field(j).find("assignment") == 0);

  j = minimal();
  j["simulation"] = {{"protocol", "teleport"}};
  CHECK(config_error_field(j) == "simulation.protocol");

  j = minimal();
  j["placement"] = {{"k", 3}};
  CHECK(config_error_field(j) == "placement.k");

  j = minimal();
  j.erase("shell");
  CHECK(config_error_field(j) == "shell");

  j = minimal();
  j.erase("stations");
  CHECK(config_error_field(j) == "stations");

  CHECK(config_error_field(json::array()) == "<root>");
}

TEST_CASE("stations_file resolves relative to the config") {
  TempDir tmp;
  fs::create_directories(tmp.path / "sub");
  std::ofstream(tmp.path / "sub" / "gs.json") << minimal()["stations"].dump();
  auto j = minimal();
  j.erase("stations");
  j["stations_file"] = "sub/gs.json";
  std::ofstream(tmp.path / "c.json") << j.dump();
  const auto c = load_config(tmp.path / "c.json");
  REQUIRE(c.stations.size() == 2);
  CHECK(c.stations[1].longitude_deg == 180.0);

  j["stations"] = minimal()["stations"];
  CHECK(config_error_field(j) == "stations_file");

  const auto eq = load_config(kFixtures / "starlink_equatorial_legacy.json");
  CHECK(eq.stations.size() == 2);
  CHECK(eq.shell.size() == 1584);
}

TEST_CASE("effective config round-trips") {
  for (const char* name : {"desk.json", "desk_legacy_lan.json", "place_m6.json", "oneweb_placement.json"}) {
    CAPTURE(name);
    const auto c = load_config(kFixtures / name);
    const auto j = to_json(c);
    CHECK(to_json(parse_config(j)) == j);
  }
  auto j = minimal();
  j["placement"] = {{"seed", 99}, {"candidates", {1, 0}}};
  j["simulation"] = {{"fixed_one_way_ms", 0.5}, {"delays", {{"register", 0.7}}}};
  const auto c = parse_config(j);
  CHECK(*c.placement.seed == 99);
  CHECK(c.simulation.delays.register_node == 0.7);
  CHECK(to_json(parse_config(to_json(c))) == to_json(c));
}

TEST_CASE("overrides win over the file and are re-validated") {
  auto c = load_config(kFixtures / "desk.json");
  Overrides o;
  o.seed = 11;
  o.delta = 0.8;
  o.k = 3;
  o.protocol = Protocol::Legacy;
  o.method = PlacementMethod::Single;
  apply_overrides(c, o);
  CHECK(c.seed == 11);
  CHECK(c.assignment.delta == 0.8);
  CHECK(c.placement.k == 3);
  CHECK(c.simulation.protocol == Protocol::Legacy);
  CHECK(c.placement.method == PlacementMethod::Single);
  CHECK(c.placement.clusters == 8);

  Overrides bad;
  bad.k = 9;
  CHECK_THROWS_AS(apply_overrides(c, bad), ConfigError);
}

TEST_CASE("stage seeds are stable and distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s : {0ULL, 1ULL, 7ULL})
    for (const char* st : {"placement", "random", "reports", "kmeans"}) seen.insert(stage_seed(s, st));
  CHECK(seen.size() == 12);
  CHECK(stage_seed(7, "placement") == stage_seed(7, "placement"));
  CHECK(uniform01(0) == 0.0);
  CHECK(uniform01(~0ULL) < 1.0);
  CHECK(uniform01(1ULL << 63) == 0.5);
}

TEST_CASE("desk fixture is fully reachable and deterministic") {
  const auto c = load_config(kFixtures / "desk.json");
  const auto a = run_scenario(c);
  const auto b = run_scenario(c);
  for (const auto& f : *a.fields)
    for (std::size_t i = 0; i < f.reachable.size(); ++i) REQUIRE(f.reachable[i]);
  CHECK(a.fields->size() == 121);
  CHECK(a.placement.selected == b.placement.selected);
  CHECK(a.placement.objective_km == b.placement.objective_km);
  REQUIRE(a.simulation.records.size() == b.simulation.records.size());
  CHECK(!a.simulation.records.empty());
  for (std::size_t i = 0; i < a.simulation.records.size(); ++i) {
    CHECK(a.simulation.records[i].t_start == b.simulation.records[i].t_start);
    CHECK(a.simulation.records[i].duration == b.simulation.records[i].duration);
  }
  for (const auto& r : a.simulation.records) {
    CHECK(r.complete);
    CHECK(r.invisibility == 0.0);
    CHECK(r.pod_unavailability == 0.0);
  }
}

TEST_CASE("compare_methods lists every baseline") {
  const auto c = load_config(kFixtures / "desk.json");
  const auto elements = generate_constellation(c.shell);
  const auto fields = build_fields(c, elements);
  const auto rows = compare_methods(c, fields);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].method == "cnpa");
  CHECK(rows[1].method == "exhaustive");
  CHECK(rows[2].method == "random");
  CHECK(rows[3].method == "single");
  CHECK(rows[1].objective_km <= rows[0].objective_km);
  CHECK(rows[0].objective_km <= rows[2].objective_km);
  CHECK(rows[0].objective_km <= rows[3].objective_km);
  CHECK(rows[3].selected.size() == 1);
}

TEST_CASE("place subcommand selects k stations") {
  TempDir tmp;
  auto c = load_config(kFixtures / "place_m6.json");
  std::ostringstream log;
  run_stages(c, "place", tmp.path, log);
  const auto j = json::parse(slurp(tmp.path / files::kPlacement));
  CHECK(j["selected_ids"].size() == 2);
  CHECK(fs::exists(tmp.path / files::kEffectiveConfig));
  CHECK(fs::exists(tmp.path / files::kPlacementComparison));
  CHECK(log.str().find("place: method cnpa") != std::string::npos);
}

TEST_CASE("run_pipeline writes every artefact and is byte-identical across runs") {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, json::parse(slurp(kFixtures / "desk.json")), tmp.path / "a");
  std::ostringstream log, err;
  REQUIRE(run_pipeline(cfg, "all", {}, log, err) == 0);
  Overrides o;
  o.out = (tmp.path / "b").string();
  REQUIRE(run_pipeline(cfg, "all", o, log, err) == 0);
  CHECK(err.str().empty());
  std::size_t files_seen = 0;
  for (const auto& e : fs::directory_iterator(tmp.path / "a")) {
    const auto name = e.path().filename();
    CAPTURE(name.string());
    if (name == files::kEffectiveConfig) continue;
    REQUIRE(fs::exists(tmp.path / "b" / name));
    CHECK(slurp(e.path()) == slurp(tmp.path / "b" / name));
    ++files_seen;
  }
  CHECK(files_seen == 15);
  const auto eff = json::parse(slurp(tmp.path / "b" / files::kEffectiveConfig));
  CHECK(eff["output_dir"] == (tmp.path / "b").string());
}

TEST_CASE("effective config records overrides") {
  TempDir tmp;
  const auto cfg = write_config(tmp.path, json::parse(slurp(kFixtures / "desk.json")), tmp.path / "o");
  Overrides o;
  o.seed = 42;
  o.delta = 0.75;
  o.method = PlacementMethod::Single;
  std::ostringstream log, err;
  REQUIRE(run_pipeline(cfg, "gen", o, log, err) == 0);
  const auto eff = json::parse(slurp(tmp.path / "o" / files::kEffectiveConfig));
  CHECK(eff["seed"] == 42);
  CHECK(eff["assignment"]["delta"] == 0.75);
  CHECK(eff["placement"]["method"] == "single");
  CHECK(eff["placement"]["k"] == 2);
  CHECK(to_json(parse_config(eff)) == eff);
}

TEST_CASE("legacy protocol override reproduces the LAN calibration") {
  TempDir tmp;
  auto j = json::parse(slurp(kFixtures / "desk.json"));
  j["simulation"]["fixed_one_way_ms"] = 0.2;
  const auto cfg = write_config(tmp.path, j, tmp.path / "l");
  Overrides o;
  o.protocol = Protocol::Legacy;
  std::ostringstream log, err;
  REQUIRE(run_pipeline(cfg, "all", o, log, err) == 0);
  const auto m = json::parse(slurp(tmp.path / "l" / files::kMetrics));
  const double mean = m["aggregate"]["mean_duration_s"];
  CHECK(mean == doctest::Approx(8.35).epsilon(0.1));
  const auto table = slurp(tmp.path / "l" / files::kOverheadTable);
  CHECK(table.rfind("constellation,total_handovers,", 0) == 0);
}

TEST_CASE("exit codes separate config and stage failures") {
  TempDir tmp;
  std::ostringstream log, err;
  std::ofstream(tmp.path / "bad.json") << R"({"shell": {"planes": 2}, "bogus": 1})";
  CHECK(run_pipeline(tmp.path / "bad.json", "all", {}, log, err) == 2);
  CHECK(err.str().rfind("config error:", 0) == 0);

  std::ofstream(tmp.path / "broken.json") << "{ not json";
  CHECK(run_pipeline(tmp.path / "broken.json", "gen", {}, log, err) == 2);

  err.str("");
  const auto cfg = write_config(tmp.path, minimal(), tmp.path / "empty");
  CHECK(run_pipeline(cfg, "report", {}, log, err) == 3);
  CHECK(err.str().find("stage 'report'") != std::string::npos);

  const auto c = parse_config(minimal());
  CHECK_THROWS_AS(run_stages(c, "frobnicate", tmp.path, log), std::invalid_argument);
}

TEST_CASE("fixed controllers bypass optimisation") {
  auto c = parse_config(minimal());
  c.placement.fixed_controllers = {1, 0};
  const auto elements = generate_constellation(c.shell);
  const auto fields = build_fields(c, elements);
  const auto sol = run_placement(c, fields);
  CHECK(sol.method == "fixed");
  CHECK(sol.selected == std::vector<int>{0, 1});
}

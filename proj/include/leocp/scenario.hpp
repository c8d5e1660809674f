#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "leocp/assignment.hpp"
#include "leocp/handover.hpp"
#include "leocp/orbit.hpp"
#include "leocp/placement.hpp"
#include "leocp/topology.hpp"

namespace leocp {

/// Schema violation; `field` is the dotted path of the offending key.
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_, const std::string& what)
      : std::runtime_error(field_ + ": " + what), field(std::move(field_)) {}
  std::string field;
};

enum class PlacementMethod { Cnpa, Exhaustive, Random, Single };

const char* to_string(PlacementMethod m);
PlacementMethod parse_method(const std::string& name);

struct SnapshotConfig {
  double horizon_s = 7200.0;
  double step_s = 60.0;
};

struct PlacementConfig {
  int k = 2;
  int clusters = 8;
  PlacementMethod method = PlacementMethod::Cnpa;
  GreedyEval greedy_eval = GreedyEval::Representatives;
  int max_passes = 50;
  int random_trials = 100;
  double exhaustive_budget = kDefaultExhaustiveBudget;
  std::vector<int> candidates;             // empty: every station
  std::optional<std::uint64_t> seed;       // default: derived from the run seed
  std::vector<int> fixed_controllers;      // non-empty: skip optimisation
};

struct SimulationConfig {
  Protocol protocol = Protocol::Seamless;
  DelayProfile delays;
  double report_interval_s = 10.0;
  double visibility_grace_s = 10.0;
  int pods_per_satellite = 1;
  std::optional<double> fixed_one_way_ms;  // replaces snapshot latencies
  double terrestrial_factor = 2.0;
  bool trace = false;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  WalkerShell shell;
  std::vector<GroundStation> stations;
  TopologyOptions topology;
  SnapshotConfig snapshots;
  PlacementConfig placement;
  AssignmentParams assignment;
  SimulationConfig simulation;
  std::string output_dir = "out";

  /// Cross-field checks; throws ConfigError.
  void validate() const;
};

/// Strict parse: unknown keys and type mismatches throw ConfigError.
/// Relative file references resolve against `base_dir`.
ScenarioConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// Effective configuration with stations inlined; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ScenarioConfig& config);

/// Independent stream seed for a named stage.
std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage);

/// Uniform in [0, 1) from the top 53 bits; identical across standard libraries.
double uniform01(std::uint64_t bits);

using FieldSeries = std::shared_ptr<const std::vector<DistanceField>>;

FieldSeries build_fields(const ScenarioConfig& config, std::span<const SatelliteElement> elements);

std::vector<int> candidate_stations(const ScenarioConfig& config);

/// Runs the configured placement method.
PlacementSolution run_placement(const ScenarioConfig& config, const FieldSeries& fields);

struct MethodComparison {
  std::string method;
  std::vector<int> selected;
  double objective_km = kInfinity;
  double objective_ms = kInfinity;
  std::string note;
};

/// cnpa, exhaustive (if within budget), random (mean over trials), single.
std::vector<MethodComparison> compare_methods(const ScenarioConfig& config, const FieldSeries& fields);

std::vector<HandoverSchedule> run_assignment(const ScenarioConfig& config, std::span<const SatelliteElement> elements,
                                             std::span<const int> controllers, const FieldSeries& fields);

struct SimulationResult {
  std::vector<HandoverRecord> records;
  std::vector<ReportSample> reports;
  std::vector<TraceEvent> trace;
  std::vector<HandoverRequest> requests;
};

/// Executes every scheduled handover on one event queue. Handovers of one
/// satellite are serialised: an event due while another is in flight starts
/// when it completes, and is dropped if the satellite already sits at its target.
SimulationResult run_simulation(const ScenarioConfig& config, std::span<const HandoverSchedule> schedules,
                                std::span<const int> controllers, const FieldSeries& fields,
                                std::unique_ptr<ControlPlaneSim>* keep = nullptr);

struct ScenarioResult {
  std::vector<SatelliteElement> elements;
  FieldSeries fields;
  PlacementSolution placement;
  std::vector<HandoverSchedule> schedules;
  SimulationResult simulation;
};

ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace leocp

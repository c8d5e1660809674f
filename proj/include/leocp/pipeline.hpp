#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leocp/scenario.hpp"

namespace leocp {

struct StageError : std::runtime_error {
  StageError(std::string stage_, const std::string& what)
      : std::runtime_error("stage '" + stage_ + "' failed: " + what), stage(std::move(stage_)) {}
  std::string stage;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<Protocol> protocol;
  std::optional<PlacementMethod> method;
  std::optional<double> delta;
  std::optional<int> k;
  std::optional<int> clusters;
};

/// Flag values win over the file; the result is re-validated.
void apply_overrides(ScenarioConfig& config, const Overrides& overrides);

const std::vector<std::string>& subcommands();

/// Output file names, relative to the output directory.
namespace files {
inline constexpr const char* kEffectiveConfig = "effective_config.json";
inline constexpr const char* kConstellation = "constellation.csv";
inline constexpr const char* kStations = "stations.csv";
inline constexpr const char* kDistances = "distances.csv";
inline constexpr const char* kSnapshots = "snapshots.json";
inline constexpr const char* kPlacement = "placement.json";
inline constexpr const char* kPlacementComparison = "placement_comparison.csv";
inline constexpr const char* kScheduleCsv = "schedule.csv";
inline constexpr const char* kScheduleJson = "schedule.json";
inline constexpr const char* kHandovers = "handovers.csv";
inline constexpr const char* kReportLatency = "report_latency.csv";
inline constexpr const char* kTrace = "trace.jsonl";
inline constexpr const char* kOverheadTable = "overhead_table.csv";
inline constexpr const char* kPerSatellite = "per_satellite.csv";
inline constexpr const char* kLatencyCdf = "report_latency_cdf.csv";
inline constexpr const char* kDurationCdf = "handover_duration_cdf.csv";
inline constexpr const char* kMetrics = "metrics.json";
}  // namespace files

/// Runs one subcommand on a validated config, writing under `out_dir`.
/// Throws StageError naming the failing stage.
void run_stages(const ScenarioConfig& config, const std::string& subcommand, const std::filesystem::path& out_dir,
                std::ostream& log);

/// Loads, overrides, runs. Returns 0 on success, 2 on config errors, 3 on stage errors.
int run_pipeline(const std::filesystem::path& config_path, const std::string& subcommand, const Overrides& overrides,
                 std::ostream& log, std::ostream& err);

}  // namespace leocp

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"
#include "leocp/orbit.hpp"

namespace leocp {

inline constexpr double kSpeedOfLightKmPerMs = 299.792458;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class IslPairing {
  SameSlot,            // +Grid: same slot index in the adjacent plane
  NearestPerSnapshot,  // nearest satellite in the adjacent plane at time t
};

struct TopologyOptions {
  double min_elevation_deg = 25.0;
  IslPairing isl_pairing = IslPairing::SameSlot;
  int max_gsl_per_sat = 0;  // 0 = unlimited
};

struct IslEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double km = 0.0;
};

struct GslEdge {
  std::size_t sat = 0;
  std::size_t station = 0;
  double km = 0.0;
};

/// The satellite-ground graph at one instant. Satellite ids are linear
/// plane-major indices, station ids are positions in the station list.
struct TopologySnapshot {
  double t = 0.0;
  std::vector<EcefPosition> sat_positions;
  std::vector<EcefPosition> station_positions;
  std::vector<IslEdge> isl_edges;
  std::vector<GslEdge> gsl_edges;

  std::size_t n_sats() const { return sat_positions.size(); }
  std::size_t n_stations() const { return station_positions.size(); }
};

/// Shortest-path length from every satellite to every station, row-major
/// [sat][station]. Unreachable pairs hold +inf.
struct DistanceField {
  double t = 0.0;
  std::size_t n_sats = 0;
  std::size_t n_stations = 0;
  std::vector<double> d;
  std::vector<std::uint8_t> reachable;

  DistanceField() = default;
  DistanceField(double t_, std::size_t sats, std::size_t stations)
      : t(t_), n_sats(sats), n_stations(stations), d(sats * stations, kInfinity), reachable(sats * stations, 0) {}

  double at(std::size_t sat, std::size_t station) const { return d[sat * n_stations + station]; }
  bool is_reachable(std::size_t sat, std::size_t station) const { return reachable[sat * n_stations + station] != 0; }
  std::span<const double> row(std::size_t sat) const { return {d.data() + sat * n_stations, n_stations}; }
};

/// Undirected +Grid pairs, each listed once with a < b.
std::vector<std::pair<std::size_t, std::size_t>> build_isl_grid(const WalkerShell& shell);

double elevation_deg(const EcefPosition& sat, const EcefPosition& gs);
bool visible(const EcefPosition& sat, const EcefPosition& gs, double min_elevation_deg);

TopologySnapshot build_snapshot(const WalkerShell& shell, std::span<const SatelliteElement> elements,
                                std::span<const GroundStation> stations, double t,
                                const TopologyOptions& options = {});

/// Dijkstra from each station over the union of ISL and GSL edges.
DistanceField shortest_distances(const TopologySnapshot& snapshot);

/// Snapshot + shortest paths at each time, computed in parallel.
std::vector<DistanceField> distance_fields(const WalkerShell& shell, std::span<const SatelliteElement> elements,
                                           std::span<const GroundStation> stations, std::span<const double> times,
                                           const TopologyOptions& options = {});

std::vector<double> sample_times(double horizon_s, double step_s);

inline double distance_to_latency_ms(double km) { return km / kSpeedOfLightKmPerMs; }

nlohmann::json to_json(const TopologySnapshot& snapshot);
nlohmann::json to_json(const DistanceField& field);

/// One row per (t, sat, station, km); unreachable pairs are written as "inf".
void write_distance_csv(std::ostream& os, std::span<const DistanceField> fields);

}  // namespace leocp

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "leocp/orbit.hpp"
#include "leocp/topology.hpp"

namespace leocp {

struct OutOfHorizon : std::out_of_range {
  using std::out_of_range::out_of_range;
};

enum class DistanceMetric { Geometric, Network };

struct AssignmentParams {
  double horizon_s = 43200.0;
  double sample_dt_s = 60.0;
  double decide_dt_s = 1.0;
  double delta = 0.9;  // artifact default; 1.0 is pure nearest-controller assignment
  DistanceMetric metric = DistanceMetric::Geometric;

  void validate() const;
};

/// Sampled distance from one satellite to one controller over [0, horizon].
struct DistanceSeries {
  int gs_id = 0;
  std::vector<double> t;
  std::vector<double> km;

  double horizon() const { return t.empty() ? 0.0 : t.back(); }
};

struct HandoverEvent {
  double t = 0.0;
  int source = 0;
  int target = 0;
};

struct HandoverSchedule {
  std::size_t sat = 0;
  int initial = -1;
  std::vector<HandoverEvent> events;

  /// Controller assigned at time t.
  int controller_at(double t) const;
};

using PositionFn = std::function<EcefPosition(double)>;

/// Geometric sampling of an arbitrary trajectory against fixed controllers.
std::vector<DistanceSeries> sample_distances(const PositionFn& position, std::span<const GroundStation> stations,
                                             std::span<const int> controllers, const AssignmentParams& params);

std::vector<DistanceSeries> sample_distances(const SatelliteElement& sat, std::span<const GroundStation> stations,
                                             std::span<const int> controllers, const AssignmentParams& params);

/// Network-metric sampling from shortest-path fields taken at the sample
/// times of `params` (fields[i].t == sample_times(horizon, sample_dt)[i]).
std::vector<DistanceSeries> sample_network_distances(std::size_t sat, std::span<const DistanceField> fields,
                                                     std::span<const int> controllers, const AssignmentParams& params);

/// Piecewise-linear value at t; throws OutOfHorizon outside [0, horizon].
double interpolate(const DistanceSeries& series, double t);

HandoverSchedule predict_handovers(std::span<const DistanceSeries> series, const AssignmentParams& params,
                                   std::size_t sat = 0);

/// Mean interpolated distance to the assigned controller over the decision grid.
double mean_assigned_distance(std::span<const DistanceSeries> series, const HandoverSchedule& schedule,
                              const AssignmentParams& params);

std::vector<double> decision_times(const AssignmentParams& params);

nlohmann::json to_json(const HandoverSchedule& schedule);

/// Rows (sat_id, t, source_gs, target_gs).
void write_schedule_csv(std::ostream& os, std::span<const HandoverSchedule> schedules);

}  // namespace leocp

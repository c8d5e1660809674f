#include "leocp/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "leocp/format.hpp"

namespace leocp {

void AssignmentParams::validate() const {
  if (!(decide_dt_s > 0.0)) throw std::invalid_argument("assignment.decide_dt_s must be > 0");
  if (!(decide_dt_s <= sample_dt_s)) throw std::invalid_argument("assignment.decide_dt_s must be <= sample_dt_s");
  if (!(sample_dt_s <= horizon_s)) throw std::invalid_argument("assignment.sample_dt_s must be <= horizon_s");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("assignment.delta must be in (0, 1]");
}

int HandoverSchedule::controller_at(double t) const {
  int g = initial;
  for (const auto& e : events) {
    if (e.t > t) break;
    g = e.target;
  }
  return g;
}

std::vector<DistanceSeries> sample_distances(const PositionFn& position, std::span<const GroundStation> stations,
                                             std::span<const int> controllers, const AssignmentParams& params) {
  params.validate();
  if (controllers.empty()) throw std::invalid_argument("assignment needs at least one controller");
  const auto times = sample_times(params.horizon_s, params.sample_dt_s);
  std::vector<DistanceSeries> out(controllers.size());
  std::vector<EcefPosition> gs_pos;
  for (std::size_t c = 0; c < controllers.size(); ++c) {
    out[c].gs_id = controllers[c];
    out[c].t = times;
    out[c].km.reserve(times.size());
    gs_pos.push_back(station_position(stations[static_cast<std::size_t>(controllers[c])]));
  }
  for (double t : times) {
    const EcefPosition p = position(t);
    for (std::size_t c = 0; c < controllers.size(); ++c) out[c].km.push_back(distance(p, gs_pos[c]));
  }
  return out;
}

std::vector<DistanceSeries> sample_distances(const SatelliteElement& sat, std::span<const GroundStation> stations,
                                             std::span<const int> controllers, const AssignmentParams& params) {
  return sample_distances([&sat](double t) { return propagate(sat, t); }, stations, controllers, params);
}

std::vector<DistanceSeries> sample_network_distances(std::size_t sat, std::span<const DistanceField> fields,
                                                     std::span<const int> controllers, const AssignmentParams& params) {
  params.validate();
  if (controllers.empty()) throw std::invalid_argument("assignment needs at least one controller");
  const auto times = sample_times(params.horizon_s, params.sample_dt_s);
  if (fields.size() != times.size()) throw std::invalid_argument("network fields do not match the sample grid");
  std::vector<DistanceSeries> out(controllers.size());
  for (std::size_t c = 0; c < controllers.size(); ++c) {
    out[c].gs_id = controllers[c];
    out[c].t = times;
    out[c].km.reserve(times.size());
    for (const auto& f : fields) out[c].km.push_back(f.at(sat, static_cast<std::size_t>(controllers[c])));
  }
  return out;
}

double interpolate(const DistanceSeries& series, double t) {
  constexpr double kEps = 1e-9;
  if (series.t.empty() || t < -kEps || t > series.horizon() + kEps)
    throw OutOfHorizon("time " + std::to_string(t) + " outside interpolation horizon");
  if (series.t.size() == 1) return series.km.front();
  t = std::clamp(t, 0.0, series.horizon());
  auto it = std::upper_bound(series.t.begin(), series.t.end(), t);
  if (it == series.t.end()) return series.km.back();
  const auto hi = static_cast<std::size_t>(it - series.t.begin());
  const std::size_t lo = hi - 1;
  const double t0 = series.t[lo], t1 = series.t[hi];
  if (t == t0) return series.km[lo];
  const double w = (t - t0) / (t1 - t0);
  return series.km[lo] + w * (series.km[hi] - series.km[lo]);
}

std::vector<double> decision_times(const AssignmentParams& params) {
  return sample_times(params.horizon_s, params.decide_dt_s);
}

namespace {

// Lowest gs_id wins ties.
std::size_t nearest(std::span<const double> values, std::span<const DistanceSeries> series) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best] || (values[i] == values[best] && series[i].gs_id < series[best].gs_id)) best = i;
  }
  return best;
}

}  // namespace

HandoverSchedule predict_handovers(std::span<const DistanceSeries> series, const AssignmentParams& params,
                                   std::size_t sat) {
  params.validate();
  if (series.empty()) throw std::invalid_argument("predict_handovers needs at least one series");
  HandoverSchedule schedule;
  schedule.sat = sat;
  std::vector<double> values(series.size());
  auto eval_at = [&](double t) {
    for (std::size_t i = 0; i < series.size(); ++i) values[i] = interpolate(series[i], t);
  };
  eval_at(0.0);
  std::size_t curr = nearest(values, series);
  schedule.initial = series[curr].gs_id;
  for (double t : decision_times(params)) {
    eval_at(t);
    const std::size_t best = nearest(values, series);
    // f_min / f_curr < delta, written without the division.
    if (best != curr && values[best] < params.delta * values[curr]) {
      schedule.events.push_back({t, series[curr].gs_id, series[best].gs_id});
      curr = best;
    }
  }
  return schedule;
}

double mean_assigned_distance(std::span<const DistanceSeries> series, const HandoverSchedule& schedule,
                              const AssignmentParams& params) {
  const auto times = decision_times(params);
  double sum = 0.0;
  std::size_t next = 0;
  int current = schedule.initial;
  for (double t : times) {
    while (next < schedule.events.size() && schedule.events[next].t <= t) current = schedule.events[next++].target;
    const auto it = std::find_if(series.begin(), series.end(), [&](const DistanceSeries& s) { return s.gs_id == current; });
    if (it == series.end()) throw std::invalid_argument("schedule references a controller with no series");
    sum += interpolate(*it, t);
  }
  return times.empty() ? 0.0 : sum / static_cast<double>(times.size());
}

nlohmann::json to_json(const HandoverSchedule& schedule) {
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : schedule.events) events.push_back({{"t", e.t}, {"source", e.source}, {"target", e.target}});
  return {{"sat_id", schedule.sat}, {"initial", schedule.initial}, {"events", std::move(events)}};
}

void write_schedule_csv(std::ostream& os, std::span<const HandoverSchedule> schedules) {
  os << "sat_id,t,source_gs,target_gs\n";
  for (const auto& s : schedules)
    for (const auto& e : s.events) os << s.sat << ',' << fixed(e.t, 3) << ',' << e.source << ',' << e.target << '\n';
}

}  // namespace leocp

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "leocp/event_queue.hpp"
#include "leocp/orbit.hpp"
#include "leocp/topology.hpp"

namespace leocp {

struct ProtocolViolation : std::logic_error {
  using std::logic_error::logic_error;
};

struct ConcurrentHandover : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Unreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BindingState { Bound, Binding, Releasing, Released };
enum class RequestStatus { Created, Processing, Finished, Completed };
enum class Protocol { Seamless, Legacy };

const char* to_string(BindingState s);
const char* to_string(RequestStatus s);
const char* to_string(Protocol p);
Protocol parse_protocol(const std::string& name);

/// Allowed: Released->Binding->Bound on the target, Bound->Releasing->Released on the source.
bool transition_allowed(BindingState from, BindingState to);

/// True for states in which a control node still tracks the node's status.
inline bool holds_node(BindingState s) { return s != BindingState::Released; }

/// Local processing times in seconds. Defaults reproduce the legacy
/// drain-and-rejoin timings measured on a LAN with sub-millisecond RTT.
struct DelayProfile {
  double controller_process = 0.1;
  double persist = 0.05;
  double client_init = 0.2;
  double status_report_process = 1.05;
  double pod_stop = 1.05;
  double pod_start = 4.0;
  double drain_per_pod = 2.75;
  double register_node = 1.2;
  double legacy_cleanup = 2.0;
  int auth_roundtrips = 2;  // legacy only; seamless uses preloaded certificates

  static DelayProfile zero();
  void validate() const;
};

nlohmann::json to_json(const DelayProfile& d);
/// Applies the keys present in `j`; unknown keys throw std::invalid_argument.
void apply_overrides(DelayProfile& d, const nlohmann::json& j);

struct Endpoint {
  enum class Kind { Satellite, Station };
  Kind kind = Kind::Satellite;
  std::size_t id = 0;

  static Endpoint sat(std::size_t i) { return {Kind::Satellite, i}; }
  static Endpoint station(std::size_t g) { return {Kind::Station, g}; }
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

class LatencyModel {
 public:
  virtual ~LatencyModel() = default;
  /// One-way latency in ms; +inf when no path exists at t.
  virtual double one_way_ms(Endpoint a, Endpoint b, double t) const = 0;
};

/// Same one-way latency between any two distinct endpoints.
class FixedLatency final : public LatencyModel {
 public:
  explicit FixedLatency(double one_way_ms) : ms_(one_way_ms) {}
  double one_way_ms(Endpoint a, Endpoint b, double) const override { return a == b ? 0.0 : ms_; }

 private:
  double ms_;
};

/// Satellite-station latency from the nearest-in-time distance field;
/// station-station latency from great-circle distance times a terrestrial factor.
class SnapshotLatency final : public LatencyModel {
 public:
  SnapshotLatency(std::shared_ptr<const std::vector<DistanceField>> fields, std::vector<GroundStation> stations,
                  double terrestrial_factor = 2.0);
  double one_way_ms(Endpoint a, Endpoint b, double t) const override;
  const DistanceField& nearest_field(double t) const;

 private:
  std::shared_ptr<const std::vector<DistanceField>> fields_;
  std::vector<GroundStation> stations_;
  double factor_;
};

double great_circle_km(const GroundStation& a, const GroundStation& b);

struct Pod {
  std::string name;
  bool running = true;
};

struct NodeEntry {
  BindingState state = BindingState::Released;
  bool cordoned = false;
  double last_report_time = 0.0;
  std::vector<std::string> pods;  // pod records known to this control node
};

struct ControlNodeState {
  int gs_id = 0;
  std::map<std::size_t, NodeEntry> registry;

  /// Nodes the scheduler may place pods on: Bound and not cordoned.
  std::vector<std::size_t> schedulable_nodes() const;
  /// Nodes subject to health checks: Bound only.
  std::vector<std::size_t> health_checked_nodes() const;
};

struct SatelliteAgent {
  std::size_t sat_id = 0;
  int active_gs = -1;   // -1 while detached (legacy rejoin)
  int pending_gs = -1;  // target channel being prepared during a seamless handover
  std::vector<Pod> pods;
  std::string pod_cidr;
  bool in_flight = false;
};

std::string pod_cidr_for(std::size_t sat);

struct HandoverRequest {
  std::size_t request_id = 0;
  std::size_t node_id = 0;
  int source_gs = 0;
  int target_gs = 0;
  RequestStatus status = RequestStatus::Created;
  std::array<double, 4> timestamps{};
  std::array<std::uint64_t, 4> sequence{};
};

struct HandoverRecord {
  std::size_t sat = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double duration = 0.0;
  double invisibility = 0.0;
  double pod_unavailability = 0.0;
  Protocol protocol = Protocol::Seamless;
  int source = 0;
  int target = 0;
  // Protocol milestones; NaN where a protocol has no such step.
  double t_target_bound = 0.0;
  double t_source_released = 0.0;
  double t_removed = 0.0;
  double t_visible = 0.0;
  double t_pods_stopped = 0.0;
  std::optional<std::size_t> request_id;
  bool complete = false;
};

struct TraceEvent {
  double t = 0.0;
  std::uint64_t seq = 0;
  std::size_t sat = 0;
  std::string event;
  int gs = -1;
};

nlohmann::json to_json(const TraceEvent& e);

struct SimOptions {
  DelayProfile delays;
  double report_interval_s = 10.0;
  double visibility_grace_s = 10.0;
  int pods_per_satellite = 1;
  bool trace = false;
};

struct ReportSample {
  std::size_t sat = 0;
  double t_generated = 0.0;
  double latency_ms = 0.0;
};

/// Control nodes plus satellite agents driven by one global event queue.
class ControlPlaneSim {
 public:
  ControlPlaneSim(std::size_t n_sats, std::vector<int> control_nodes, std::shared_ptr<const LatencyModel> latency,
                  SimOptions options);

  /// Initial join: Bound at `gs`, Released at every other control node.
  void attach(std::size_t sat, int gs, double t = 0.0);

  /// Periodic status reports from `first` (per satellite) until `until`.
  void start_reports(std::span<const double> first, double until);

  /// Schedules a handover at t0; the record completes as the queue runs.
  std::size_t begin_handover(Protocol protocol, std::size_t sat, int target, double t0);

  HandoverRecord run_seamless_handover(std::size_t sat, int target, double t0);
  HandoverRecord run_legacy_handover(std::size_t sat, int target, double t0);

  /// One-way latency in ms between endpoints at t.
  double latency(Endpoint a, Endpoint b, double t) const;

  /// Some control node holds the node in {Bound, Binding, Releasing} with a
  /// status report no older than report_interval + grace.
  bool node_visible(std::size_t sat, double t) const;

  /// Maximal intervals [from, to) during which node_visible is false.
  std::vector<std::pair<double, double>> invisible_intervals(std::size_t sat) const;

  /// Called whenever a handover record completes (pods restored for legacy).
  void set_on_complete(std::function<void(const HandoverRecord&)> fn) { on_complete_ = std::move(fn); }

  EventQueue& queue() { return queue_; }
  void run() { queue_.run(); }

  const std::vector<HandoverRecord>& records() const { return records_; }
  const std::vector<HandoverRequest>& requests() const { return requests_; }
  const std::vector<TraceEvent>& trace() const { return trace_; }
  const std::vector<ReportSample>& reports() const { return reports_; }
  const ControlNodeState& control_node(int gs) const;
  const SatelliteAgent& agent(std::size_t sat) const { return agents_.at(sat); }
  const SimOptions& options() const { return options_; }

  /// Every pod running->stopped transition observed, as (sat, t).
  const std::vector<std::pair<std::size_t, double>>& pod_stops() const { return pod_stops_; }

 private:
  struct VisibilityEntry {
    enum class Kind { Created, State, Removed, Report };
    double t;
    int gs;
    Kind kind;
    BindingState state;
  };

  ControlNodeState& node(int gs);
  void set_state(std::size_t sat, int gs, BindingState to);
  void create_entry(std::size_t sat, int gs, BindingState state, bool with_report);
  void remove_entry(std::size_t sat, int gs);
  void accept_report(std::size_t sat, int gs);
  void check_safety(std::size_t sat) const;
  void log(std::size_t sat, const std::string& event, int gs);
  void send(Endpoint from, Endpoint to, EventQueue::Action on_arrival);
  void after(double delay_s, EventQueue::Action action) { queue_.schedule_in(delay_s, std::move(action)); }
  void report_tick(std::size_t sat, double until);
  void deliver_report(std::size_t sat, double generated);
  void flush_held_reports(std::size_t sat);
  void finish(std::size_t record);

  void seamless_chain(std::size_t record, std::size_t sat, int source, int target);
  void legacy_chain(std::size_t record, std::size_t sat, int source, int target);
  void legacy_evict(std::size_t record, std::size_t sat, int source, int target, std::size_t pod);
  void legacy_rejoin(std::size_t record, std::size_t sat, int source, int target);
  void legacy_auth(std::size_t record, std::size_t sat, int target, int remaining);
  void legacy_register(std::size_t record, std::size_t sat, int target);
  void legacy_resync(std::size_t record, std::size_t sat, int target);

  std::vector<int> control_ids_;
  std::map<int, ControlNodeState> nodes_;
  std::vector<SatelliteAgent> agents_;
  std::shared_ptr<const LatencyModel> latency_;
  SimOptions options_;
  EventQueue queue_;
  std::vector<HandoverRecord> records_;
  std::vector<HandoverRequest> requests_;
  std::vector<TraceEvent> trace_;
  std::vector<ReportSample> reports_;
  std::vector<std::vector<VisibilityEntry>> visibility_;
  std::vector<std::vector<double>> held_reports_;
  std::vector<std::pair<std::size_t, double>> pod_stops_;
  std::function<void(const HandoverRecord&)> on_complete_;
  mutable std::vector<std::pair<std::size_t, std::vector<std::pair<double, double>>>> interval_cache_;
};

/// CSV: sat_id,t_start,duration_s,invisibility_s,pod_unavail_s,protocol,source,target
void write_records_csv(std::ostream& os, std::span<const HandoverRecord> records);
void write_trace_jsonl(std::ostream& os, std::span<const TraceEvent> trace);

}  // namespace leocp

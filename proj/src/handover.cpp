#include "leocp/handover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "leocp/format.hpp"

namespace leocp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t status_index(RequestStatus s) { return static_cast<std::size_t>(s); }

}  // namespace

const char* to_string(BindingState s) {
  switch (s) {
    case BindingState::Bound: return "Bound";
    case BindingState::Binding: return "Binding";
    case BindingState::Releasing: return "Releasing";
    case BindingState::Released: return "Released";
  }
  return "?";
}

const char* to_string(RequestStatus s) {
  switch (s) {
    case RequestStatus::Created: return "Created";
    case RequestStatus::Processing: return "Processing";
    case RequestStatus::Finished: return "Finished";
    case RequestStatus::Completed: return "Completed";
  }
  return "?";
}

const char* to_string(Protocol p) { return p == Protocol::Seamless ? "seamless" : "legacy"; }

Protocol parse_protocol(const std::string& name) {
  if (name == "seamless") return Protocol::Seamless;
  if (name == "legacy") return Protocol::Legacy;
  throw std::invalid_argument("unknown protocol '" + name + "' (expected seamless|legacy)");
}

bool transition_allowed(BindingState from, BindingState to) {
  using B = BindingState;
  return (from == B::Released && to == B::Binding) || (from == B::Binding && to == B::Bound) ||
         (from == B::Bound && to == B::Releasing) || (from == B::Releasing && to == B::Released);
}

DelayProfile DelayProfile::zero() {
  DelayProfile d;
  d.controller_process = d.persist = d.client_init = d.status_report_process = 0.0;
  d.pod_stop = d.pod_start = d.drain_per_pod = d.register_node = d.legacy_cleanup = 0.0;
  d.auth_roundtrips = 0;
  return d;
}

void DelayProfile::validate() const {
  const double all[] = {controller_process, persist,       client_init,    status_report_process, pod_stop,
                        pod_start,          drain_per_pod, register_node, legacy_cleanup};
  for (double v : all)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("delay profile values must be finite and >= 0");
  if (auth_roundtrips < 0) throw std::invalid_argument("delays.auth_roundtrips must be >= 0");
}

nlohmann::json to_json(const DelayProfile& d) {
  return {{"controller_process", d.controller_process},
          {"persist", d.persist},
          {"client_init", d.client_init},
          {"status_report_process", d.status_report_process},
          {"pod_stop", d.pod_stop},
          {"pod_start", d.pod_start},
          {"drain_per_pod", d.drain_per_pod},
          {"register", d.register_node},
          {"legacy_cleanup", d.legacy_cleanup},
          {"auth_roundtrips", d.auth_roundtrips}};
}

void apply_overrides(DelayProfile& d, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("delays must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "auth_roundtrips") {
      d.auth_roundtrips = value.get<int>();
      continue;
    }
    double* slot = key == "controller_process"      ? &d.controller_process
                   : key == "persist"               ? &d.persist
                   : key == "client_init"           ? &d.client_init
                   : key == "status_report_process" ? &d.status_report_process
                   : key == "pod_stop"              ? &d.pod_stop
                   : key == "pod_start"             ? &d.pod_start
                   : key == "drain_per_pod"         ? &d.drain_per_pod
                   : key == "register"              ? &d.register_node
                   : key == "legacy_cleanup"        ? &d.legacy_cleanup
                                                    : nullptr;
    if (!slot) throw std::invalid_argument("unknown key 'delays." + key + "'");
    *slot = value.get<double>();
  }
  d.validate();
}

double great_circle_km(const GroundStation& a, const GroundStation& b) {
  const double la1 = deg2rad(a.latitude_deg), la2 = deg2rad(b.latitude_deg);
  const double dla = la2 - la1;
  const double dlo = deg2rad(b.longitude_deg - a.longitude_deg);
  const double h = std::sin(dla / 2) * std::sin(dla / 2) + std::cos(la1) * std::cos(la2) * std::sin(dlo / 2) * std::sin(dlo / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

SnapshotLatency::SnapshotLatency(std::shared_ptr<const std::vector<DistanceField>> fields,
                                 std::vector<GroundStation> stations, double terrestrial_factor)
    : fields_(std::move(fields)), stations_(std::move(stations)), factor_(terrestrial_factor) {
  if (!fields_ || fields_->empty()) throw std::invalid_argument("snapshot latency needs distance fields");
  if (!(factor_ > 0.0)) throw std::invalid_argument("terrestrial factor must be > 0");
}

const DistanceField& SnapshotLatency::nearest_field(double t) const {
  const auto& f = *fields_;
  auto it = std::lower_bound(f.begin(), f.end(), t, [](const DistanceField& x, double v) { return x.t < v; });
  if (it == f.end()) return f.back();
  if (it == f.begin()) return f.front();
  const auto prev = std::prev(it);
  return (t - prev->t) <= (it->t - t) ? *prev : *it;
}

double SnapshotLatency::one_way_ms(Endpoint a, Endpoint b, double t) const {
  if (a == b) return 0.0;
  using K = Endpoint::Kind;
  if (a.kind == K::Station && b.kind == K::Station)
    return distance_to_latency_ms(factor_ * great_circle_km(stations_.at(a.id), stations_.at(b.id)));
  if (a.kind == K::Satellite && b.kind == K::Satellite)
    throw std::invalid_argument("satellite-to-satellite latency is not modelled");
  const Endpoint sat = a.kind == K::Satellite ? a : b;
  const Endpoint gs = a.kind == K::Station ? a : b;
  const DistanceField& f = nearest_field(t);
  return distance_to_latency_ms(f.at(sat.id, gs.id));
}

std::vector<std::size_t> ControlNodeState::schedulable_nodes() const {
  std::vector<std::size_t> out;
  for (const auto& [id, e] : registry)
    if (e.state == BindingState::Bound && !e.cordoned) out.push_back(id);
  return out;
}

std::vector<std::size_t> ControlNodeState::health_checked_nodes() const {
  std::vector<std::size_t> out;
  for (const auto& [id, e] : registry)
    if (e.state == BindingState::Bound) out.push_back(id);
  return out;
}

std::string pod_cidr_for(std::size_t sat) {
  if (sat >= 65536) throw std::out_of_range("pod CIDR space exhausted");
  return "10." + std::to_string(sat / 256) + "." + std::to_string(sat % 256) + ".0/24";
}

nlohmann::json to_json(const TraceEvent& e) {
  return {{"t", e.t}, {"seq", e.seq}, {"sat", e.sat}, {"event", e.event}, {"gs", e.gs}};
}

ControlPlaneSim::ControlPlaneSim(std::size_t n_sats, std::vector<int> control_nodes,
                                 std::shared_ptr<const LatencyModel> latency, SimOptions options)
    : control_ids_(std::move(control_nodes)), latency_(std::move(latency)), options_(std::move(options)) {
  options_.delays.validate();
  if (!latency_) throw std::invalid_argument("simulation needs a latency model");
  if (!(options_.report_interval_s > 0.0)) throw std::invalid_argument("report interval must be > 0");
  if (options_.visibility_grace_s < 0.0) throw std::invalid_argument("visibility grace must be >= 0");
  if (options_.pods_per_satellite < 0) throw std::invalid_argument("pods_per_satellite must be >= 0");
  std::sort(control_ids_.begin(), control_ids_.end());
  control_ids_.erase(std::unique(control_ids_.begin(), control_ids_.end()), control_ids_.end());
  if (control_ids_.empty()) throw std::invalid_argument("simulation needs at least one control node");
  for (int g : control_ids_) nodes_[g].gs_id = g;

  agents_.resize(n_sats);
  for (std::size_t s = 0; s < n_sats; ++s) {
    auto& a = agents_[s];
    a.sat_id = s;
    a.pod_cidr = pod_cidr_for(s);
    for (int p = 0; p < options_.pods_per_satellite; ++p)
      a.pods.push_back({"sat" + std::to_string(s) + "-pod" + std::to_string(p), true});
  }
  visibility_.resize(n_sats);
  held_reports_.resize(n_sats);
}

ControlNodeState& ControlPlaneSim::node(int gs) {
  auto it = nodes_.find(gs);
  if (it == nodes_.end()) throw std::invalid_argument("station " + std::to_string(gs) + " is not a control node");
  return it->second;
}

const ControlNodeState& ControlPlaneSim::control_node(int gs) const {
  auto it = nodes_.find(gs);
  if (it == nodes_.end()) throw std::invalid_argument("station " + std::to_string(gs) + " is not a control node");
  return it->second;
}

void ControlPlaneSim::log(std::size_t sat, const std::string& event, int gs) {
  if (options_.trace) trace_.push_back({queue_.now(), queue_.current_seq(), sat, event, gs});
}

double ControlPlaneSim::latency(Endpoint a, Endpoint b, double t) const { return latency_->one_way_ms(a, b, t); }

void ControlPlaneSim::send(Endpoint from, Endpoint to, EventQueue::Action on_arrival) {
  const double ms = latency(from, to, queue_.now());
  if (!std::isfinite(ms))
    throw Unreachable("no path between endpoints at t=" + std::to_string(queue_.now()) + " s");
  queue_.schedule_in(ms / 1000.0, std::move(on_arrival));
}

void ControlPlaneSim::create_entry(std::size_t sat, int gs, BindingState state, bool with_report) {
  NodeEntry e;
  e.state = state;
  e.last_report_time = with_report ? queue_.now() : -kInfinity;
  for (const auto& p : agents_.at(sat).pods) e.pods.push_back(p.name);
  node(gs).registry[sat] = std::move(e);
  visibility_[sat].push_back({queue_.now(), gs, VisibilityEntry::Kind::Created, state});
  if (with_report) visibility_[sat].push_back({queue_.now(), gs, VisibilityEntry::Kind::Report, state});
}

void ControlPlaneSim::remove_entry(std::size_t sat, int gs) {
  node(gs).registry.erase(sat);
  visibility_[sat].push_back({queue_.now(), gs, VisibilityEntry::Kind::Removed, BindingState::Released});
}

void ControlPlaneSim::set_state(std::size_t sat, int gs, BindingState to) {
  auto& reg = node(gs).registry;
  auto it = reg.find(sat);
  if (it == reg.end())
    throw ProtocolViolation("node " + std::to_string(sat) + " unknown to control node " + std::to_string(gs));
  const BindingState from = it->second.state;
  if (!transition_allowed(from, to))
    throw ProtocolViolation(std::string("illegal binding transition ") + to_string(from) + " -> " + to_string(to) +
                            " for node " + std::to_string(sat));
  if (to == BindingState::Bound) {
    for (const auto& [g, cn] : nodes_) {
      if (g == gs) continue;
      auto other = cn.registry.find(sat);
      if (other != cn.registry.end() && other->second.state == BindingState::Bound)
        throw ProtocolViolation("node " + std::to_string(sat) + " would be Bound at two control nodes");
    }
  }
  it->second.state = to;
  visibility_[sat].push_back({queue_.now(), gs, VisibilityEntry::Kind::State, to});
  log(sat, std::string("binding_") + to_string(to), gs);
}

void ControlPlaneSim::accept_report(std::size_t sat, int gs) {
  auto& e = node(gs).registry.at(sat);
  e.last_report_time = queue_.now();
  visibility_[sat].push_back({queue_.now(), gs, VisibilityEntry::Kind::Report, e.state});
}

void ControlPlaneSim::check_safety(std::size_t sat) const {
  for (const auto& [g, cn] : nodes_) {
    auto it = cn.registry.find(sat);
    if (it != cn.registry.end() && holds_node(it->second.state)) return;
  }
  throw ProtocolViolation("no control node holds node " + std::to_string(sat));
}

void ControlPlaneSim::attach(std::size_t sat, int gs, double t) {
  if (sat >= agents_.size()) throw std::out_of_range("unknown satellite " + std::to_string(sat));
  node(gs);
  queue_.schedule(t, [this, sat, gs] {
    auto& agent = agents_[sat];
    if (agent.active_gs >= 0) throw std::logic_error("node " + std::to_string(sat) + " already attached");
    for (int g : control_ids_) create_entry(sat, g, g == gs ? BindingState::Bound : BindingState::Released, g == gs);
    agent.active_gs = gs;
    log(sat, "attached", gs);
  });
}

void ControlPlaneSim::start_reports(std::span<const double> first, double until) {
  if (first.size() != agents_.size()) throw std::invalid_argument("one report offset per satellite required");
  for (std::size_t s = 0; s < agents_.size(); ++s) {
    if (first[s] >= until) continue;
    queue_.schedule(first[s], [this, s, until] { report_tick(s, until); });
  }
}

void ControlPlaneSim::report_tick(std::size_t sat, double until) {
  deliver_report(sat, queue_.now());
  const double next = queue_.now() + options_.report_interval_s;
  if (next < until) queue_.schedule(next, [this, sat, until] { report_tick(sat, until); });
}

void ControlPlaneSim::deliver_report(std::size_t sat, double generated) {
  const int gs = agents_[sat].active_gs;
  if (gs < 0) {
    held_reports_[sat].push_back(generated);
    return;
  }
  send(Endpoint::sat(sat), Endpoint::station(static_cast<std::size_t>(gs)), [this, sat, gs, generated] {
    auto& reg = node(gs).registry;
    auto it = reg.find(sat);
    if (it == reg.end() || !holds_node(it->second.state)) {
      // Arrived after the channel moved on; resend on the current one.
      deliver_report(sat, generated);
      return;
    }
    accept_report(sat, gs);
    reports_.push_back({sat, generated, (queue_.now() - generated) * 1000.0});
  });
}

void ControlPlaneSim::flush_held_reports(std::size_t sat) {
  auto held = std::move(held_reports_[sat]);
  held_reports_[sat].clear();
  for (double generated : held) deliver_report(sat, generated);
}

std::size_t ControlPlaneSim::begin_handover(Protocol protocol, std::size_t sat, int target, double t0) {
  if (sat >= agents_.size()) throw std::out_of_range("unknown satellite " + std::to_string(sat));
  node(target);
  const std::size_t id = records_.size();
  HandoverRecord rec;
  rec.sat = sat;
  rec.t_start = t0;
  rec.protocol = protocol;
  rec.target = target;
  rec.t_target_bound = rec.t_source_released = rec.t_removed = rec.t_visible = rec.t_pods_stopped = kNaN;
  records_.push_back(rec);

  queue_.schedule(t0, [this, id, protocol, sat, target] {
    auto& agent = agents_[sat];
    if (agent.in_flight)
      throw ConcurrentHandover("node " + std::to_string(sat) + " already has a handover in flight");
    const int source = agent.active_gs;
    if (source < 0) throw ProtocolViolation("node " + std::to_string(sat) + " is not attached");
    if (source == target) throw std::invalid_argument("handover target equals source");
    records_[id].source = source;
    records_[id].t_start = queue_.now();
    agent.in_flight = true;
    if (protocol == Protocol::Seamless)
      seamless_chain(id, sat, source, target);
    else
      legacy_chain(id, sat, source, target);
  });
  return id;
}

void ControlPlaneSim::finish(std::size_t id) {
  auto& rec = records_[id];
  rec.duration = rec.t_end - rec.t_start;
  if (rec.protocol == Protocol::Seamless) {
    double hidden = 0.0;
    for (const auto& [from, to] : invisible_intervals(rec.sat))
      hidden += std::max(0.0, std::min(to, rec.t_end) - std::max(from, rec.t_start));
    rec.invisibility = hidden;
    double down = 0.0;
    for (const auto& [s, t] : pod_stops_)
      if (s == rec.sat && t >= rec.t_start && t <= rec.t_end) down += rec.t_end - t;
    rec.pod_unavailability = down;
  }
  rec.complete = true;
  agents_[rec.sat].in_flight = false;
  if (on_complete_) on_complete_(rec);
}

void ControlPlaneSim::seamless_chain(std::size_t id, std::size_t sat, int source, int target) {
  const auto& d = options_.delays;
  const auto S = Endpoint::sat(sat);
  const auto src = Endpoint::station(static_cast<std::size_t>(source));
  const auto dst = Endpoint::station(static_cast<std::size_t>(target));
  {
    auto& reg = node(source).registry;
    auto it = reg.find(sat);
    if (it == reg.end() || it->second.state != BindingState::Bound)
      throw ProtocolViolation("seamless handover requires node Bound at its source");
  }
  log(sat, "handover_start", source);

  // Steps 1-4: create the HandoverRequest on the source and watch it.
  send(S, src, [=, this] {
    HandoverRequest hr;
    hr.request_id = requests_.size();
    hr.node_id = sat;
    hr.source_gs = source;
    hr.target_gs = target;
    hr.timestamps[0] = queue_.now();
    hr.sequence[0] = queue_.current_seq();
    requests_.push_back(hr);
    const std::size_t req = hr.request_id;
    records_[id].request_id = req;
    log(sat, "hr_created", source);
    send(src, S, [=, this] { log(sat, "watch_established", source); });

    auto set_status = [this, req](RequestStatus st) {
      auto& r = requests_[req];
      r.status = st;
      r.timestamps[status_index(st)] = queue_.now();
      r.sequence[status_index(st)] = queue_.current_seq();
    };

    // Steps 5-8: Processing, Releasing, record sync to the target, Finished.
    after(d.controller_process, [=, this] {
      set_status(RequestStatus::Processing);
      log(sat, "hr_processing", source);
      set_state(sat, source, BindingState::Releasing);
      check_safety(sat);
      send(src, dst, [=, this] {
        after(d.persist, [=, this] {
          auto& entry = node(target).registry.at(sat);
          entry.pods = node(source).registry.at(sat).pods;
          log(sat, "sync_persisted", target);
          send(dst, src, [=, this] {
            set_status(RequestStatus::Finished);
            log(sat, "hr_finished", source);

            // Steps 9-14: new clientset, status report to the target, Bound.
            send(src, S, [=, this] {
              log(sat, "watch_finished", source);
              agents_[sat].pending_gs = target;
              after(d.client_init, [=, this] {
                log(sat, "client_ready", target);
                send(S, dst, [=, this] {
                  set_state(sat, target, BindingState::Binding);
                  accept_report(sat, target);
                  after(d.status_report_process, [=, this] {
                    set_state(sat, target, BindingState::Bound);
                    records_[id].t_target_bound = queue_.now();
                    check_safety(sat);
                    send(dst, S, [=, this] {
                      auto& agent = agents_[sat];
                      agent.active_gs = target;
                      agent.pending_gs = -1;
                      log(sat, "clientset_switched", target);

                      // Steps 15-17: release the source.
                      send(S, src, [=, this] {
                        after(d.persist, [=, this] {
                          set_state(sat, source, BindingState::Released);
                          check_safety(sat);
                          records_[id].t_source_released = queue_.now();
                          set_status(RequestStatus::Completed);
                          log(sat, "hr_completed", source);
                          records_[id].t_end = queue_.now();
                          finish(id);
                        });
                      });
                    });
                  });
                });
              });
            });
          });
        });
      });
    });
  });
}

void ControlPlaneSim::legacy_chain(std::size_t id, std::size_t sat, int source, int target) {
  auto& reg = node(source).registry;
  auto it = reg.find(sat);
  if (it == reg.end() || it->second.state != BindingState::Bound)
    throw ProtocolViolation("legacy handover requires node Bound at its source");
  it->second.cordoned = true;
  log(sat, "cordon", source);
  legacy_evict(id, sat, source, target, 0);
}

void ControlPlaneSim::legacy_evict(std::size_t id, std::size_t sat, int source, int target, std::size_t pod) {
  const auto& d = options_.delays;
  const auto S = Endpoint::sat(sat);
  const auto src = Endpoint::station(static_cast<std::size_t>(source));
  if (pod < agents_[sat].pods.size()) {
    after(d.drain_per_pod, [=, this] {
      log(sat, "evict", source);
      send(src, S, [=, this] {
        auto& p = agents_[sat].pods[pod];
        p.running = false;
        pod_stops_.push_back({sat, queue_.now()});
        if (pod == 0) records_[id].t_pods_stopped = queue_.now();
        log(sat, "pod_stopping", source);
        after(d.pod_stop, [=, this] {
          log(sat, "pod_stopped", source);
          send(S, src, [=, this] { legacy_evict(id, sat, source, target, pod + 1); });
        });
      });
    });
    return;
  }
  // Drain done: delete the node object at the source.
  after(d.persist, [=, this] {
    remove_entry(sat, source);
    records_[id].t_removed = queue_.now();
    log(sat, "node_removed", source);
    send(src, S, [=, this] {
      agents_[sat].active_gs = -1;
      log(sat, "detached", source);
      legacy_rejoin(id, sat, source, target);
    });
  });
}

void ControlPlaneSim::legacy_rejoin(std::size_t id, std::size_t sat, int, int target) {
  const auto& d = options_.delays;
  after(d.legacy_cleanup, [=, this] {
    log(sat, "cleanup_done", -1);
    after(d.client_init, [=, this] { legacy_auth(id, sat, target, d.auth_roundtrips); });
  });
}

void ControlPlaneSim::legacy_auth(std::size_t id, std::size_t sat, int target, int remaining) {
  if (remaining <= 0) {
    legacy_register(id, sat, target);
    return;
  }
  const auto S = Endpoint::sat(sat);
  const auto dst = Endpoint::station(static_cast<std::size_t>(target));
  send(S, dst, [=, this] {
    send(dst, S, [=, this] {
      log(sat, "auth_roundtrip", target);
      legacy_auth(id, sat, target, remaining - 1);
    });
  });
}

void ControlPlaneSim::legacy_register(std::size_t id, std::size_t sat, int target) {
  const auto& d = options_.delays;
  const auto S = Endpoint::sat(sat);
  const auto dst = Endpoint::station(static_cast<std::size_t>(target));
  send(S, dst, [=, this] {
    after(d.register_node + d.persist, [=, this] {
      if (node(target).registry.count(sat)) remove_entry(sat, target);
      create_entry(sat, target, BindingState::Bound, false);
      log(sat, "registered", target);
      after(d.status_report_process, [=, this] {
        accept_report(sat, target);
        records_[id].t_visible = queue_.now();
        records_[id].invisibility = queue_.now() - records_[id].t_removed;
        log(sat, "first_report_accepted", target);
        send(dst, S, [=, this] {
          agents_[sat].active_gs = target;
          log(sat, "rejoined", target);
          records_[id].t_end = queue_.now();
          flush_held_reports(sat);
          legacy_resync(id, sat, target);
        });
      });
    });
  });
}

void ControlPlaneSim::legacy_resync(std::size_t id, std::size_t sat, int target) {
  const auto& d = options_.delays;
  if (agents_[sat].pods.empty()) {
    records_[id].pod_unavailability = 0.0;
    finish(id);
    return;
  }
  const auto S = Endpoint::sat(sat);
  const auto dst = Endpoint::station(static_cast<std::size_t>(target));
  send(S, dst, [=, this] {
    after(d.controller_process, [=, this] {
      log(sat, "pods_rescheduled", target);
      send(dst, S, [=, this] {
        after(d.pod_start, [=, this] {
          for (auto& p : agents_[sat].pods) p.running = true;
          log(sat, "pods_running", target);
          records_[id].pod_unavailability = queue_.now() - records_[id].t_pods_stopped;
          finish(id);
        });
      });
    });
  });
}

HandoverRecord ControlPlaneSim::run_seamless_handover(std::size_t sat, int target, double t0) {
  const std::size_t id = begin_handover(Protocol::Seamless, sat, target, t0);
  queue_.run_until([&] { return records_[id].complete; });
  if (!records_[id].complete) throw std::logic_error("event queue drained before the handover completed");
  return records_[id];
}

HandoverRecord ControlPlaneSim::run_legacy_handover(std::size_t sat, int target, double t0) {
  const std::size_t id = begin_handover(Protocol::Legacy, sat, target, t0);
  queue_.run_until([&] { return records_[id].complete; });
  if (!records_[id].complete) throw std::logic_error("event queue drained before the handover completed");
  return records_[id];
}

std::vector<std::pair<double, double>> ControlPlaneSim::invisible_intervals(std::size_t sat) const {
  const auto& log = visibility_.at(sat);
  if (interval_cache_.size() != visibility_.size()) interval_cache_.assign(visibility_.size(), {});
  auto& cached = interval_cache_[sat];
  if (cached.first == log.size() && log.size() > 0) return cached.second;

  const double threshold = options_.report_interval_s + options_.visibility_grace_s;
  struct Held {
    bool present = false;
    BindingState state = BindingState::Released;
    double last_report = -kInfinity;
  };
  std::map<int, Held> held;
  std::vector<std::pair<double, double>> out;
  auto add = [&out](double from, double to) {
    if (!(to > from)) return;
    if (!out.empty() && out.back().second >= from)
      out.back().second = std::max(out.back().second, to);
    else
      out.emplace_back(from, to);
  };

  std::size_t i = 0;
  while (i < log.size()) {
    const double t = log[i].t;
    for (; i < log.size() && log[i].t == t; ++i) {
      const auto& e = log[i];
      auto& h = held[e.gs];
      switch (e.kind) {
        case VisibilityEntry::Kind::Created:
          h = Held{true, e.state, -kInfinity};
          break;
        case VisibilityEntry::Kind::State:
          h.state = e.state;
          break;
        case VisibilityEntry::Kind::Removed:
          h = Held{};
          break;
        case VisibilityEntry::Kind::Report:
          h.last_report = e.t;
          break;
      }
    }
    const double next = i < log.size() ? log[i].t : kInfinity;
    double visible_until = -kInfinity;
    for (const auto& [g, h] : held)
      if (h.present && holds_node(h.state)) visible_until = std::max(visible_until, h.last_report + threshold);
    if (visible_until < next) add(std::max(t, visible_until), next);
  }
  cached = {log.size(), out};
  return out;
}

bool ControlPlaneSim::node_visible(std::size_t sat, double t) const {
  const auto& log = visibility_.at(sat);
  if (log.empty() || t < log.front().t) return false;
  const auto gaps = invisible_intervals(sat);
  auto it = std::upper_bound(gaps.begin(), gaps.end(), t,
                             [](double v, const std::pair<double, double>& g) { return v < g.first; });
  if (it == gaps.begin()) return true;
  --it;
  return !(t >= it->first && t < it->second);
}

void write_records_csv(std::ostream& os, std::span<const HandoverRecord> records) {
  os << "sat_id,t_start,duration_s,invisibility_s,pod_unavail_s,protocol,source,target\n";
  for (const auto& r : records)
    os << r.sat << ',' << fixed(r.t_start, 6) << ',' << fixed(r.duration, 6) << ',' << fixed(r.invisibility, 6) << ','
       << fixed(r.pod_unavailability, 6) << ',' << to_string(r.protocol) << ',' << r.source << ',' << r.target << '\n';
}

void write_trace_jsonl(std::ostream& os, std::span<const TraceEvent> trace) {
  for (const auto& e : trace) os << to_json(e).dump() << '\n';
}

}  // namespace leocp

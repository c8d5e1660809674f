#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "leocp/handover.hpp"

using namespace leocp;

namespace {

SimOptions opts(DelayProfile d, bool trace = false) {
  SimOptions o;
  o.delays = d;
  o.trace = trace;
  return o;
}

std::unique_ptr<ControlPlaneSim> make_sim(std::size_t sats, double one_way_ms, SimOptions o,
                                          std::vector<int> nodes = {0, 1}) {
  return std::make_unique<ControlPlaneSim>(sats, std::move(nodes), std::make_shared<FixedLatency>(one_way_ms), o);
}

DelayProfile only(double DelayProfile::*field, double v) {
  auto d = DelayProfile::zero();
  d.*field = v;
  return d;
}

}  // namespace

TEST_CASE("binding transition relation") {
  using B = BindingState;
  CHECK(transition_allowed(B::Released, B::Binding));
  CHECK(transition_allowed(B::Binding, B::Bound));
  CHECK(transition_allowed(B::Bound, B::Releasing));
  CHECK(transition_allowed(B::Releasing, B::Released));
  CHECK_FALSE(transition_allowed(B::Released, B::Bound));
  CHECK_FALSE(transition_allowed(B::Bound, B::Released));
  CHECK_FALSE(transition_allowed(B::Binding, B::Released));
  CHECK_FALSE(transition_allowed(B::Bound, B::Bound));
  CHECK(holds_node(B::Releasing));
  CHECK_FALSE(holds_node(B::Released));
}

TEST_CASE("event queue orders by time then insertion") {
  EventQueue q;
  std::string order;
  q.schedule(2.0, [&] { order += 'c'; });
  q.schedule(1.0, [&] { order += 'a'; });
  q.schedule(1.0, [&] {
    order += 'b';
    q.schedule(0.5, [&] { order += 'd'; });  // in the past: runs now, after queued peers
  });
  q.run();
  CHECK(order == "abdc");
  CHECK(q.now() == 2.0);
}

TEST_CASE("seamless chain with 10 ms links matches the hand-traced fixture") {
  auto sim = make_sim(1, 10.0, opts(DelayProfile::zero(), true));
  sim->attach(0, 0, 0.0);
  const auto rec = sim->run_seamless_handover(0, 1, 0.0);
  CHECK(rec.duration == doctest::Approx(0.070).epsilon(1e-12));
  CHECK(rec.invisibility == 0.0);
  CHECK(rec.pod_unavailability == 0.0);
  CHECK(rec.t_target_bound < rec.t_source_released);

  std::ifstream in(std::string(LEOCP_SOURCE_DIR) + "/tests/fixtures/seamless_10ms_trace.jsonl");
  REQUIRE(in);
  std::vector<nlohmann::json> expected;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) expected.push_back(nlohmann::json::parse(line));
  const auto& trace = sim->trace();
  REQUIRE(trace.size() == expected.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    CAPTURE(i);
    CHECK(trace[i].event == expected[i]["event"].get<std::string>());
    CHECK(trace[i].gs == expected[i]["gs"].get<int>());
    CHECK(trace[i].sat == expected[i]["sat"].get<std::size_t>());
    CHECK(trace[i].t == doctest::Approx(expected[i]["t"].get<double>()).epsilon(1e-12));
  }
  for (std::size_t i = 1; i < trace.size(); ++i)
    CHECK((trace[i - 1].t < trace[i].t || (trace[i - 1].t == trace[i].t && trace[i - 1].seq <= trace[i].seq)));
}

TEST_CASE("zero latency and zero delays cost nothing") {
  for (auto protocol : {Protocol::Seamless, Protocol::Legacy}) {
    auto sim = make_sim(1, 0.0, opts(DelayProfile::zero()));
    sim->attach(0, 0, 0.0);
    const auto rec = protocol == Protocol::Seamless ? sim->run_seamless_handover(0, 1, 5.0)
                                                    : sim->run_legacy_handover(0, 1, 5.0);
    CHECK(rec.duration == 0.0);
    CHECK(rec.invisibility == 0.0);
    CHECK(rec.pod_unavailability == 0.0);
    CHECK(rec.t_start == 5.0);
  }
}

TEST_CASE("legacy handover at LAN latency reproduces the measured costs") {
  auto sim = make_sim(1, 0.2, opts(DelayProfile{}));
  sim->attach(0, 0, 0.0);
  const auto rec = sim->run_legacy_handover(0, 1, 100.0);
  CHECK(rec.duration == doctest::Approx(8.35).epsilon(0.10));
  CHECK(rec.invisibility == doctest::Approx(4.5).epsilon(0.10));
  CHECK(rec.pod_unavailability == doctest::Approx(9.7).epsilon(0.10));
  // Local work plus 9, 6 and 10 one-way legs of 0.2 ms respectively.
  CHECK(rec.duration == doctest::Approx(8.3518).epsilon(1e-9));
  CHECK(rec.invisibility == doctest::Approx(4.5012).epsilon(1e-9));
  CHECK(rec.pod_unavailability == doctest::Approx(9.702).epsilon(1e-9));
  CHECK(rec.t_removed < rec.t_visible);
  CHECK(sim->agent(0).active_gs == 1);
  CHECK(sim->agent(0).pods[0].running);
  CHECK(sim->control_node(1).registry.at(0).state == BindingState::Bound);
  CHECK(sim->control_node(0).registry.count(0) == 0);
}

TEST_CASE("legacy costs are positive whenever their delays are") {
  for (double v : {0.01, 0.5, 3.0}) {
    auto a = make_sim(1, 0.0, opts(only(&DelayProfile::register_node, v)));
    a->attach(0, 0);
    const auto ra = a->run_legacy_handover(0, 1, 1.0);
    CHECK(ra.invisibility > 0.0);
    CHECK(ra.pod_unavailability > 0.0);

    auto b = make_sim(1, 0.0, opts(only(&DelayProfile::pod_stop, v)));
    b->attach(0, 0);
    const auto rb = b->run_legacy_handover(0, 1, 1.0);
    CHECK(rb.pod_unavailability == doctest::Approx(v));
  }
}

TEST_CASE("node visibility during a legacy handover") {
  auto sim = make_sim(1, 0.2, opts(DelayProfile{}));
  sim->attach(0, 0);
  const std::vector<double> first{0.0};
  sim->start_reports(first, 200.0);
  const auto id = sim->begin_handover(Protocol::Legacy, 0, 1, 50.0);
  sim->run();
  const auto& rec = sim->records()[id];
  CHECK(sim->node_visible(0, 10.0));
  CHECK(sim->node_visible(0, rec.t_removed - 1e-6));
  CHECK_FALSE(sim->node_visible(0, rec.t_removed + 1e-6));
  CHECK_FALSE(sim->node_visible(0, 0.5 * (rec.t_removed + rec.t_visible)));
  CHECK(sim->node_visible(0, rec.t_visible + 1e-6));
  CHECK(sim->node_visible(0, 150.0));
  const auto gaps = sim->invisible_intervals(0);
  REQUIRE_FALSE(gaps.empty());
  CHECK(gaps.front().first == doctest::Approx(rec.t_removed));
  CHECK(gaps.front().second == doctest::Approx(rec.t_visible));
  // Reports generated while detached are delivered after rejoin.
  CHECK(sim->reports().size() == 20);
}

TEST_CASE("seamless handovers keep the node visible, bound once, and pods running") {
  const std::size_t n = 6;
  auto sim = make_sim(n, 25.0, opts(DelayProfile{}, true), {0, 1, 2});
  for (std::size_t s = 0; s < n; ++s) sim->attach(s, static_cast<int>(s % 3));
  std::vector<double> first;
  for (std::size_t s = 0; s < n; ++s) first.push_back(0.7 * static_cast<double>(s));
  sim->start_reports(first, 400.0);
  for (std::size_t s = 0; s < n; ++s) {
    sim->begin_handover(Protocol::Seamless, s, static_cast<int>((s + 1) % 3), 20.0 + static_cast<double>(s));
    sim->begin_handover(Protocol::Seamless, s, static_cast<int>((s + 2) % 3), 120.0 + 3.0 * static_cast<double>(s));
  }
  sim->run();
  REQUIRE(sim->records().size() == 2 * n);
  CHECK(sim->pod_stops().empty());
  for (const auto& r : sim->records()) {
    CHECK(r.complete);
    CHECK(r.invisibility == 0.0);
    CHECK(r.pod_unavailability == 0.0);
    CHECK(r.t_target_bound < r.t_source_released);
    for (double t = r.t_start; t <= r.t_end; t += 0.01) REQUIRE(sim->node_visible(r.sat, t));
  }
  for (const auto& hr : sim->requests()) {
    CHECK(hr.status == RequestStatus::Completed);
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK(hr.timestamps[i - 1] < hr.timestamps[i]);
      CHECK(hr.sequence[i - 1] < hr.sequence[i]);
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    int bound = 0;
    for (int g : {0, 1, 2})
      bound += sim->control_node(g).registry.at(s).state == BindingState::Bound;
    CHECK(bound == 1);
  }
  for (const auto& e : sim->trace()) CHECK(e.event != "pod_stopping");
}

TEST_CASE("request statuses stay ordered at zero latency") {
  auto sim = make_sim(1, 0.0, opts(DelayProfile::zero()));
  sim->attach(0, 0);
  sim->run_seamless_handover(0, 1, 0.0);
  const auto& hr = sim->requests().at(0);
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(hr.timestamps[i - 1] <= hr.timestamps[i]);
    CHECK(hr.sequence[i - 1] < hr.sequence[i]);
  }
}

TEST_CASE("concurrent and malformed handovers are rejected") {
  auto sim = make_sim(1, 10.0, opts(DelayProfile{}));
  sim->attach(0, 0);
  sim->begin_handover(Protocol::Seamless, 0, 1, 1.0);
  sim->begin_handover(Protocol::Seamless, 0, 1, 1.5);
  CHECK_THROWS_AS(sim->run(), ConcurrentHandover);

  auto same = make_sim(1, 10.0, opts(DelayProfile{}));
  same->attach(0, 0);
  same->begin_handover(Protocol::Seamless, 0, 0, 1.0);
  CHECK_THROWS_AS(same->run(), std::invalid_argument);

  auto unknown = make_sim(1, 10.0, opts(DelayProfile{}));
  CHECK_THROWS_AS(unknown->begin_handover(Protocol::Seamless, 0, 7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(unknown->begin_handover(Protocol::Seamless, 3, 1, 1.0), std::out_of_range);
}

TEST_CASE("cordoned nodes leave the scheduler but stay health checked until removal") {
  auto sim = make_sim(2, 0.2, opts(DelayProfile{}));
  sim->attach(0, 0);
  sim->attach(1, 0);
  sim->begin_handover(Protocol::Legacy, 0, 1, 10.0);
  sim->queue().run_until([&] { return sim->queue().now() >= 11.0; });
  CHECK(sim->control_node(0).schedulable_nodes() == std::vector<std::size_t>{1});
  CHECK(sim->control_node(0).health_checked_nodes() == std::vector<std::size_t>{0, 1});
  sim->run();
  CHECK(sim->control_node(0).health_checked_nodes() == std::vector<std::size_t>{1});
  CHECK(sim->control_node(1).schedulable_nodes() == std::vector<std::size_t>{0});
}

TEST_CASE("identical runs give identical traces") {
  auto run = [] {
    auto sim = make_sim(3, 12.5, opts(DelayProfile{}, true), {0, 1});
    for (std::size_t s = 0; s < 3; ++s) sim->attach(s, 0);
    const std::vector<double> first{0.0, 1.0, 2.0};
    sim->start_reports(first, 60.0);
    for (std::size_t s = 0; s < 3; ++s) sim->begin_handover(Protocol::Seamless, s, 1, 5.0);
    sim->run();
    std::ostringstream os;
    write_trace_jsonl(os, sim->trace());
    write_records_csv(os, sim->records());
    return os.str();
  };
  CHECK(run() == run());
}

TEST_CASE("snapshot latency model") {
  GroundStation a, b;
  b.longitude_deg = 180.0;
  auto fields = std::make_shared<std::vector<DistanceField>>();
  for (double t : {0.0, 60.0}) {
    DistanceField f(t, 1, 2);
    f.d = {299.792458 * (t == 0.0 ? 1.0 : 2.0), 1000.0};
    f.reachable = {1, 1};
    fields->push_back(f);
  }
  SnapshotLatency lat(fields, {a, b});
  CHECK(lat.one_way_ms(Endpoint::station(0), Endpoint::station(0), 0.0) == 0.0);
  // Antipodal stations: 2 * pi * R / c with the default factor of 2.
  CHECK(lat.one_way_ms(Endpoint::station(0), Endpoint::station(1), 0.0) ==
        doctest::Approx(133.52628634854165).epsilon(1e-12));
  CHECK(great_circle_km(a, b) == doctest::Approx(kPi * kEarthRadiusKm));
  CHECK(lat.one_way_ms(Endpoint::sat(0), Endpoint::station(0), 10.0) == doctest::Approx(1.0));
  CHECK(lat.one_way_ms(Endpoint::station(0), Endpoint::sat(0), 31.0) == doctest::Approx(2.0));
  CHECK(lat.one_way_ms(Endpoint::sat(0), Endpoint::station(0), 500.0) == doctest::Approx(2.0));
  CHECK(lat.one_way_ms(Endpoint::sat(0), Endpoint::station(0), 30.0) == doctest::Approx(1.0));
}

TEST_CASE("unreachable control node aborts the handover") {
  GroundStation a, b;
  auto fields = std::make_shared<std::vector<DistanceField>>();
  DistanceField f(0.0, 1, 2);
  f.d = {500.0, kInfinity};
  fields->push_back(f);
  ControlPlaneSim sim(1, {0, 1}, std::make_shared<SnapshotLatency>(fields, std::vector<GroundStation>{a, b}),
                      opts(DelayProfile{}));
  sim.attach(0, 0);
  sim.begin_handover(Protocol::Seamless, 0, 1, 1.0);
  CHECK_THROWS_AS(sim.run(), Unreachable);
}

TEST_CASE("delay profile overrides and serialisation") {
  DelayProfile d;
  apply_overrides(d, {{"register", 2.5}, {"auth_roundtrips", 3}});
  CHECK(d.register_node == 2.5);
  CHECK(d.auth_roundtrips == 3);
  CHECK(to_json(d)["register"] == 2.5);
  CHECK_THROWS_AS(apply_overrides(d, {{"regsiter", 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(apply_overrides(d, {{"pod_stop", -1.0}}), std::invalid_argument);
  CHECK(pod_cidr_for(0) == "10.0.0.0/24");
  CHECK(pod_cidr_for(1583) == "10.6.47.0/24");
  CHECK(parse_protocol("legacy") == Protocol::Legacy);
  CHECK_THROWS(parse_protocol("fast"));
}

TEST_CASE("records csv") {
  HandoverRecord r;
  r.sat = 2;
  r.t_start = 1.5;
  r.duration = 0.25;
  r.source = 0;
  r.target = 3;
  std::ostringstream os;
  write_records_csv(os, std::vector<HandoverRecord>{r});
  CHECK(os.str() ==
        "sat_id,t_start,duration_s,invisibility_s,pod_unavail_s,protocol,source,target\n"
        "2,1.500000,0.250000,0.000000,0.000000,seamless,0,3\n");
}

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "leocp/topology.hpp"

using namespace leocp;

namespace {

WalkerShell shell(int p, int s, double span = 360.0) {
  WalkerShell w;
  w.planes = p;
  w.sats_per_plane = s;
  w.inclination_deg = 53.0;
  w.altitude_km = 550.0;
  w.phasing_factor = 0;
  w.raan_span_deg = span;
  return w;
}

std::map<std::size_t, int> degrees(const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::map<std::size_t, int> deg;
  for (const auto& [a, b] : edges) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

TopologySnapshot bare(std::size_t sats, std::size_t stations) {
  TopologySnapshot s;
  s.sat_positions.resize(sats);
  s.station_positions.resize(stations);
  return s;
}

// Floyd-Warshall over satellites [0, S) and stations [S, S+G).
std::vector<std::vector<double>> all_pairs(const TopologySnapshot& s) {
  const std::size_t S = s.n_sats(), n = S + s.n_stations();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInfinity));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  auto relax = [&](std::size_t a, std::size_t b, double w) {
    d[a][b] = std::min(d[a][b], w);
    d[b][a] = std::min(d[b][a], w);
  };
  for (const auto& e : s.isl_edges) relax(e.a, e.b, e.km);
  for (const auto& e : s.gsl_edges) relax(e.sat, S + e.station, e.km);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

TopologySnapshot random_graph(std::mt19937_64& rng) {
  const std::size_t n = 2 + rng() % 11;  // 2..12 nodes
  const std::size_t G = 1 + rng() % std::min<std::size_t>(4, n - 1);
  const std::size_t S = n - G;
  auto snap = bare(S, G);
  std::set<std::pair<std::size_t, std::size_t>> isl;
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t b = a + 1; b < S; ++b)
      if (rng() % 3 == 0) snap.isl_edges.push_back({a, b, static_cast<double>(1 + rng() % 50)});
  for (std::size_t a = 0; a < S; ++a)
    for (std::size_t g = 0; g < G; ++g)
      if (rng() % 3 == 0) snap.gsl_edges.push_back({a, g, static_cast<double>(1 + rng() % 50)});
  return snap;
}

}  // namespace

TEST_CASE("plus-grid edge counts") {
  auto e = build_isl_grid(shell(3, 4));
  CHECK(e.size() == 24);
  for (const auto& [sat, d] : degrees(e)) CHECK(d == 4);

  e = build_isl_grid(shell(1, 4));
  CHECK(e.size() == 4);
  for (const auto& [sat, d] : degrees(e)) CHECK(d == 2);

  CHECK(build_isl_grid(shell(72, 22)).size() == 3168);

  // Star pattern: no wrap across the seam.
  e = build_isl_grid(shell(6, 11, 180.0));
  CHECK(e.size() == 6 * 11 + 5 * 11);
  const auto deg = degrees(e);
  CHECK(deg.at(0) == 3);
  CHECK(deg.at(5 * 11) == 3);
  CHECK(deg.at(2 * 11) == 4);
}

TEST_CASE("degree four for every delta shell with at least 3x3") {
  for (int p = 3; p <= 7; ++p)
    for (int s = 3; s <= 7; ++s) {
      const auto e = build_isl_grid(shell(p, s));
      CHECK(e.size() == static_cast<std::size_t>(2 * p * s));
      for (const auto& [sat, d] : degrees(e)) CHECK(d == 4);
      std::set<std::pair<std::size_t, std::size_t>> uniq(e.begin(), e.end());
      CHECK(uniq.size() == e.size());
      for (const auto& [a, b] : e) CHECK(a < b);
    }
}

TEST_CASE("elevation overhead and antipode") {
  const EcefPosition gs{6371.0, 0.0, 0.0};
  CHECK(elevation_deg({6921.0, 0.0, 0.0}, gs) == doctest::Approx(90.0));
  CHECK(visible({6921.0, 0.0, 0.0}, gs, 90.0));
  CHECK(elevation_deg({-6921.0, 0.0, 0.0}, gs) < 0.0);
  CHECK_FALSE(visible({-6921.0, 0.0, 0.0}, gs, 0.0));
}

TEST_CASE("ground range at 25 degrees for a 550 km shell") {
  // Frozen from a planar bisection on the central angle (R = 6371, a = 6921).
  const double ground_km = 940.5459396775836;
  const double lam = ground_km / kEarthRadiusKm;
  const EcefPosition gs{kEarthRadiusKm, 0.0, 0.0};
  auto sat = [](double l) { return EcefPosition{6921.0 * std::cos(l), 6921.0 * std::sin(l), 0.0}; };
  CHECK(elevation_deg(sat(lam), gs) == doctest::Approx(25.0).epsilon(1e-9));
  CHECK(visible(sat(lam - 1e-6), gs, 25.0));
  CHECK_FALSE(visible(sat(lam + 1e-6), gs, 25.0));
  CHECK(distance(sat(lam), gs) == doctest::Approx(1123.2770015779058).epsilon(1e-9));
}

TEST_CASE("snapshot of one satellite above one station") {
  WalkerShell w = shell(1, 1);
  w.inclination_deg = 0.0;
  SatelliteElement e;
  e.semi_major_axis = 6921.0;
  GroundStation gs;
  const auto snap = build_snapshot(w, std::vector<SatelliteElement>{e}, std::vector<GroundStation>{gs}, 0.0, {});
  REQUIRE(snap.gsl_edges.size() == 1);
  CHECK(snap.gsl_edges[0].km == doctest::Approx(550.0));
  CHECK(snap.isl_edges.empty());
  const auto f = shortest_distances(snap);
  CHECK(f.at(0, 0) == doctest::Approx(550.0));
}

TEST_CASE("isl edge set is time invariant and weights are euclidean") {
  const auto w = shell(3, 4);
  const auto els = generate_constellation(w);
  std::vector<GroundStation> st(2);
  st[1].latitude_deg = 45.0;
  st[1].longitude_deg = 90.0;
  const auto a = build_snapshot(w, els, st, 0.0, {});
  const auto b = build_snapshot(w, els, st, orbital_period(6921.0), {});
  REQUIRE(a.isl_edges.size() == 24);
  REQUIRE(b.isl_edges.size() == 24);
  for (std::size_t i = 0; i < a.isl_edges.size(); ++i) {
    CHECK(a.isl_edges[i].a == b.isl_edges[i].a);
    CHECK(a.isl_edges[i].b == b.isl_edges[i].b);
    CHECK(a.isl_edges[i].km == doctest::Approx(distance(a.sat_positions[a.isl_edges[i].a], a.sat_positions[a.isl_edges[i].b])));
  }
  for (const auto& g : a.gsl_edges) CHECK(visible(a.sat_positions[g.sat], a.station_positions[g.station], 25.0));
}

TEST_CASE("nearest pairing keeps intra-plane links and links every plane") {
  const auto w = shell(4, 6);
  const auto els = generate_constellation(w);
  TopologyOptions opt;
  opt.isl_pairing = IslPairing::NearestPerSnapshot;
  const auto s = build_snapshot(w, els, std::vector<GroundStation>(1), 100.0, opt);
  std::size_t intra = 0;
  for (const auto& e : s.isl_edges) intra += (e.a / 6 == e.b / 6);
  CHECK(intra == 24);
  CHECK(s.isl_edges.size() >= 24 + 6);
}

TEST_CASE("gsl cap keeps the nearest stations") {
  const auto w = shell(3, 4);
  const auto els = generate_constellation(w);
  std::vector<GroundStation> st(3);
  st[1].latitude_deg = 1.0;
  st[2].longitude_deg = 1.0;
  TopologyOptions opt;
  opt.min_elevation_deg = 0.0;
  opt.max_gsl_per_sat = 1;
  const auto s = build_snapshot(w, els, st, 0.0, opt);
  std::map<std::size_t, int> count;
  for (const auto& g : s.gsl_edges) ++count[g.sat];
  for (const auto& [sat, c] : count) CHECK(c == 1);
}

TEST_CASE("shortest distance small cases") {
  auto s = bare(2, 1);
  s.gsl_edges.push_back({0, 0, 700.0});
  s.isl_edges.push_back({0, 1, 300.0});
  auto f = shortest_distances(s);
  CHECK(f.at(0, 0) == 700.0);
  CHECK(f.at(1, 0) == 1000.0);

  s.gsl_edges.push_back({1, 0, 200.0});
  f = shortest_distances(s);
  CHECK(f.at(0, 0) == 500.0);  // via the other satellite
  CHECK(f.at(1, 0) == 200.0);

  auto iso = bare(2, 1);
  iso.gsl_edges.push_back({0, 0, 10.0});
  f = shortest_distances(iso);
  CHECK_FALSE(f.is_reachable(1, 0));
  CHECK(std::isinf(f.at(1, 0)));
}

TEST_CASE("shortest distances equal floyd-warshall on random graphs") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto snap = random_graph(rng);
    const auto f = shortest_distances(snap);
    const auto d = all_pairs(snap);
    for (std::size_t s = 0; s < snap.n_sats(); ++s)
      for (std::size_t g = 0; g < snap.n_stations(); ++g) REQUIRE(f.at(s, g) == d[s][snap.n_sats() + g]);
  }
}

TEST_CASE("adding a gsl edge never increases a distance") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto snap = random_graph(rng);
    const auto before = shortest_distances(snap);
    snap.gsl_edges.push_back({rng() % snap.n_sats(), rng() % snap.n_stations(), static_cast<double>(1 + rng() % 50)});
    const auto after = shortest_distances(snap);
    for (std::size_t i = 0; i < before.d.size(); ++i) CHECK(after.d[i] <= before.d[i]);
  }
}

TEST_CASE("latency conversion") {
  CHECK(distance_to_latency_ms(0.0) == 0.0);
  CHECK(distance_to_latency_ms(299.792458) == doctest::Approx(1.0));
  CHECK(distance_to_latency_ms(18000.0) == doctest::Approx(60.04).epsilon(1e-4));
}

TEST_CASE("sample times") {
  CHECK(sample_times(7200.0, 60.0).size() == 121);
  const auto t = sample_times(100.0, 60.0);
  REQUIRE(t.size() == 3);
  CHECK(t[2] == 100.0);
  CHECK_THROWS(sample_times(10.0, 0.0));
}

TEST_CASE("distance fields are identical to serial computation") {
  const auto w = shell(4, 5);
  const auto els = generate_constellation(w);
  std::vector<GroundStation> st(2);
  st[1].latitude_deg = -30.0;
  const std::vector<double> times{0.0, 60.0, 120.0, 180.0};
  const auto par = distance_fields(w, els, st, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto serial = shortest_distances(build_snapshot(w, els, st, times[i], {}));
    CHECK(par[i].d == serial.d);
  }
}

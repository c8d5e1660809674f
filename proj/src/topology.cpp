#include "leocp/topology.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>

#include "leocp/format.hpp"
#include "leocp/parallel.hpp"

namespace leocp {

namespace {

using Pair = std::pair<std::size_t, std::size_t>;

Pair ordered(std::size_t a, std::size_t b) { return a < b ? Pair{a, b} : Pair{b, a}; }

// Adjacent plane of p, or -1 when the star seam separates them.
int next_plane(const WalkerShell& shell, int p) {
  if (p + 1 < shell.planes) return p + 1;
  return shell.is_delta() && shell.planes > 1 ? 0 : -1;
}

std::vector<Pair> nearest_inter_plane(const WalkerShell& shell, std::span<const EcefPosition> pos) {
  std::set<Pair> edges;
  const auto S = static_cast<std::size_t>(shell.sats_per_plane);
  for (int p = 0; p < shell.planes; ++p) {
    const int q = next_plane(shell, p);
    if (q < 0 || q == p) continue;
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t a = static_cast<std::size_t>(p) * S + s;
      std::size_t best = static_cast<std::size_t>(q) * S;
      double best_km = kInfinity;
      for (std::size_t r = 0; r < S; ++r) {
        const std::size_t b = static_cast<std::size_t>(q) * S + r;
        const double km = distance(pos[a], pos[b]);
        if (km < best_km) {
          best_km = km;
          best = b;
        }
      }
      edges.insert(ordered(a, best));
    }
  }
  return {edges.begin(), edges.end()};
}

std::vector<Pair> intra_plane(const WalkerShell& shell) {
  std::set<Pair> edges;
  const auto S = static_cast<std::size_t>(shell.sats_per_plane);
  if (S < 2) return {};
  for (int p = 0; p < shell.planes; ++p) {
    const std::size_t base = static_cast<std::size_t>(p) * S;
    for (std::size_t s = 0; s < S; ++s) edges.insert(ordered(base + s, base + (s + 1) % S));
  }
  return {edges.begin(), edges.end()};
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> build_isl_grid(const WalkerShell& shell) {
  shell.validate();
  std::set<Pair> edges;
  for (const auto& e : intra_plane(shell)) edges.insert(e);
  const auto S = static_cast<std::size_t>(shell.sats_per_plane);
  for (int p = 0; p < shell.planes; ++p) {
    const int q = next_plane(shell, p);
    if (q < 0 || q == p) continue;
    for (std::size_t s = 0; s < S; ++s)
      edges.insert(ordered(static_cast<std::size_t>(p) * S + s, static_cast<std::size_t>(q) * S + s));
  }
  return {edges.begin(), edges.end()};
}

double elevation_deg(const EcefPosition& sat, const EcefPosition& gs) {
  const EcefPosition los{sat.x - gs.x, sat.y - gs.y, sat.z - gs.z};
  const double range = los.norm();
  if (range == 0.0) return 90.0;
  const double sin_el = dot(los, gs) / (range * gs.norm());
  return rad2deg(std::asin(std::clamp(sin_el, -1.0, 1.0)));
}

bool visible(const EcefPosition& sat, const EcefPosition& gs, double min_elevation_deg) {
  return elevation_deg(sat, gs) >= min_elevation_deg;
}

TopologySnapshot build_snapshot(const WalkerShell& shell, std::span<const SatelliteElement> elements,
                                std::span<const GroundStation> stations, double t, const TopologyOptions& options) {
  if (elements.size() != static_cast<std::size_t>(shell.size()))
    throw std::invalid_argument("element count does not match shell size");

  TopologySnapshot snap;
  snap.t = t;
  snap.sat_positions.reserve(elements.size());
  for (const auto& e : elements) snap.sat_positions.push_back(propagate(e, t));
  snap.station_positions.reserve(stations.size());
  for (const auto& gs : stations) snap.station_positions.push_back(station_position(gs));

  std::vector<Pair> pairs;
  if (options.isl_pairing == IslPairing::SameSlot) {
    pairs = build_isl_grid(shell);
  } else {
    std::set<Pair> merged;
    for (const auto& e : intra_plane(shell)) merged.insert(e);
    for (const auto& e : nearest_inter_plane(shell, snap.sat_positions)) merged.insert(e);
    pairs.assign(merged.begin(), merged.end());
  }
  snap.isl_edges.reserve(pairs.size());
  for (const auto& [a, b] : pairs) snap.isl_edges.push_back({a, b, distance(snap.sat_positions[a], snap.sat_positions[b])});

  for (std::size_t s = 0; s < snap.n_sats(); ++s) {
    std::vector<GslEdge> links;
    for (std::size_t g = 0; g < snap.n_stations(); ++g) {
      if (visible(snap.sat_positions[s], snap.station_positions[g], options.min_elevation_deg))
        links.push_back({s, g, distance(snap.sat_positions[s], snap.station_positions[g])});
    }
    if (options.max_gsl_per_sat > 0 && links.size() > static_cast<std::size_t>(options.max_gsl_per_sat)) {
      std::stable_sort(links.begin(), links.end(), [](const GslEdge& x, const GslEdge& y) { return x.km < y.km; });
      links.resize(static_cast<std::size_t>(options.max_gsl_per_sat));
      std::sort(links.begin(), links.end(), [](const GslEdge& x, const GslEdge& y) { return x.station < y.station; });
    }
    snap.gsl_edges.insert(snap.gsl_edges.end(), links.begin(), links.end());
  }
  return snap;
}

DistanceField shortest_distances(const TopologySnapshot& snapshot) {
  const std::size_t n_sats = snapshot.n_sats();
  const std::size_t n_st = snapshot.n_stations();
  const std::size_t n = n_sats + n_st;

  // CSR adjacency over satellites [0, n_sats) and stations [n_sats, n).
  std::vector<std::size_t> degree(n + 1, 0);
  auto each_edge = [&](auto&& fn) {
    for (const auto& e : snapshot.isl_edges) fn(e.a, e.b, e.km);
    for (const auto& e : snapshot.gsl_edges) fn(e.sat, n_sats + e.station, e.km);
  };
  each_edge([&](std::size_t a, std::size_t b, double) {
    ++degree[a + 1];
    ++degree[b + 1];
  });
  for (std::size_t i = 0; i < n; ++i) degree[i + 1] += degree[i];
  std::vector<std::size_t> fill(degree.begin(), degree.end() - 1);
  std::vector<std::pair<std::size_t, double>> adj(degree[n]);
  each_edge([&](std::size_t a, std::size_t b, double w) {
    adj[fill[a]++] = {b, w};
    adj[fill[b]++] = {a, w};
  });

  DistanceField field(snapshot.t, n_sats, n_st);
  using Item = std::pair<double, std::size_t>;
  std::vector<double> dist(n);
  for (std::size_t g = 0; g < n_st; ++g) {
    std::fill(dist.begin(), dist.end(), kInfinity);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[n_sats + g] = 0.0;
    heap.push({0.0, n_sats + g});
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[u]) continue;
      for (std::size_t k = degree[u]; k < degree[u + 1]; ++k) {
        const auto [v, w] = adj[k];
        const double nd = du + w;
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
    for (std::size_t s = 0; s < n_sats; ++s) {
      field.d[s * n_st + g] = dist[s];
      field.reachable[s * n_st + g] = std::isfinite(dist[s]) ? 1 : 0;
    }
  }
  return field;
}

std::vector<DistanceField> distance_fields(const WalkerShell& shell, std::span<const SatelliteElement> elements,
                                           std::span<const GroundStation> stations, std::span<const double> times,
                                           const TopologyOptions& options) {
  std::vector<DistanceField> out(times.size());
  parallel_for(times.size(), [&](std::size_t i) {
    out[i] = shortest_distances(build_snapshot(shell, elements, stations, times[i], options));
  });
  return out;
}

std::vector<double> sample_times(double horizon_s, double step_s) {
  if (!(step_s > 0.0)) throw std::invalid_argument("sample step must be > 0");
  if (horizon_s < 0.0) throw std::invalid_argument("horizon must be >= 0");
  std::vector<double> times;
  const auto n = static_cast<std::size_t>(std::floor(horizon_s / step_s + 1e-9));
  times.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) times.push_back(static_cast<double>(i) * step_s);
  if (horizon_s - times.back() > 1e-9) times.push_back(horizon_s);
  return times;
}

nlohmann::json to_json(const TopologySnapshot& snapshot) {
  using nlohmann::json;
  auto pos = [](const EcefPosition& p) { return json::array({p.x, p.y, p.z}); };
  json j;
  j["t"] = snapshot.t;
  j["sat_positions_km"] = json::array();
  for (const auto& p : snapshot.sat_positions) j["sat_positions_km"].push_back(pos(p));
  j["station_positions_km"] = json::array();
  for (const auto& p : snapshot.station_positions) j["station_positions_km"].push_back(pos(p));
  j["isl_edges"] = json::array();
  for (const auto& e : snapshot.isl_edges) j["isl_edges"].push_back({{"a", e.a}, {"b", e.b}, {"km", e.km}});
  j["gsl_edges"] = json::array();
  for (const auto& e : snapshot.gsl_edges)
    j["gsl_edges"].push_back({{"sat", e.sat}, {"station", e.station}, {"km", e.km}});
  return j;
}

nlohmann::json to_json(const DistanceField& field) {
  using nlohmann::json;
  json rows = json::array();
  for (std::size_t s = 0; s < field.n_sats; ++s) {
    json row = json::array();
    for (std::size_t g = 0; g < field.n_stations; ++g) {
      if (field.is_reachable(s, g))
        row.push_back(field.at(s, g));
      else
        row.push_back(nullptr);
    }
    rows.push_back(std::move(row));
  }
  return {{"t", field.t}, {"n_sats", field.n_sats}, {"n_stations", field.n_stations}, {"d_km", std::move(rows)}};
}

void write_distance_csv(std::ostream& os, std::span<const DistanceField> fields) {
  os << "t,sat,station,km\n";
  for (const auto& f : fields)
    for (std::size_t s = 0; s < f.n_sats; ++s)
      for (std::size_t g = 0; g < f.n_stations; ++g) os << fixed(f.t, 3) << ',' << s << ',' << g << ',' << fixed(f.at(s, g), 6) << '\n';
}

}  // namespace leocp

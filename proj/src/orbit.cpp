#include "leocp/orbit.hpp"

#include <cmath>
#include <stdexcept>

namespace leocp {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

void WalkerShell::validate() const {
  require(planes >= 1, "shell.planes must be >= 1");
  require(sats_per_plane >= 1, "shell.sats_per_plane must be >= 1");
  require(inclination_deg >= 0.0 && inclination_deg <= 180.0,
          "shell.inclination_deg must be in [0, 180]");
  require(altitude_km > 0.0, "shell.altitude_km must be > 0");
  require(phasing_factor >= 0 && phasing_factor < planes,
          "shell.phasing_factor must be in [0, planes)");
  require(raan_span_deg > 0.0 && raan_span_deg <= 360.0, "shell.raan_span_deg must be in (0, 360]");
}

void GroundStation::validate() const {
  require(std::abs(latitude_deg) <= 90.0, "station latitude out of range: " + name);
  require(std::abs(longitude_deg) <= 180.0, "station longitude out of range: " + name);
}

double EcefPosition::norm() const { return std::sqrt(x * x + y * y + z * z); }

double distance(const EcefPosition& a, const EcefPosition& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double dot(const EcefPosition& a, const EcefPosition& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

std::vector<SatelliteElement> generate_constellation(const WalkerShell& shell) {
  shell.validate();
  const int total = shell.size();
  const double a = kEarthRadiusKm + shell.altitude_km;
  const double incl = deg2rad(shell.inclination_deg);
  const double raan_step = deg2rad(shell.raan_span_deg) / shell.planes;
  const double slot_step = 2.0 * kPi / shell.sats_per_plane;
  const double plane_offset = 2.0 * kPi * shell.phasing_factor / total;

  std::vector<SatelliteElement> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int p = 0; p < shell.planes; ++p) {
    for (int s = 0; s < shell.sats_per_plane; ++s) {
      SatelliteElement e;
      e.id = {p, s};
      e.raan = p * raan_step;
      e.initial_phase = std::fmod(s * slot_step + p * plane_offset, 2.0 * kPi);
      e.semi_major_axis = a;
      e.inclination = incl;
      out.push_back(e);
    }
  }
  return out;
}

double orbital_period(double semi_major_axis_km) {
  return 2.0 * kPi * std::sqrt(semi_major_axis_km * semi_major_axis_km * semi_major_axis_km / kEarthMu);
}

EcefPosition propagate_inertial(const SatelliteElement& elem, double t) {
  const double a = elem.semi_major_axis;
  const double n = std::sqrt(kEarthMu / (a * a * a));
  const double u = elem.initial_phase + n * t;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(elem.raan), so = std::sin(elem.raan);
  const double ci = std::cos(elem.inclination), si = std::sin(elem.inclination);
  return {a * (co * cu - so * su * ci), a * (so * cu + co * su * ci), a * (su * si)};
}

EcefPosition propagate(const SatelliteElement& elem, double t) {
  const EcefPosition eci = propagate_inertial(elem, t);
  const double theta = kEarthRotationRate * t;
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * eci.x + s * eci.y, -s * eci.x + c * eci.y, eci.z};
}

EcefPosition station_position(const GroundStation& gs) {
  const double r = kEarthRadiusKm + gs.altitude_m / 1000.0;
  const double lat = deg2rad(gs.latitude_deg);
  const double lon = deg2rad(gs.longitude_deg);
  return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

std::vector<EcefPosition> station_positions(const std::vector<GroundStation>& stations) {
  std::vector<EcefPosition> out;
  out.reserve(stations.size());
  for (const auto& gs : stations) out.push_back(station_position(gs));
  return out;
}

}  // namespace leocp

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace leocp {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthMu = 398600.4418;          // km^3/s^2
inline constexpr double kEarthRotationRate = 7.2921159e-5;  // rad/s
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Walker shell: planes x sats_per_plane satellites on circular orbits.
/// raan_span is 360 for a delta pattern and 180 for a star pattern.
struct WalkerShell {
  int planes = 1;
  int sats_per_plane = 1;
  double inclination_deg = 0.0;
  double altitude_km = 550.0;
  int phasing_factor = 0;
  double raan_span_deg = 360.0;

  int size() const { return planes * sats_per_plane; }
  bool is_delta() const { return raan_span_deg >= 360.0 - 1e-9; }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct SatId {
  int plane = 0;
  int slot = 0;

  friend bool operator==(const SatId&, const SatId&) = default;
};

struct SatelliteElement {
  SatId id;
  double raan = 0.0;           // rad
  double initial_phase = 0.0;  // rad, argument of latitude at t=0
  double semi_major_axis = 0.0;  // km
  double inclination = 0.0;      // rad
};

struct GroundStation {
  int id = 0;
  std::string name;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
  double altitude_m = 0.0;

  void validate() const;
};

struct EcefPosition {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  friend bool operator==(const EcefPosition&, const EcefPosition&) = default;
};

double distance(const EcefPosition& a, const EcefPosition& b);
double dot(const EcefPosition& a, const EcefPosition& b);

/// Satellites in plane-major order; element i has id {i / S, i % S}.
std::vector<SatelliteElement> generate_constellation(const WalkerShell& shell);

inline std::size_t linear_index(const WalkerShell& shell, SatId id) {
  return static_cast<std::size_t>(id.plane) * static_cast<std::size_t>(shell.sats_per_plane) +
         static_cast<std::size_t>(id.slot);
}

double orbital_period(double semi_major_axis_km);

/// Earth-centred inertial position at t seconds after epoch.
EcefPosition propagate_inertial(const SatelliteElement& elem, double t);

/// Earth-fixed position: the inertial position rotated by -omega_E * t.
EcefPosition propagate(const SatelliteElement& elem, double t);

/// Spherical-Earth geodetic to ECEF; time independent.
EcefPosition station_position(const GroundStation& gs);

std::vector<EcefPosition> station_positions(const std::vector<GroundStation>& stations);

}  // namespace leocp

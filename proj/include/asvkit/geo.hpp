// Geodetic <-> local tangent-plane conversions and rigid-body frame math
// shared by every other module. Local frame is East-North-Up (ENU) anchored
// at a per-survey origin; body frame is aerospace (forward, starboard, down)
// with intrinsic yaw -> pitch -> roll (Z-Y-X) rotations.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace asv::geo {

inline constexpr double kWgs84SemiMajorAxis = 6378137.0;          // m
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kWgs84Ecc2 =
    kWgs84Flattening * (2.0 - kWgs84Flattening);
inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Geodetic position on the WGS84 ellipsoid.
struct GeoPoint {
  double latitude_deg = 0.0;   // [-90, 90]
  double longitude_deg = 0.0;  // [-180, 180]
  double height_m = 0.0;       // ellipsoidal height

  bool valid() const {
    return latitude_deg >= -90.0 && latitude_deg <= 90.0 &&
           longitude_deg >= -180.0 && longitude_deg <= 180.0 &&
           std::isfinite(height_m);
  }
};

/// Position in the local East-North-Up tangent plane, meters.
struct EnuPoint {
  double east = 0.0;
  double north = 0.0;
  double up = 0.0;

  EnuPoint() = default;
  EnuPoint(double e, double n, double u) : east(e), north(n), up(u) {}
  explicit EnuPoint(const Eigen::Vector3d& v)
      : east(v.x()), north(v.y()), up(v.z()) {}

  Eigen::Vector3d vec() const { return {east, north, up}; }
  double horizontal_distance_to(const EnuPoint& o) const {
    return std::hypot(east - o.east, north - o.north);
  }
  double distance_to(const EnuPoint& o) const {
    return (vec() - o.vec()).norm();
  }
};

/// Vehicle attitude, radians. Yaw is heading, clockwise from true north.
struct Attitude {
  double roll = 0.0;   // (-pi, pi], starboard-down positive
  double pitch = 0.0;  // (-pi, pi], nose-up positive
  double yaw = 0.0;    // [0, 2*pi)

  /// Rotation taking body-frame (forward, starboard, down) vectors to ENU.
  Eigen::Matrix3d body_to_enu() const;
};

/// Timestamped kinematic state in the local frame.
struct Pose {
  double t = 0.0;  // seconds since survey start
  EnuPoint position;
  Attitude attitude;
};

/// Fixed body-frame offset between two sensors (forward, starboard, down).
struct LeverArm {
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

Eigen::Vector3d geodetic_to_ecef(const GeoPoint& p);
GeoPoint ecef_to_geodetic(const Eigen::Vector3d& ecef);

/// Local tangent-plane coordinates of `p` relative to `origin`.
/// Throws std::domain_error on invalid coordinates or baselines >= 50 km.
EnuPoint geo_to_enu(const GeoPoint& p, const GeoPoint& origin);

/// Inverse of geo_to_enu; round-trips within 1 mm for baselines < 10 km.
GeoPoint enu_to_geo(const EnuPoint& p, const GeoPoint& origin);

/// Rotate a body-frame vector into ENU. Zero attitude maps
/// (forward, starboard, down) to (north, east, -up).
Eigen::Vector3d rotate_body_to_enu(const Eigen::Vector3d& v_body,
                                   const Attitude& a);

/// ENU position of a sensor displaced from the antenna by `arm`.
EnuPoint apply_lever_arm(const Pose& antenna_pose, const LeverArm& arm);

}  // namespace asv::geo

#include "asvkit/geo.hpp"

#include <cmath>

namespace asv::geo {

namespace {

void require_valid(const GeoPoint& p, const char* what) {
  if (!p.valid()) {
    throw std::domain_error(std::string(what) +
                            ": latitude/longitude out of range");
  }
}

/// Rotation from ECEF axes to the ENU axes of the tangent plane at (lat, lon).
Eigen::Matrix3d ecef_to_enu_rotation(double lat_rad, double lon_rad) {
  const double sl = std::sin(lat_rad), cl = std::cos(lat_rad);
  const double so = std::sin(lon_rad), co = std::cos(lon_rad);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
        cl * co, cl * so, sl;
  return r;
}

}  // namespace

Eigen::Vector3d geodetic_to_ecef(const GeoPoint& p) {
  const double lat = deg2rad(p.latitude_deg);
  const double lon = deg2rad(p.longitude_deg);
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double n = kWgs84SemiMajorAxis / std::sqrt(1.0 - kWgs84Ecc2 * sl * sl);
  return {(n + p.height_m) * cl * std::cos(lon),
          (n + p.height_m) * cl * std::sin(lon),
          (n * (1.0 - kWgs84Ecc2) + p.height_m) * sl};
}

GeoPoint ecef_to_geodetic(const Eigen::Vector3d& ecef) {
  const double x = ecef.x(), y = ecef.y(), z = ecef.z();
  const double p = std::hypot(x, y);
  double lat = std::atan2(z, p * (1.0 - kWgs84Ecc2));
  double h = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double sl = std::sin(lat);
    const double n =
        kWgs84SemiMajorAxis / std::sqrt(1.0 - kWgs84Ecc2 * sl * sl);
    h = p / std::cos(lat) - n;
    const double lat_next = std::atan2(z, p * (1.0 - kWgs84Ecc2 * n / (n + h)));
    if (std::abs(lat_next - lat) < 1e-14) {
      lat = lat_next;
      break;
    }
    lat = lat_next;
  }
  return {rad2deg(lat), rad2deg(std::atan2(y, x)), h};
}

EnuPoint geo_to_enu(const GeoPoint& p, const GeoPoint& origin) {
  require_valid(p, "geo_to_enu point");
  require_valid(origin, "geo_to_enu origin");
  const Eigen::Vector3d delta = geodetic_to_ecef(p) - geodetic_to_ecef(origin);
  if (delta.norm() >= 50e3) {
    throw std::domain_error("geo_to_enu: baseline exceeds 50 km");
  }
  const Eigen::Vector3d enu =
      ecef_to_enu_rotation(deg2rad(origin.latitude_deg),
                           deg2rad(origin.longitude_deg)) *
      delta;
  return EnuPoint(enu);
}

GeoPoint enu_to_geo(const EnuPoint& p, const GeoPoint& origin) {
  require_valid(origin, "enu_to_geo origin");
  if (p.vec().norm() >= 50e3) {
    throw std::domain_error("enu_to_geo: baseline exceeds 50 km");
  }
  const Eigen::Matrix3d r = ecef_to_enu_rotation(
      deg2rad(origin.latitude_deg), deg2rad(origin.longitude_deg));
  const Eigen::Vector3d ecef =
      geodetic_to_ecef(origin) + r.transpose() * p.vec();
  return ecef_to_geodetic(ecef);
}

Eigen::Matrix3d Attitude::body_to_enu() const {
  const double cr = std::cos(roll), sr = std::sin(roll);
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  // Intrinsic Z-Y-X in NED axes (x north, y east, z down), yaw positive
  // clockwise from north.
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, cr, -sr, 0, sr, cr;
  ry << cp, 0, sp, 0, 1, 0, -sp, 0, cp;
  rz << cy, -sy, 0, sy, cy, 0, 0, 0, 1;
  const Eigen::Matrix3d ned = rz * ry * rx;
  // Re-express NED rows as ENU: east = ned row 1, north = row 0, up = -row 2.
  Eigen::Matrix3d enu;
  enu.row(0) = ned.row(1);
  enu.row(1) = ned.row(0);
  enu.row(2) = -ned.row(2);
  return enu;
}

Eigen::Vector3d rotate_body_to_enu(const Eigen::Vector3d& v_body,
                                   const Attitude& a) {
  return a.body_to_enu() * v_body;
}

EnuPoint apply_lever_arm(const Pose& antenna_pose, const LeverArm& arm) {
  return EnuPoint(antenna_pose.position.vec() +
                  rotate_body_to_enu(arm.offset, antenna_pose.attitude));
}

}  // namespace asv::geo

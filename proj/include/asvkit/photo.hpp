// Photogrammetric mission support: in-water camera footprint geometry,
// transect spacing for a target side overlap, and post-hoc coverage checks
// over a survey log. Reconstruction itself is out of scope; geometry is
// what the planner controls.
#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "asvkit/geo.hpp"
#include "asvkit/logfmt.hpp"

namespace asv::photo {

class GeometryError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CameraModel {
  double hfov_water_deg = 60.0;  // across-track, effective in-water
  double vfov_water_deg = 45.0;  // along-track
  double frame_interval_s = 0.5;
  double tilt_from_vertical_deg = 0.0;  // toward forward; 30 in tracking mode
};

/// Flat-port refraction approximation: tan(theta_w) = tan(theta_a) / 1.33.
double water_fov_from_air(double air_fov_deg);

/// Seabed quadrilateral viewed by one frame, corners in ENU order.
struct Footprint {
  std::array<geo::EnuPoint, 4> corners;
  double area() const;
};

/// Project the FOV pyramid (camera tilt plus vehicle attitude) onto the
/// horizontal plane `depth_m` below the surface. Throws GeometryError when
/// depth <= 0 or a corner ray fails to reach the seabed.
Footprint footprint(const geo::Pose& pose, const CameraModel& camera,
                    double depth_m);

double swath_width(const CameraModel& camera, double depth_m);

/// Transect spacing achieving the target side overlap at the given depth;
/// call with the survey's minimum depth for a conservative plan.
double spacing_for_overlap(const CameraModel& camera, double depth_m,
                           double target_overlap = 0.7);

/// Inverse helper: the in-water horizontal FOV a camera must have for the
/// given spacing to meet the target overlap at the given depth.
double fov_for_spacing(double spacing_m, double depth_m,
                       double target_overlap = 0.7);

struct CoverageReport {
  double ll_east = 0.0;
  double ll_north = 0.0;
  double cell_size_m = 0.1;
  int rows = 0;
  int cols = 0;
  std::vector<int> counts;  // images seen per cell, row-major

  int frames = 0;
  double covered_fraction = 0.0;  // area inside the swath hull with >=1 view
  double forward_overlap_mean = 0.0;
  double forward_overlap_min = 1.0;
  double fraction_forward_pairs_ok = 0.0;
  std::vector<std::array<double, 4>> gap_boxes;  // e0, n0, e1, n1

  void write_counts_ascii(std::ostream& out) const;
  std::string gaps_geojson(const geo::GeoPoint& origin) const;
};

/// Synthesize frame poses at the camera interval from the log's GPS/ATT
/// streams, rasterize footprints at 0.1 m cells, and report coverage and
/// forward-overlap statistics. Unlike a pure spacing table this accounts
/// for the camera rate and the vehicle speed.
CoverageReport coverage_report(
    const logfmt::SurveyLog& log, const CameraModel& camera,
    const std::function<double(double, double)>& depth_at,
    double cell_size_m = 0.1, double target_overlap = 0.7);

CoverageReport coverage_report(const logfmt::SurveyLog& log,
                               const CameraModel& camera, double const_depth_m,
                               double cell_size_m = 0.1,
                               double target_overlap = 0.7);

}  // namespace asv::photo

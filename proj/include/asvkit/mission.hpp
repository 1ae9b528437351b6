// Lawnmower survey planning over a rectangular area, sampling-density
// derivation, and survey-category compliance checks.
#pragma once

#include <string>
#include <vector>

#include "asvkit/geo.hpp"

namespace asv::mission {

class PlanningError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rectangular survey area. The length axis bearing is degrees clockwise
/// from true north; width spans the perpendicular direction.
struct SurveyArea {
  geo::GeoPoint center;
  double width_m = 0.0;
  double length_m = 0.0;
  double bearing_of_length_axis_deg = 0.0;
};

/// Boustrophedon plan: waypoints alternate long-edge traversals, transects
/// parallel to the longest axis, first transect inset spacing/2.
struct MissionPlan {
  std::vector<geo::GeoPoint> waypoints;
  double transect_spacing_m = 0.0;
  double cruise_speed_mps = 0.0;
  double sample_rate_hz = 0.0;
  int transect_count = 0;
  double transect_length_m = 0.0;
  double transect_bearing_deg = 0.0;  // heading of the first transect
  SurveyArea area;
};

struct SamplingSpec {
  double along_track_m = 0.0;
  double cross_track_m = 0.0;
  double beam_angle_deg = 0.0;

  /// Ensonified footprint diameter of a conical beam at the given depth.
  double footprint_diameter_at(double depth_m) const {
    return 2.0 * depth_m * std::tan(geo::deg2rad(beam_angle_deg / 2.0));
  }
};

/// Default IHO order-1a total-vertical-uncertainty coefficients; the
/// standard's published values, configurable everywhere they are used.
inline constexpr double kIhoOrder1aTvuA = 0.5;    // meters
inline constexpr double kIhoOrder1aTvuB = 0.013;  // unitless
inline constexpr double kIhoOrder1aMaxDepth = 100.0;

struct IhoDepthCheck {
  double depth_m = 0.0;
  double allowed_tvu_m = 0.0;
  bool tvu_ok = false;
};

struct IhoReport {
  IhoDepthCheck shallow;
  IhoDepthCheck deep;
  bool depth_limit_ok = false;  // max depth within the category limit
  bool pass = false;
  std::string summary() const;
};

/// Plan serpentine transects over `area`. Throws PlanningError when the
/// spacing exceeds the short dimension or the speed is outside the
/// supported envelope (0.5..1.2 m/s unless allow_any_speed).
MissionPlan plan_lawnmower(const SurveyArea& area, double spacing_m,
                           double speed_mps, double rate_hz,
                           bool allow_any_speed = false);

SamplingSpec sampling_spec(const MissionPlan& plan, double beam_angle_deg);

/// Evaluate the TVU budget sqrt(a^2 + (b*d)^2) at both depth bounds and the
/// category depth limit. Throws std::domain_error on non-positive
/// coefficients.
IhoReport check_iho_category(const SamplingSpec& spec, double depth_min_m,
                             double depth_max_m, double tvu_a = kIhoOrder1aTvuA,
                             double tvu_b = kIhoOrder1aTvuB,
                             double sensor_sigma_m = 0.05);

/// Transect traversal time plus one fixed turn cost between consecutive
/// transects.
double estimate_duration_s(const MissionPlan& plan, double turn_time_s);

/// GeoJSON FeatureCollection: LineString of the waypoints plus a properties
/// block carrying every plan parameter.
std::string plan_to_geojson(const MissionPlan& plan);
MissionPlan plan_from_geojson(const std::string& text);
MissionPlan plan_from_geojson_file(const std::string& path);

}  // namespace asv::mission

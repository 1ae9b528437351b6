#include "asvkit/mission.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace asv::mission {

using ordered_json = nlohmann::ordered_json;

MissionPlan plan_lawnmower(const SurveyArea& area, double spacing_m,
                           double speed_mps, double rate_hz,
                           bool allow_any_speed) {
  if (!(area.width_m > 0.0 && area.length_m > 0.0)) {
    throw PlanningError("survey area dimensions must be positive");
  }
  if (area.width_m * area.length_m > 1e6) {
    throw PlanningError("survey area exceeds the 10^6 m^2 sanity cap");
  }
  if (!area.center.valid()) {
    throw PlanningError("survey area center is not a valid coordinate");
  }
  if (!(spacing_m > 0.0)) {
    throw PlanningError("transect spacing must be positive");
  }
  if (!(rate_hz > 0.0)) {
    throw PlanningError("sample rate must be positive");
  }
  if (!(speed_mps > 0.0)) {
    throw PlanningError("cruise speed must be positive");
  }
  if (!allow_any_speed && (speed_mps < 0.5 || speed_mps > 1.2)) {
    throw PlanningError(
        "cruise speed outside the supported 0.5..1.2 m/s envelope "
        "(pass allow_any_speed to override)");
  }

  const double long_dim = std::max(area.width_m, area.length_m);
  const double short_dim = std::min(area.width_m, area.length_m);
  if (spacing_m > short_dim) {
    throw PlanningError("transect spacing exceeds the short area dimension");
  }

  const int count = static_cast<int>(std::floor(short_dim / spacing_m + 1e-9));

  // Transects run parallel to the longest axis.
  const double long_bearing = (area.length_m >= area.width_m)
                                  ? area.bearing_of_length_axis_deg
                                  : area.bearing_of_length_axis_deg + 90.0;
  const double b = geo::deg2rad(long_bearing);
  const Eigen::Vector2d u(std::sin(b), std::cos(b));   // along transects, E/N
  const Eigen::Vector2d v(std::cos(b), -std::sin(b));  // cross-track, E/N

  MissionPlan plan;
  plan.transect_spacing_m = spacing_m;
  plan.cruise_speed_mps = speed_mps;
  plan.sample_rate_hz = rate_hz;
  plan.transect_count = count;
  plan.transect_length_m = long_dim;
  plan.transect_bearing_deg = long_bearing;
  plan.area = area;
  plan.waypoints.reserve(2 * static_cast<std::size_t>(count));

  for (int i = 0; i < count; ++i) {
    const double off = -short_dim / 2.0 + spacing_m / 2.0 + i * spacing_m;
    const Eigen::Vector2d a_end = u * (-long_dim / 2.0) + v * off;
    const Eigen::Vector2d b_end = u * (long_dim / 2.0) + v * off;
    const Eigen::Vector2d first = (i % 2 == 0) ? a_end : b_end;
    const Eigen::Vector2d second = (i % 2 == 0) ? b_end : a_end;
    plan.waypoints.push_back(
        geo::enu_to_geo({first.x(), first.y(), 0.0}, area.center));
    plan.waypoints.push_back(
        geo::enu_to_geo({second.x(), second.y(), 0.0}, area.center));
  }
  return plan;
}

SamplingSpec sampling_spec(const MissionPlan& plan, double beam_angle_deg) {
  if (!(beam_angle_deg > 0.0 && beam_angle_deg < 90.0)) {
    throw std::domain_error("beam angle must be in (0, 90) degrees");
  }
  SamplingSpec spec;
  spec.along_track_m = plan.cruise_speed_mps / plan.sample_rate_hz;
  spec.cross_track_m = plan.transect_spacing_m;
  spec.beam_angle_deg = beam_angle_deg;
  return spec;
}

IhoReport check_iho_category(const SamplingSpec&, double depth_min_m,
                             double depth_max_m, double tvu_a, double tvu_b,
                             double sensor_sigma_m) {
  if (!(tvu_a > 0.0 && tvu_b > 0.0)) {
    throw std::domain_error("TVU coefficients must be positive");
  }
  if (!(depth_min_m > 0.0 && depth_max_m >= depth_min_m)) {
    throw std::domain_error("depth range must be positive and ordered");
  }
  if (sensor_sigma_m < 0.0) {
    throw std::domain_error("sensor sigma must be >= 0");
  }
  auto eval = [&](double d) {
    IhoDepthCheck c;
    c.depth_m = d;
    c.allowed_tvu_m = std::sqrt(tvu_a * tvu_a + tvu_b * d * tvu_b * d);
    c.tvu_ok = sensor_sigma_m <= c.allowed_tvu_m;
    return c;
  };
  IhoReport report;
  report.shallow = eval(depth_min_m);
  report.deep = eval(depth_max_m);
  report.depth_limit_ok = depth_max_m <= kIhoOrder1aMaxDepth;
  report.pass =
      report.shallow.tvu_ok && report.deep.tvu_ok && report.depth_limit_ok;
  return report;
}

std::string IhoReport::summary() const {
  std::ostringstream out;
  auto line = [&](const char* label, const IhoDepthCheck& c) {
    out << label << " d=" << c.depth_m << " m: allowed TVU "
        << c.allowed_tvu_m << " m -> " << (c.tvu_ok ? "ok" : "FAIL") << "\n";
  };
  line("shallow", shallow);
  line("deep", deep);
  out << "depth limit (<= " << kIhoOrder1aMaxDepth
      << " m): " << (depth_limit_ok ? "ok" : "FAIL") << "\n";
  out << "order 1a: " << (pass ? "PASS" : "FAIL") << "\n";
  return out.str();
}

double estimate_duration_s(const MissionPlan& plan, double turn_time_s) {
  if (plan.transect_count < 1 || !(plan.cruise_speed_mps > 0.0)) {
    throw PlanningError("plan has no transects or a non-positive speed");
  }
  const double travel =
      plan.transect_count * plan.transect_length_m / plan.cruise_speed_mps;
  return travel + (plan.transect_count - 1) * turn_time_s;
}

std::string plan_to_geojson(const MissionPlan& plan) {
  ordered_json coords = ordered_json::array();
  for (const auto& wp : plan.waypoints) {
    coords.push_back({wp.longitude_deg, wp.latitude_deg});
  }
  ordered_json feature = {
      {"type", "Feature"},
      {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
      {"properties",
       {{"transect_spacing_m", plan.transect_spacing_m},
        {"cruise_speed_mps", plan.cruise_speed_mps},
        {"sample_rate_hz", plan.sample_rate_hz},
        {"transect_count", plan.transect_count},
        {"transect_length_m", plan.transect_length_m},
        {"transect_bearing_deg", plan.transect_bearing_deg},
        {"area",
         {{"center_lat", plan.area.center.latitude_deg},
          {"center_lon", plan.area.center.longitude_deg},
          {"width_m", plan.area.width_m},
          {"length_m", plan.area.length_m},
          {"bearing_of_length_axis_deg",
           plan.area.bearing_of_length_axis_deg}}}}}};
  ordered_json root = {{"type", "FeatureCollection"},
                       {"features", ordered_json::array({feature})}};
  return root.dump(2) + "\n";
}

MissionPlan plan_from_geojson(const std::string& text) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PlanningError(std::string("plan GeoJSON parse failure: ") +
                        e.what());
  }
  try {
    const auto& feature = root.at("features").at(0);
    const auto& props = feature.at("properties");
    const auto& area_j = props.at("area");
    MissionPlan plan;
    plan.transect_spacing_m = props.at("transect_spacing_m").get<double>();
    plan.cruise_speed_mps = props.at("cruise_speed_mps").get<double>();
    plan.sample_rate_hz = props.at("sample_rate_hz").get<double>();
    plan.transect_count = props.at("transect_count").get<int>();
    plan.transect_length_m = props.at("transect_length_m").get<double>();
    plan.transect_bearing_deg = props.at("transect_bearing_deg").get<double>();
    plan.area.center = {area_j.at("center_lat").get<double>(),
                        area_j.at("center_lon").get<double>(), 0.0};
    plan.area.width_m = area_j.at("width_m").get<double>();
    plan.area.length_m = area_j.at("length_m").get<double>();
    plan.area.bearing_of_length_axis_deg =
        area_j.at("bearing_of_length_axis_deg").get<double>();
    for (const auto& c :
         feature.at("geometry").at("coordinates")) {
      plan.waypoints.push_back(
          {c.at(1).get<double>(), c.at(0).get<double>(), 0.0});
    }
    if (plan.waypoints.size() !=
        2 * static_cast<std::size_t>(plan.transect_count)) {
      throw PlanningError("plan GeoJSON waypoint count does not match "
                          "transect count");
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw PlanningError(std::string("plan GeoJSON missing fields: ") +
                        e.what());
  }
}

MissionPlan plan_from_geojson_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw PlanningError("cannot open plan file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return plan_from_geojson(buf.str());
}

}  // namespace asv::mission

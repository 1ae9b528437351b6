// Deterministic survey simulator: waypoint-following kinematics, wave
// attitude, seabed truth models, beacon motion, sensor noise, and battery
// drain. Identical seeds and configs produce byte-identical logs.
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "asvkit/geo.hpp"
#include "asvkit/logfmt.hpp"
#include "asvkit/mission.hpp"

namespace asv::sim {

struct VehicleModel {
  double max_speed_mps = 1.2;  // Table-style platform bound
  double cruise_speed_mps = 1.0;
  double turn_rate_max_rps = 0.8;
  double speed_time_constant_s = 1.0;
  double waypoint_accept_radius_m = 0.5;
};

struct VehicleState {
  geo::EnuPoint position;
  double heading_rad = 0.0;  // clockwise from north
  double speed_mps = 0.0;
  bool reached = false;  // within the accept radius of the last target
};

/// First-order speed response plus bounded turn rate toward the target.
/// Throws std::invalid_argument unless dt is in (0, 1] s.
VehicleState step_vehicle(const VehicleState& state,
                          const geo::EnuPoint& target,
                          const VehicleModel& model, double dt);

/// Analytic seabed truth: depth (positive down, meters) as a function of
/// local east/north. Rocks are smooth cosine mounds so the surface stays
/// resolvable by a single-beam footprint.
struct SeabedModel {
  enum class Kind { PLANE, SLOPE, ROCKS, SAND_RIFT, COMPOSITE };

  struct Rock {
    double east = 0.0;
    double north = 0.0;
    double radius_m = 2.0;
    double height_m = 1.0;
  };

  Kind kind = Kind::PLANE;
  double base_depth_m = 5.0;
  Eigen::Vector2d slope = Eigen::Vector2d::Zero();  // ddepth/deast, /dnorth
  std::vector<Rock> rocks;
  double rift_amplitude_m = 0.0;
  double rift_wavelength_m = 20.0;
  double rift_bearing_deg = 0.0;

  double depth_at(double east, double north) const;

  static SeabedModel plane(double depth_m);
  static SeabedModel sloped(double base_depth_m, double d_east, double d_north);
  static SeabedModel rock_field(double base_depth_m, std::vector<Rock> rocks);
  static SeabedModel sand_rift(double base_depth_m, double amplitude_m,
                               double wavelength_m, double bearing_deg);
  static SeabedModel composite(double base_depth_m,
                               const Eigen::Vector2d& slope,
                               std::vector<Rock> rocks,
                               double rift_amplitude_m = 0.0,
                               double rift_wavelength_m = 20.0,
                               double rift_bearing_deg = 0.0);

  /// Declarative JSON spec (see README for the schema).
  static SeabedModel from_json(const std::string& text);
  static SeabedModel from_json_file(const std::string& path);
  std::string to_json() const;
};

/// Sinusoidal roll/pitch plus Bernoulli gusts that exceed the bathymetry
/// attitude-filter threshold, so downstream rejection has work to do.
struct WaveModel {
  double roll_amplitude_rad = geo::deg2rad(4.0);
  double pitch_amplitude_rad = geo::deg2rad(3.0);
  double period_s = 4.0;
  double gust_spike_probability = 0.01;  // per 10 Hz step
  double gust_magnitude_rad = geo::deg2rad(14.0);
  int gust_hold_steps = 3;

  static WaveModel calm();
};

struct BatteryModel {
  double capacity_wh = 296.0;  // two 4S 10 Ah packs
  double avg_power_draw_w = 70.0;
  double full_cell_v = 4.2;
  double empty_cell_v = 3.3;
  int series_cells = 4;

  double voltage_at_soc(double soc) const;
  double endurance_hours(double draw_w) const;
};

struct SensorNoiseConfig {
  double gps_horizontal_sigma_m = 0.02;  // per axis, RTK grade
  double gps_vertical_sigma_m = 0.04;
  double gps_rate_hz = 5.0;
  double depth_sigma_m = 0.02;
  double depth_spike_probability = 0.01;  // per sample
  double depth_spike_sigma_m = 3.0;
  double cross_track_sigma_m = 0.1;  // navigation disturbance, RMS
  Eigen::Vector2d current_drift_mps = Eigen::Vector2d::Zero();

  static SensorNoiseConfig noiseless();
};

struct SurveyRunConfig {
  std::string survey_id = "sim-survey";
  std::string epoch_utc = "2020-10-09T08:00:00Z";  // header wall clock
  double att_rate_hz = 10.0;
  double bat_rate_hz = 1.0;
  double max_depth_m = 50.0;  // echo-sounder rated range
};

/// Simulate the full survey described by `plan`. Lever arms must contain
/// "gps" and "echosounder" entries (body frame: forward, starboard, down).
logfmt::SurveyLog run_survey(const mission::MissionPlan& plan,
                             const VehicleModel& vehicle,
                             const SeabedModel& seabed, const WaveModel& waves,
                             const BatteryModel& battery,
                             const std::map<std::string, geo::LeverArm>& arms,
                             const SensorNoiseConfig& noise, uint64_t seed,
                             const SurveyRunConfig& run = {});

std::map<std::string, geo::LeverArm> default_lever_arms();

enum class BeaconProfileKind { STATIONARY, RANDOM_WALK, DIVE_CYCLE };

BeaconProfileKind beacon_profile_kind_from_string(std::string_view s);

struct BeaconProfileParams {
  double duration_s = 1500.0;
  double dt_s = 1.0;
  geo::EnuPoint start{0.0, 0.0, -2.0};
  double mean_speed_mps = 0.8;
  double heading_tau_s = 25.0;  // persistence of the horizontal walk
  double dive_depth_m = 8.0;
  double dive_duration_s = 90.0;
  double surface_interval_s = 60.0;
  double vertical_speed_mps = 0.4;
  double surface_offset_m = 0.5;  // locator stays this far underwater
};

struct TimedEnu {
  double t = 0.0;
  geo::EnuPoint position;
};

/// Deterministic beacon track. Throws std::invalid_argument above 2 m/s.
std::vector<TimedEnu> beacon_profile(BeaconProfileKind kind,
                                     const BeaconProfileParams& params,
                                     uint64_t seed);

}  // namespace asv::sim

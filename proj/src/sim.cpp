#include "asvkit/sim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace asv::sim {

using ordered_json = nlohmann::ordered_json;

namespace {

double wrap_pi(double a) {
  while (a > geo::kPi) a -= 2.0 * geo::kPi;
  while (a <= -geo::kPi) a += 2.0 * geo::kPi;
  return a;
}

double wrap_two_pi(double a) {
  const double two_pi = 2.0 * geo::kPi;
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

}  // namespace

VehicleState step_vehicle(const VehicleState& state,
                          const geo::EnuPoint& target,
                          const VehicleModel& model, double dt) {
  if (!(dt > 0.0 && dt <= 1.0)) {
    throw std::invalid_argument("step_vehicle: dt must be in (0, 1] s");
  }
  VehicleState next = state;
  const double de = target.east - state.position.east;
  const double dn = target.north - state.position.north;
  const double dist = std::hypot(de, dn);

  next.reached = dist <= model.waypoint_accept_radius_m;
  double commanded = 0.0;
  if (!next.reached) {
    const double desired = std::atan2(de, dn);
    const double err = wrap_pi(desired - state.heading_rad);
    const double max_turn = model.turn_rate_max_rps * dt;
    next.heading_rad =
        wrap_two_pi(state.heading_rad + std::clamp(err, -max_turn, max_turn));
    // Slow down through sharp turns so the turning circle stays tight.
    const double turn_factor = std::clamp(std::cos(err), 0.25, 1.0);
    commanded = std::min(model.cruise_speed_mps, model.max_speed_mps) *
                turn_factor;
  }
  const double alpha = 1.0 - std::exp(-dt / model.speed_time_constant_s);
  next.speed_mps = state.speed_mps + (commanded - state.speed_mps) * alpha;
  next.speed_mps = std::clamp(next.speed_mps, 0.0, model.max_speed_mps);

  next.position.east += next.speed_mps * dt * std::sin(next.heading_rad);
  next.position.north += next.speed_mps * dt * std::cos(next.heading_rad);
  return next;
}

double SeabedModel::depth_at(double east, double north) const {
  double d = base_depth_m + slope.x() * east + slope.y() * north;
  for (const auto& rock : rocks) {
    const double r = std::hypot(east - rock.east, north - rock.north);
    if (r < rock.radius_m) {
      const double s = std::cos(0.5 * geo::kPi * r / rock.radius_m);
      d -= rock.height_m * s * s;  // smooth mound, zero at the rim
    }
  }
  if (rift_amplitude_m > 0.0) {
    const double b = geo::deg2rad(rift_bearing_deg);
    const double u = east * std::sin(b) + north * std::cos(b);
    d += rift_amplitude_m * std::sin(2.0 * geo::kPi * u / rift_wavelength_m);
  }
  return d;
}

SeabedModel SeabedModel::plane(double depth_m) {
  SeabedModel m;
  m.kind = Kind::PLANE;
  m.base_depth_m = depth_m;
  return m;
}

SeabedModel SeabedModel::sloped(double base_depth_m, double d_east,
                                double d_north) {
  SeabedModel m;
  m.kind = Kind::SLOPE;
  m.base_depth_m = base_depth_m;
  m.slope = {d_east, d_north};
  return m;
}

SeabedModel SeabedModel::rock_field(double base_depth_m,
                                    std::vector<Rock> rocks) {
  SeabedModel m;
  m.kind = Kind::ROCKS;
  m.base_depth_m = base_depth_m;
  m.rocks = std::move(rocks);
  return m;
}

SeabedModel SeabedModel::sand_rift(double base_depth_m, double amplitude_m,
                                   double wavelength_m, double bearing_deg) {
  SeabedModel m;
  m.kind = Kind::SAND_RIFT;
  m.base_depth_m = base_depth_m;
  m.rift_amplitude_m = amplitude_m;
  m.rift_wavelength_m = wavelength_m;
  m.rift_bearing_deg = bearing_deg;
  return m;
}

SeabedModel SeabedModel::composite(double base_depth_m,
                                   const Eigen::Vector2d& slope,
                                   std::vector<Rock> rocks,
                                   double rift_amplitude_m,
                                   double rift_wavelength_m,
                                   double rift_bearing_deg) {
  SeabedModel m;
  m.kind = Kind::COMPOSITE;
  m.base_depth_m = base_depth_m;
  m.slope = slope;
  m.rocks = std::move(rocks);
  m.rift_amplitude_m = rift_amplitude_m;
  m.rift_wavelength_m = rift_wavelength_m;
  m.rift_bearing_deg = rift_bearing_deg;
  return m;
}

namespace {

const char* kind_name(SeabedModel::Kind k) {
  switch (k) {
    case SeabedModel::Kind::PLANE: return "plane";
    case SeabedModel::Kind::SLOPE: return "slope";
    case SeabedModel::Kind::ROCKS: return "rocks";
    case SeabedModel::Kind::SAND_RIFT: return "sand_rift";
    case SeabedModel::Kind::COMPOSITE: return "composite";
  }
  return "plane";
}

SeabedModel::Kind kind_from_name(const std::string& s) {
  if (s == "plane") return SeabedModel::Kind::PLANE;
  if (s == "slope") return SeabedModel::Kind::SLOPE;
  if (s == "rocks") return SeabedModel::Kind::ROCKS;
  if (s == "sand_rift") return SeabedModel::Kind::SAND_RIFT;
  if (s == "composite") return SeabedModel::Kind::COMPOSITE;
  throw std::invalid_argument("unknown seabed kind: " + s);
}

}  // namespace

std::string SeabedModel::to_json() const {
  ordered_json j = {{"kind", kind_name(kind)}, {"base_depth_m", base_depth_m}};
  if (slope != Eigen::Vector2d::Zero()) {
    j["slope"] = {slope.x(), slope.y()};
  }
  if (!rocks.empty()) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rocks) {
      arr.push_back({{"east", r.east},
                     {"north", r.north},
                     {"radius_m", r.radius_m},
                     {"height_m", r.height_m}});
    }
    j["rocks"] = arr;
  }
  if (rift_amplitude_m > 0.0) {
    j["rift"] = {{"amplitude_m", rift_amplitude_m},
                 {"wavelength_m", rift_wavelength_m},
                 {"bearing_deg", rift_bearing_deg}};
  }
  return j.dump(2) + "\n";
}

SeabedModel SeabedModel::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("seabed spec parse failure: ") +
                                e.what());
  }
  SeabedModel m;
  m.kind = kind_from_name(j.at("kind").get<std::string>());
  m.base_depth_m = j.at("base_depth_m").get<double>();
  if (j.contains("slope")) {
    m.slope = {j["slope"].at(0).get<double>(), j["slope"].at(1).get<double>()};
  }
  if (j.contains("rocks")) {
    for (const auto& r : j["rocks"]) {
      m.rocks.push_back({r.at("east").get<double>(),
                         r.at("north").get<double>(),
                         r.at("radius_m").get<double>(),
                         r.at("height_m").get<double>()});
    }
  }
  if (j.contains("rift")) {
    m.rift_amplitude_m = j["rift"].at("amplitude_m").get<double>();
    m.rift_wavelength_m = j["rift"].at("wavelength_m").get<double>();
    m.rift_bearing_deg = j["rift"].at("bearing_deg").get<double>();
  }
  return m;
}

SeabedModel SeabedModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open seabed spec: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

WaveModel WaveModel::calm() {
  WaveModel w;
  w.roll_amplitude_rad = 0.0;
  w.pitch_amplitude_rad = 0.0;
  w.gust_spike_probability = 0.0;
  return w;
}

double BatteryModel::voltage_at_soc(double soc) const {
  const double s = std::clamp(soc, 0.0, 1.0);
  return series_cells * (empty_cell_v + s * (full_cell_v - empty_cell_v));
}

double BatteryModel::endurance_hours(double draw_w) const {
  if (!(draw_w > 0.0)) {
    throw std::invalid_argument("battery draw must be positive");
  }
  return capacity_wh / draw_w;
}

SensorNoiseConfig SensorNoiseConfig::noiseless() {
  SensorNoiseConfig n;
  n.gps_horizontal_sigma_m = 0.0;
  n.gps_vertical_sigma_m = 0.0;
  n.depth_sigma_m = 0.0;
  n.depth_spike_probability = 0.0;
  n.cross_track_sigma_m = 0.0;
  return n;
}

std::map<std::string, geo::LeverArm> default_lever_arms() {
  std::map<std::string, geo::LeverArm> arms;
  arms["gps"].offset = Eigen::Vector3d(0.0, 0.0, -0.5);  // antenna mast
  arms["echosounder"].offset = Eigen::Vector3d(0.3, 0.0, 0.1);
  return arms;
}

namespace {

/// Cast the attitude-rotated beam from the sounder down to the seabed.
/// Returns the slant distance, or a negative value when there is no hit
/// within max_depth along the ray.
double raycast_seabed(const SeabedModel& seabed, const Eigen::Vector3d& origin,
                      const Eigen::Vector3d& ray, double max_depth) {
  if (ray.z() >= -0.05) return -1.0;  // beam not pointing meaningfully down
  auto g = [&](double s) {
    const Eigen::Vector3d q = origin + s * ray;
    return -q.z() - seabed.depth_at(q.x(), q.y());
  };
  // March to bracket the first crossing, then bisect.
  double lo = 0.0;
  double g_lo = g(lo);
  if (g_lo > 0.0) return -1.0;  // sounder already below the seabed
  double hi = -1.0;
  const double march = 0.5;
  const double s_max = max_depth / -ray.z() + 2.0;
  for (double s = march; s <= s_max; s += march) {
    if (g(s) >= 0.0) {
      hi = s;
      break;
    }
    lo = s;
  }
  if (hi < 0.0) return -1.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct WaveState {
  int gust_steps_left = 0;
  double gust_roll = 0.0;
};

geo::Attitude wave_attitude(const WaveModel& waves, WaveState& st, double t,
                            double heading, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  geo::Attitude att;
  const double w = 2.0 * geo::kPi / waves.period_s;
  att.roll = waves.roll_amplitude_rad * std::sin(w * t);
  att.pitch = waves.pitch_amplitude_rad * std::sin(0.85 * w * t + 1.0);
  if (waves.gust_spike_probability > 0.0) {
    const double draw = unit(rng);
    if (st.gust_steps_left == 0 && draw < waves.gust_spike_probability) {
      st.gust_steps_left = waves.gust_hold_steps;
      st.gust_roll = (unit(rng) < 0.5 ? -1.0 : 1.0) * waves.gust_magnitude_rad;
    }
  }
  if (st.gust_steps_left > 0) {
    att.roll += st.gust_roll;
    --st.gust_steps_left;
  }
  att.yaw = heading;
  return att;
}

}  // namespace

logfmt::SurveyLog run_survey(const mission::MissionPlan& plan,
                             const VehicleModel& vehicle,
                             const SeabedModel& seabed, const WaveModel& waves,
                             const BatteryModel& battery,
                             const std::map<std::string, geo::LeverArm>& arms,
                             const SensorNoiseConfig& noise, uint64_t seed,
                             const SurveyRunConfig& run) {
  if (plan.waypoints.size() < 2) {
    throw std::invalid_argument("run_survey: plan needs at least 2 waypoints");
  }
  if (!arms.contains("gps") || !arms.contains("echosounder")) {
    throw std::invalid_argument(
        "run_survey: lever arms must define 'gps' and 'echosounder'");
  }
  const geo::GeoPoint origin = plan.area.center;
  std::vector<geo::EnuPoint> wps;
  wps.reserve(plan.waypoints.size());
  for (const auto& wp : plan.waypoints) {
    wps.push_back(geo::geo_to_enu(wp, origin));
  }

  logfmt::SurveyLog log;
  log.header.survey_id = run.survey_id;
  log.header.origin = origin;
  log.header.lever_arms = arms;
  log.header.started_at_utc = run.epoch_utc;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double dt = 0.1;  // 10 Hz fixed-step integration
  const int steps_per_s = 10;
  const int gps_every =
      std::max(1, static_cast<int>(std::lround(steps_per_s / noise.gps_rate_hz)));
  const int dpth_every = std::max(
      1, static_cast<int>(std::lround(steps_per_s / plan.sample_rate_hz)));
  const int att_every =
      std::max(1, static_cast<int>(std::lround(steps_per_s / run.att_rate_hz)));
  const int bat_every =
      std::max(1, static_cast<int>(std::lround(steps_per_s / run.bat_rate_hz)));

  VehicleState state;
  state.position = wps[0];
  state.heading_rad = std::atan2(wps[1].east - wps[0].east,
                                 wps[1].north - wps[0].north);
  state.heading_rad = wrap_two_pi(state.heading_rad);
  state.speed_mps = vehicle.cruise_speed_mps;
  std::size_t wp_index = 1;

  WaveState wave_state;
  double lateral_ou = 0.0;
  const double ou_alpha = std::exp(-dt / 5.0);
  const double ou_sigma =
      noise.cross_track_sigma_m * std::sqrt(1.0 - ou_alpha * ou_alpha);

  double consumed_wh = 0.0;
  const double max_sim_s =
      3.0 * mission::estimate_duration_s(plan, 15.0) + 600.0;

  const geo::LeverArm gps_arm = arms.at("gps");
  const geo::LeverArm sounder_arm = arms.at("echosounder");

  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) / steps_per_s;
    if (t > max_sim_s) {
      log.records.push_back(logfmt::OpaqueRecord{
          t, "WARN",
          ordered_json{{"type", "WARN"},
                       {"t", t},
                       {"message", "simulation time cap reached"}}
              .dump()});
      break;
    }

    // Environment for this step.
    const geo::Attitude att =
        wave_attitude(waves, wave_state, t, state.heading_rad, rng);
    const double prev_ou = lateral_ou;
    if (noise.cross_track_sigma_m > 0.0) {
      lateral_ou = lateral_ou * ou_alpha + unit_normal(rng) * ou_sigma;
    }
    const geo::Pose pose{t, state.position, att};

    if (k % att_every == 0) {
      log.records.push_back(
          logfmt::AttRecord{t, att.roll, att.pitch, wrap_two_pi(att.yaw)});
    }
    if (k % gps_every == 0) {
      geo::EnuPoint antenna = geo::apply_lever_arm(pose, gps_arm);
      if (noise.gps_horizontal_sigma_m > 0.0) {
        antenna.east += unit_normal(rng) * noise.gps_horizontal_sigma_m;
        antenna.north += unit_normal(rng) * noise.gps_horizontal_sigma_m;
      }
      if (noise.gps_vertical_sigma_m > 0.0) {
        antenna.up += unit_normal(rng) * noise.gps_vertical_sigma_m;
      }
      log.records.push_back(logfmt::GpsRecord{
          t, geo::enu_to_geo(antenna, origin), logfmt::GpsFixType::RTK_FIXED,
          0.6});
    }
    if (k % dpth_every == 0) {
      const geo::EnuPoint sounder = geo::apply_lever_arm(pose, sounder_arm);
      const Eigen::Vector3d ray =
          geo::rotate_body_to_enu(Eigen::Vector3d(0, 0, 1), att);
      const double slant =
          raycast_seabed(seabed, sounder.vec(), ray, run.max_depth_m);
      double raw = slant;
      if (raw > 0.0 && noise.depth_sigma_m > 0.0) {
        raw += unit_normal(rng) * noise.depth_sigma_m;
      }
      if (raw > 0.0 && noise.depth_spike_probability > 0.0 &&
          unit(rng) < noise.depth_spike_probability) {
        raw += unit_normal(rng) * noise.depth_spike_sigma_m;
      }
      if (slant <= 0.0 || raw > run.max_depth_m) {
        log.records.push_back(logfmt::OpaqueRecord{
            t, "DPTH_NODATA",
            ordered_json{{"type", "DPTH_NODATA"}, {"t", t}}.dump()});
      } else {
        log.records.push_back(logfmt::DepthRecord{t, std::max(raw, 0.05)});
      }
    }
    if (k % bat_every == 0) {
      const double soc = 1.0 - consumed_wh / battery.capacity_wh;
      const double voltage = battery.voltage_at_soc(soc);
      log.records.push_back(logfmt::BatteryRecord{
          t, voltage, battery.avg_power_draw_w / voltage});
    }

    // Termination checks before integrating the next step.
    if (wp_index >= wps.size()) break;

    consumed_wh += battery.avg_power_draw_w * dt / 3600.0;
    if (consumed_wh >= battery.capacity_wh) {
      log.records.push_back(logfmt::OpaqueRecord{
          t, "WARN",
          ordered_json{{"type", "WARN"},
                       {"t", t},
                       {"message", "battery exhausted; survey truncated"}}
              .dump()});
      break;
    }

    VehicleState next = step_vehicle(state, wps[wp_index], vehicle, dt);
    // Cross-track disturbance and constant drift act on the hull directly.
    const double d_lat = lateral_ou - prev_ou;
    next.position.east += d_lat * std::cos(next.heading_rad) +
                          noise.current_drift_mps.x() * dt;
    next.position.north -= d_lat * std::sin(next.heading_rad);
    next.position.north += noise.current_drift_mps.y() * dt;
    if (next.reached) {
      ++wp_index;
    }
    state = next;
  }
  return log;
}

BeaconProfileKind beacon_profile_kind_from_string(std::string_view s) {
  if (s == "stationary") return BeaconProfileKind::STATIONARY;
  if (s == "random_walk") return BeaconProfileKind::RANDOM_WALK;
  if (s == "dive_cycle") return BeaconProfileKind::DIVE_CYCLE;
  throw std::invalid_argument("unknown beacon profile: " + std::string(s));
}

std::vector<TimedEnu> beacon_profile(BeaconProfileKind kind,
                                     const BeaconProfileParams& params,
                                     uint64_t seed) {
  if (!(params.mean_speed_mps >= 0.0 && params.mean_speed_mps <= 2.0)) {
    throw std::invalid_argument("beacon speed must be in [0, 2] m/s");
  }
  if (!(params.dt_s > 0.0 && params.duration_s > 0.0)) {
    throw std::invalid_argument("beacon profile needs positive dt/duration");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 2.0 * geo::kPi);

  const int n = static_cast<int>(std::floor(params.duration_s / params.dt_s));
  std::vector<TimedEnu> track;
  track.reserve(n + 1);

  double heading = unit(rng);
  const double heading_sigma = std::sqrt(params.dt_s / params.heading_tau_s);

  double east = params.start.east;
  double north = params.start.north;

  const double descent_s =
      (params.dive_depth_m - params.surface_offset_m) / params.vertical_speed_mps;
  const double cycle_s = params.surface_interval_s + params.dive_duration_s;

  for (int i = 0; i <= n; ++i) {
    const double t = i * params.dt_s;
    double depth = -params.start.up;
    if (kind != BeaconProfileKind::STATIONARY && i > 0) {
      heading += unit_normal(rng) * heading_sigma;
      east += params.mean_speed_mps * params.dt_s * std::sin(heading);
      north += params.mean_speed_mps * params.dt_s * std::cos(heading);
    }
    if (kind == BeaconProfileKind::DIVE_CYCLE) {
      const double phase = std::fmod(t, cycle_s);
      if (phase < params.surface_interval_s) {
        depth = params.surface_offset_m;
      } else {
        const double tau = phase - params.surface_interval_s;
        const double before_ascent = params.dive_duration_s - descent_s;
        if (tau < descent_s) {
          depth = params.surface_offset_m + params.vertical_speed_mps * tau;
        } else if (tau < before_ascent) {
          depth = params.dive_depth_m;
        } else {
          depth = params.dive_depth_m -
                  params.vertical_speed_mps * (tau - before_ascent);
        }
        depth = std::clamp(depth, params.surface_offset_m, params.dive_depth_m);
      }
    }
    track.push_back({t, geo::EnuPoint{east, north, -depth}});
  }
  return track;
}

}  // namespace asv::sim

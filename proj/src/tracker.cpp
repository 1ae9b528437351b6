#include "asvkit/tracker.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace asv::tracker {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::HOLD: return "HOLD";
    case Mode::FOLLOW: return "FOLLOW";
    case Mode::LOST: return "LOST";
  }
  return "HOLD";
}

std::pair<TrackerState, Command> step(const TrackerState& state,
                                      const geo::Pose& vehicle,
                                      const std::optional<sbl::SblFix>& fix,
                                      const TrackerConfig& cfg) {
  TrackerState next = state;
  Command cmd;

  if (!fix.has_value() || !fix->valid) {
    next.last_fix_age_s += cfg.loop_period_s;
    if (next.last_fix_age_s > cfg.lost_timeout_s) {
      next.mode = Mode::LOST;
      next.current_waypoint.reset();
      cmd.type = Command::Type::HOLD_POSITION;
    } else if (next.mode == Mode::FOLLOW && next.current_waypoint) {
      cmd.type = Command::Type::GOTO_WAYPOINT;
      cmd.waypoint = *next.current_waypoint;
    } else {
      cmd.type = Command::Type::HOLD_POSITION;
    }
    return {next, cmd};
  }

  next.last_fix_age_s = 0.0;
  const Eigen::Vector3d beacon =
      vehicle.position.vec() +
      vehicle.attitude.body_to_enu() * fix->rel_position;
  const double d = std::hypot(beacon.x() - vehicle.position.east,
                              beacon.y() - vehicle.position.north);

  if (d <= cfg.follow_threshold_m) {
    next.mode = Mode::HOLD;
    next.current_waypoint.reset();
    cmd.type = Command::Type::HOLD_POSITION;
  } else {
    next.mode = Mode::FOLLOW;
    next.current_waypoint = geo::EnuPoint{beacon.x(), beacon.y(), 0.0};
    cmd.type = Command::Type::GOTO_WAYPOINT;
    cmd.waypoint = *next.current_waypoint;
  }
  return {next, cmd};
}

namespace {

geo::EnuPoint interpolate_track(const std::vector<sim::TimedEnu>& track,
                                double t) {
  if (track.empty()) {
    throw std::invalid_argument("beacon track is empty");
  }
  if (t <= track.front().t) return track.front().position;
  if (t >= track.back().t) return track.back().position;
  auto it = std::lower_bound(
      track.begin(), track.end(), t,
      [](const sim::TimedEnu& a, double v) { return a.t < v; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double alpha = (t - a.t) / (b.t - a.t);
  const Eigen::Vector3d p =
      a.position.vec() + alpha * (b.position.vec() - a.position.vec());
  return geo::EnuPoint(p);
}

}  // namespace

TrackSessionResult track_session(const std::vector<sim::TimedEnu>& beacon,
                                 const TrackSessionConfig& cfg,
                                 uint64_t seed) {
  if (beacon.size() < 2) {
    throw std::invalid_argument("track_session: beacon track too short");
  }
  if (!(cfg.tracker.follow_threshold_m > 0.0 &&
        cfg.tracker.follow_threshold_m < cfg.tracker.max_range_abort_m)) {
    throw std::invalid_argument(
        "track_session: need 0 < follow_threshold < max_range_abort");
  }
  TrackSessionResult result;
  TrackStats& stats = result.stats;

  // Beacon speed sanity: warn above the platform's 1.2 m/s envelope.
  double max_speed = 0.0;
  for (std::size_t i = 1; i < beacon.size(); ++i) {
    const double dt = beacon[i].t - beacon[i - 1].t;
    if (dt <= 0.0) {
      throw std::invalid_argument("beacon track timestamps must increase");
    }
    max_speed = std::max(
        max_speed,
        beacon[i].position.horizontal_distance_to(beacon[i - 1].position) /
            dt);
  }
  if (max_speed > 1.2) {
    stats.warnings.push_back(
        "beacon horizontal speed " + std::to_string(max_speed) +
        " m/s exceeds the 1.2 m/s platform envelope");
  }

  logfmt::SurveyLog& log = result.log;
  log.header.survey_id = cfg.survey_id;
  log.header.origin = cfg.origin;
  log.header.started_at_utc = cfg.epoch_utc;
  log.header.lever_arms["gps"].offset = Eigen::Vector3d(0.0, 0.0, -0.5);

  std::mt19937_64 rng(seed);

  const double dt = 0.1;
  const int steps_per_loop =
      std::max(1, static_cast<int>(std::lround(cfg.tracker.loop_period_s / dt)));
  const double t_end = beacon.back().t;

  sim::VehicleState vstate;
  vstate.position = cfg.vehicle_start;
  vstate.heading_rad = 0.0;
  TrackerState tstate;
  geo::EnuPoint target = cfg.vehicle_start;
  bool holding = true;
  std::optional<Eigen::Vector3d> prior;
  Mode last_logged_mode = tstate.mode;
  bool converged = false;
  int near_steps = 0;
  int post_convergence_steps = 0;
  int in_range_steps = 0;
  double consumed_wh = 0.0;

  auto log_mode = [&](double t, Mode m, double dist) {
    log.records.push_back(logfmt::OpaqueRecord{
        t, "TRK",
        ordered_json{{"type", "TRK"},
                     {"t", t},
                     {"mode", std::string(to_string(m))},
                     {"distance_m", dist}}
            .dump()});
  };

  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) / 10.0;
    if (t > t_end) break;

    if (k % steps_per_loop == 0) {
      const geo::Pose pose{t, vstate.position,
                           geo::Attitude{0.0, 0.0, vstate.heading_rad}};
      const geo::EnuPoint truth = interpolate_track(beacon, t);

      // Raw ping + solve, exactly what the deployed loop does.
      std::optional<sbl::SblFix> fix;
      const auto toa =
          sbl::simulate_toa(truth, pose, cfg.array, cfg.noise, cfg.sbl, rng);
      if (toa) {
        log.records.push_back(
            logfmt::ToaRecord{t, toa->arrival_s, toa->sound_speed});
        fix = sbl::solve_fix(*toa, pose, cfg.array, prior, cfg.sbl,
                             cfg.origin);
        log.records.push_back(logfmt::SblRecord{
            t, fix->rel_position.x(), fix->rel_position.y(),
            fix->rel_position.z(), fix->std_m});
        if (fix->valid) prior = fix->rel_position;
      }

      auto [next_state, cmd] = step(tstate, pose, fix, cfg.tracker);
      tstate = next_state;
      if (cmd.type == Command::Type::GOTO_WAYPOINT) {
        target = cmd.waypoint;
        holding = false;
      } else if (!holding) {
        target = vstate.position;
        holding = true;
      }

      // Vehicle pose + battery once per control loop.
      log.records.push_back(logfmt::GpsRecord{
          t,
          geo::enu_to_geo(geo::apply_lever_arm(
                              pose, log.header.lever_arms.at("gps")),
                          cfg.origin),
          logfmt::GpsFixType::RTK_FIXED, 0.6});
      log.records.push_back(logfmt::AttRecord{
          t, 0.0, 0.0, pose.attitude.yaw});
      const double soc = 1.0 - consumed_wh / cfg.battery.capacity_wh;
      const double voltage = cfg.battery.voltage_at_soc(soc);
      log.records.push_back(logfmt::BatteryRecord{
          t, voltage, cfg.battery.avg_power_draw_w / voltage});

      const double range_3d = truth.distance_to(vstate.position);
      const double range_h =
          truth.horizontal_distance_to(vstate.position);
      ++stats.control_steps;
      stats.max_range_m = std::max(stats.max_range_m, range_3d);
      if (range_3d < cfg.tracker.max_range_abort_m) ++in_range_steps;
      if (!converged && range_h <= cfg.tracker.follow_threshold_m) {
        converged = true;
        stats.convergence_time_s = t;
      }
      if (converged) {
        ++post_convergence_steps;
        if (range_h <= cfg.tracker.follow_threshold_m + 2.0) ++near_steps;
        stats.max_horizontal_after_convergence_m =
            std::max(stats.max_horizontal_after_convergence_m, range_h);
      }
      ++stats.mode_counts[std::string(to_string(tstate.mode))];
      if (tstate.mode != last_logged_mode) {
        log_mode(t, tstate.mode, range_h);
        last_logged_mode = tstate.mode;
      }
    }

    vstate = sim::step_vehicle(vstate, target, cfg.vehicle, dt);
    consumed_wh += cfg.battery.avg_power_draw_w * dt / 3600.0;
  }

  stats.fraction_within_range =
      stats.control_steps > 0
          ? static_cast<double>(in_range_steps) / stats.control_steps
          : 0.0;
  stats.fraction_near_after_convergence =
      post_convergence_steps > 0
          ? static_cast<double>(near_steps) / post_convergence_steps
          : 0.0;
  stats.range_exceeded = stats.max_range_m >= cfg.tracker.max_range_abort_m;
  if (stats.range_exceeded) {
    stats.warnings.push_back("beacon range exceeded " +
                             std::to_string(cfg.tracker.max_range_abort_m) +
                             " m during the session");
  }
  return result;
}

}  // namespace asv::tracker

#include <doctest.h>

#include "asvkit/tracker.hpp"

using namespace asv;
using namespace asv::tracker;

namespace {

/// Fix describing a valid beacon at the given horizontal offset (north).
sbl::SblFix fix_at(double north_m, double depth_m = 3.0) {
  sbl::SblFix f;
  f.rel_position = Eigen::Vector3d(north_m, 0.0, depth_m);  // yaw 0: fwd=N
  f.std_m = 0.4;
  f.valid = true;
  return f;
}

geo::Pose origin_pose() {
  geo::Pose p;
  p.position = {0.0, 0.0, 0.0};
  return p;
}

}  // namespace

TEST_CASE("inside the threshold the tracker holds") {
  TrackerConfig cfg;
  const auto [state, cmd] =
      step(TrackerState{}, origin_pose(), fix_at(4.0), cfg);
  CHECK(state.mode == Mode::HOLD);
  CHECK(cmd.type == Command::Type::HOLD_POSITION);
  CHECK_FALSE(state.current_waypoint.has_value());

  const auto [state0, cmd0] =
      step(TrackerState{}, origin_pose(), fix_at(0.0), cfg);
  CHECK(state0.mode == Mode::HOLD);
}

TEST_CASE("beyond the threshold the tracker follows the beacon") {
  TrackerConfig cfg;
  const auto [state, cmd] =
      step(TrackerState{}, origin_pose(), fix_at(12.0), cfg);
  CHECK(state.mode == Mode::FOLLOW);
  REQUIRE(state.current_waypoint.has_value());
  CHECK(cmd.type == Command::Type::GOTO_WAYPOINT);
  // Waypoint sits exactly at the beacon's horizontal position.
  CHECK(cmd.waypoint.east == doctest::Approx(0.0));
  CHECK(cmd.waypoint.north == doctest::Approx(12.0));
  CHECK(cmd.waypoint.up == 0.0);
}

TEST_CASE("waypoints track the fix through vehicle yaw") {
  TrackerConfig cfg;
  geo::Pose pose = origin_pose();
  pose.attitude.yaw = geo::kPi / 2.0;  // facing east: forward = east
  const auto [state, cmd] = step(TrackerState{}, pose, fix_at(12.0), cfg);
  REQUIRE(state.mode == Mode::FOLLOW);
  CHECK(cmd.waypoint.east == doctest::Approx(12.0).epsilon(1e-9));
  CHECK(std::abs(cmd.waypoint.north) < 1e-9);
}

TEST_CASE("missing fixes age the state into LOST") {
  TrackerConfig cfg;  // 10 s timeout, 1 s loop
  TrackerState state;
  state.mode = Mode::FOLLOW;
  state.current_waypoint = geo::EnuPoint{0.0, 12.0, 0.0};
  Command last_cmd;
  for (int i = 0; i < 10; ++i) {
    auto [next, cmd] = step(state, origin_pose(), std::nullopt, cfg);
    state = next;
    last_cmd = cmd;
    CHECK(state.last_fix_age_s == doctest::Approx(i + 1.0));
    if (i < 9) {
      CHECK(state.mode == Mode::FOLLOW);  // keeps heading for the waypoint
      CHECK(cmd.type == Command::Type::GOTO_WAYPOINT);
    }
  }
  auto [lost, cmd] = step(state, origin_pose(), std::nullopt, cfg);
  CHECK(lost.mode == Mode::LOST);
  CHECK(lost.last_fix_age_s > cfg.lost_timeout_s);
  CHECK(cmd.type == Command::Type::HOLD_POSITION);

  // A valid fix recovers the controller.
  auto [recovered, cmd2] = step(lost, origin_pose(), fix_at(20.0), cfg);
  CHECK(recovered.mode == Mode::FOLLOW);
  CHECK(recovered.last_fix_age_s == 0.0);
  CHECK(cmd2.type == Command::Type::GOTO_WAYPOINT);
}

TEST_CASE("invalid fixes count as absent") {
  TrackerConfig cfg;
  sbl::SblFix bad = fix_at(30.0);
  bad.valid = false;
  const auto [state, cmd] = step(TrackerState{}, origin_pose(), bad, cfg);
  CHECK(state.last_fix_age_s == doctest::Approx(1.0));
  CHECK(cmd.type == Command::Type::HOLD_POSITION);
}

TEST_CASE("the controller is deterministic in its inputs") {
  TrackerConfig cfg;
  TrackerState state;
  state.mode = Mode::FOLLOW;
  state.current_waypoint = geo::EnuPoint{3.0, 4.0, 0.0};
  state.last_fix_age_s = 2.0;
  const auto a = step(state, origin_pose(), fix_at(7.0), cfg);
  const auto b = step(state, origin_pose(), fix_at(7.0), cfg);
  CHECK(a.first.mode == b.first.mode);
  CHECK(a.first.last_fix_age_s == b.first.last_fix_age_s);
  CHECK(a.second.type == b.second.type);
  CHECK(a.second.waypoint.vec() == b.second.waypoint.vec());
}

TEST_CASE("a stationary beacon is acquired and held") {
  sim::BeaconProfileParams params;
  params.duration_s = 300.0;
  params.start = {0.0, 0.0, -4.0};
  const auto beacon =
      sim::beacon_profile(sim::BeaconProfileKind::STATIONARY, params, 3);

  TrackSessionConfig cfg;
  cfg.vehicle_start = {50.0, 0.0, 0.0};
  cfg.noise.range_fraction_sigma = 0.0;
  cfg.noise.surface_spike_probability = 0.0;
  cfg.noise.dropout_probability = 0.0;
  const auto result = track_session(beacon, cfg, 11);

  CHECK(result.stats.convergence_time_s > 0.0);
  CHECK(result.stats.convergence_time_s < 120.0);
  CHECK(result.stats.fraction_near_after_convergence > 0.95);
  CHECK(result.stats.mode_counts.at("HOLD") > 100);
  logfmt::validate(result.log);
}

TEST_CASE("steady-state distance stays within threshold + lag + overshoot") {
  // Straight-line beacon at 0.5 m/s against a 1.0 m/s vehicle: after
  // convergence the distance bound is threshold + beacon speed x loop
  // period + a small navigation overshoot.
  std::vector<sim::TimedEnu> beacon;
  for (int t = 0; t <= 600; ++t) {
    beacon.push_back({static_cast<double>(t), {0.0, 10.0 + 0.5 * t, -3.0}});
  }
  TrackSessionConfig cfg;
  cfg.noise.range_fraction_sigma = 0.0;
  cfg.noise.surface_spike_probability = 0.0;
  cfg.noise.dropout_probability = 0.0;
  const auto result = track_session(beacon, cfg, 21);
  REQUIRE(result.stats.convergence_time_s >= 0.0);
  const double bound = cfg.tracker.follow_threshold_m +
                       0.5 * cfg.tracker.loop_period_s + 2.5;
  CHECK(result.stats.max_horizontal_after_convergence_m <= bound);
}

TEST_CASE("a 3 m/s sprint outruns the vehicle with a range warning") {
  std::vector<sim::TimedEnu> beacon;
  for (int t = 0; t <= 90; ++t) {
    beacon.push_back({static_cast<double>(t),
                      {0.0, 20.0 + 3.0 * t, -2.0}});  // due north at 3 m/s
  }
  TrackSessionConfig cfg;
  cfg.vehicle_start = {0.0, 0.0, 0.0};
  cfg.noise.range_fraction_sigma = 0.0;
  cfg.noise.surface_spike_probability = 0.0;
  cfg.noise.dropout_probability = 0.0;
  const auto result = track_session(beacon, cfg, 13);

  CHECK_FALSE(result.stats.warnings.empty());  // over-speed warned up front
  CHECK(result.stats.range_exceeded);
  CHECK(result.stats.max_range_m > 100.0);
  CHECK(result.stats.mode_counts.at("FOLLOW") > 0);
}

TEST_CASE("threshold must sit inside the abort range") {
  std::vector<sim::TimedEnu> beacon = {{0.0, {0.0, 10.0, -2.0}},
                                       {10.0, {0.0, 12.0, -2.0}}};
  TrackSessionConfig cfg;
  cfg.tracker.follow_threshold_m = 150.0;  // beyond max_range_abort
  CHECK_THROWS_AS(static_cast<void>(track_session(beacon, cfg, 1)),
                  std::invalid_argument);
}

TEST_CASE("session logs are deterministic per seed") {
  sim::BeaconProfileParams params;
  params.duration_s = 120.0;
  const auto beacon =
      sim::beacon_profile(sim::BeaconProfileKind::DIVE_CYCLE, params, 5);
  TrackSessionConfig cfg;
  const auto a = track_session(beacon, cfg, 77);
  const auto b = track_session(beacon, cfg, 77);
  CHECK(logfmt::write_log_string(a.log) == logfmt::write_log_string(b.log));
}

// Follow/hold controller that keeps the vehicle within acoustic range of a
// beacon: reads the latest fix once per loop period, compares horizontal
// positions, and either holds station or emits a waypoint at the beacon.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "asvkit/geo.hpp"
#include "asvkit/logfmt.hpp"
#include "asvkit/sbl.hpp"
#include "asvkit/sim.hpp"

namespace asv::tracker {

enum class Mode { HOLD, FOLLOW, LOST };

std::string_view to_string(Mode m);

struct TrackerConfig {
  double follow_threshold_m = 5.0;
  double loop_period_s = 1.0;
  double max_range_abort_m = 100.0;
  double lost_timeout_s = 10.0;  // consecutive invalid fixes before LOST
};

struct TrackerState {
  Mode mode = Mode::HOLD;
  std::optional<geo::EnuPoint> current_waypoint;  // horizontal target
  double last_fix_age_s = 0.0;
};

struct Command {
  enum class Type { HOLD_POSITION, GOTO_WAYPOINT };
  Type type = Type::HOLD_POSITION;
  geo::EnuPoint waypoint;
};

/// One controller step. Total: never throws on any input combination.
/// The beacon position is recovered from the fix's vehicle-frame offset,
/// so tracking is self-contained in the local frame. Waypoint altitude is
/// ignored; a surface craft tracks the horizontal projection.
std::pair<TrackerState, Command> step(const TrackerState& state,
                                      const geo::Pose& vehicle,
                                      const std::optional<sbl::SblFix>& fix,
                                      const TrackerConfig& cfg);

struct TrackStats {
  int control_steps = 0;
  double fraction_within_range = 0.0;      // 3D range < max_range_abort
  double fraction_near_after_convergence = 0.0;  // horizontal <= threshold+2
  double convergence_time_s = -1.0;  // first time within follow threshold
  double max_range_m = 0.0;
  double max_horizontal_after_convergence_m = 0.0;
  bool range_exceeded = false;
  std::map<std::string, int> mode_counts;
  std::vector<std::string> warnings;
};

struct TrackSessionConfig {
  TrackerConfig tracker;
  sim::VehicleModel vehicle;
  sbl::ReceiverArray array = sbl::ReceiverArray::square();
  sbl::AcousticNoiseModel noise;
  sbl::SblConfig sbl;
  sim::BatteryModel battery{.capacity_wh = 592.0, .avg_power_draw_w = 110.0};
  geo::GeoPoint origin{0.0, 0.0, 0.0};
  geo::EnuPoint vehicle_start{30.0, 0.0, 0.0};
  std::string survey_id = "tracking";
  std::string epoch_utc = "2021-10-26T09:00:00Z";
};

struct TrackSessionResult {
  logfmt::SurveyLog log;
  TrackStats stats;
};

/// Closed-loop tracking simulation over a beacon track. Deterministic per
/// seed. Logs vehicle poses, raw TOA pings, solved SBL fixes, battery
/// state, and TRK mode-transition records.
TrackSessionResult track_session(const std::vector<sim::TimedEnu>& beacon,
                                 const TrackSessionConfig& cfg, uint64_t seed);

}  // namespace asv::tracker

// Short-baseline acoustic positioning: forward time-of-arrival simulation
// for a 4-receiver array and the damped Gauss-Newton inverse that recovers
// the beacon position, plus post-hoc track filtering.
//
// Ranging assumes a synchronized ping epoch, so each receiver yields an
// absolute range. The dominant ranging error is modeled as a common
// per-ping perturbation (epoch/sound-speed error scaling with range);
// surface multipath spikes perturb receivers independently, which is what
// makes them visible in the post-fit residual.
#pragma once

#include <array>
#include <optional>
#include <random>
#include <vector>

#include "asvkit/geo.hpp"

namespace asv::sbl {

/// Body-frame receiver offsets (forward, starboard, down), meters.
struct ReceiverArray {
  std::array<Eigen::Vector3d, 4> offsets;

  /// Square array of the given side length with hydrophones immersed
  /// `depth` below the body reference, matching the two-arm mount.
  static ReceiverArray square(double side_m = 2.0, double depth_m = 0.3);

  /// Throws std::invalid_argument on degenerate geometry; returns
  /// human-readable warnings (e.g. spacing outside the recommended
  /// 1.5..2.5 m envelope).
  std::vector<std::string> validate() const;
};

struct ToaSet {
  double t = 0.0;
  std::array<double, 4> arrival_s{};
  double sound_speed = 1530.0;
};

struct AcousticNoiseModel {
  double range_fraction_sigma = 0.01;  // common per-ping, fraction of range
  double receiver_jitter_sigma_m = 0.0;  // independent per receiver
  double surface_spike_probability = 0.10;  // per fix, beacon near surface
  double surface_depth_threshold_m = 1.0;
  double spike_magnitude_sigma_m = 5.0;  // per receiver while spiking
  double dropout_probability = 0.02;
};

struct SblConfig {
  double sound_speed = 1530.0;  // m/s, tropical surface seawater
  double max_range_m = 100.0;
  double fix_std_threshold_m = 3.0;  // above -> fix marked invalid
  int max_iterations = 60;
  double step_tolerance = 1e-12;
  double initial_depth_m = 10.0;  // first guess below the array centroid
};

struct SblFix {
  double t = 0.0;
  Eigen::Vector3d rel_position = Eigen::Vector3d::Zero();  // body frame
  geo::GeoPoint geo_position;
  double std_m = 0.0;
  bool valid = false;
  bool interpolated = false;
};

class FilterError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Forward model: arrival_i = |beacon - receiver_i| / c + noise.
/// Returns nullopt on dropout (always beyond 2x max range). Throws
/// std::domain_error if the beacon is at or above the surface.
std::optional<ToaSet> simulate_toa(const geo::EnuPoint& beacon,
                                   const geo::Pose& vehicle,
                                   const ReceiverArray& array,
                                   const AcousticNoiseModel& noise,
                                   const SblConfig& cfg, std::mt19937_64& rng);

/// Solve the 4-range inverse problem in the body frame and geolocate via
/// the vehicle pose. Non-convergence yields valid=false, not an exception.
SblFix solve_fix(const ToaSet& toa, const geo::Pose& vehicle,
                 const ReceiverArray& array,
                 const std::optional<Eigen::Vector3d>& prior,
                 const SblConfig& cfg, const geo::GeoPoint& origin);

/// Remove fixes with std above the threshold (default: the 3 m rule) or
/// valid=false and fill the gaps by linear interpolation at the original
/// timestamps. Output has the same length; replaced fixes are flagged
/// interpolated. Throws FilterError with fewer than 2 keepable fixes.
std::vector<SblFix> filter_track(const std::vector<SblFix>& fixes,
                                 double std_threshold_m,
                                 const geo::GeoPoint& origin);

}  // namespace asv::sbl

// Bathymetric correction pipeline: attitude gating, sliding-median despiking,
// lever-arm / beam-ray georeferencing, gridding, and Delaunay TIN export.
// Rejected samples are flagged, never deleted, so every stage's decisions
// stay auditable.
#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

#include "asvkit/geo.hpp"
#include "asvkit/logfmt.hpp"

namespace asv::bathy {

enum QualityFlag : unsigned {
  kAttitudeReject = 1u << 0,
  kMedianReject = 1u << 1,
  kInterpolated = 1u << 2,
};

inline bool rejected(unsigned flags) {
  return (flags & (kAttitudeReject | kMedianReject)) != 0;
}

/// One echo-sounder ping joined with the antenna pose at ping time.
struct BathySample {
  geo::Pose pose;
  double raw_depth = 0.0;  // slant meters from the transducer
  unsigned flags = 0;
};

/// Georeferenced, corrected sounding on the seafloor.
struct DepthPoint {
  double t = 0.0;
  geo::EnuPoint ground;           // up = -corrected_depth
  double corrected_depth = 0.0;   // meters positive down
  unsigned flags = 0;
};

struct GridCell {
  double depth = 0.0;
  int count = 0;
  double sigma = 0.0;
};

struct DepthGrid {
  static constexpr double kNoData = -9999.0;

  geo::GeoPoint geo_origin;  // survey origin the ENU coordinates refer to
  double ll_east = 0.0;      // lower-left cell corner
  double ll_north = 0.0;
  double cell_size_m = 0.5;
  int rows = 0;
  int cols = 0;
  std::vector<GridCell> cells;  // row-major from the lower-left

  const GridCell& at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * cols + col];
  }
  bool populated(int row, int col) const { return at(row, col).count > 0; }
};

struct Tin {
  std::vector<DepthPoint> vertices;
  std::vector<std::array<int, 3>> triangles;
};

enum class GridMethod { MEAN, IDW };

class PipelineError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Join DPTH pings with GPS/ATT streams (linear interpolation, yaw via the
/// shortest arc). Pings outside the bracketing span are dropped.
std::vector<BathySample> samples_from_log(const logfmt::SurveyLog& log);

/// Flag samples whose |roll| or |pitch| strictly exceeds max_angle_deg.
std::vector<BathySample> attitude_filter(std::vector<BathySample> samples,
                                         double max_angle_deg = 10.0);

/// Sliding median over the not-yet-rejected subsequence; a sample is flagged
/// when |depth - median(window)| > band. With no explicit band the window's
/// MAD sets it: max(3 * 1.4826 * MAD, 0.25 m). Window shrinks at the edges.
std::vector<BathySample> median_filter(std::vector<BathySample> samples,
                                       int window = 9,
                                       std::optional<double> band_m = {});

struct GeoreferenceConfig {
  double immersion_depth_m = 0.1;   // transducer below the waterline
  double datum_offset_m = 0.0;
  double geoid_undulation_m = 0.0;
};

/// Project each ping along the attitude-rotated beam: ground position from
/// the horizontal ray components, corrected depth from the vertical one plus
/// immersion/datum/geoid. `sounder_arm` is the echo-sounder offset relative
/// to the GPS antenna, body frame. Flags are propagated untouched.
std::vector<DepthPoint> georeference(const std::vector<BathySample>& samples,
                                     const geo::LeverArm& sounder_arm,
                                     const GeoreferenceConfig& cfg = {});

/// Rasterize unrejected points. MEAN: per-cell average and sigma. IDW:
/// inverse-distance-squared within `idw_radius_m` (default 2 cells) of each
/// cell center. Throws PipelineError on empty input.
DepthGrid grid(const std::vector<DepthPoint>& points, double cell_size_m,
               GridMethod method, const geo::GeoPoint& geo_origin,
               double idw_radius_m = 0.0);

/// Incremental Bowyer-Watson Delaunay triangulation on the horizontal
/// projection of the unrejected points. Throws PipelineError with fewer
/// than 3 distinct non-collinear points.
Tin triangulate(const std::vector<DepthPoint>& points);

void write_esri_ascii(const DepthGrid& grid, std::ostream& out);
void write_xyz_csv(const std::vector<DepthPoint>& points, std::ostream& out,
                   bool include_rejected = false);
void write_tin_ply(const Tin& tin, std::ostream& out);
std::string rejected_geojson(const std::vector<DepthPoint>& points,
                             const geo::GeoPoint& origin);

}  // namespace asv::bathy

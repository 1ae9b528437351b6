#include "asvkit/photo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

namespace asv::photo {

double water_fov_from_air(double air_fov_deg) {
  if (!(air_fov_deg > 0.0 && air_fov_deg < 180.0)) {
    throw GeometryError("air FOV must be in (0, 180) degrees");
  }
  const double t = std::tan(geo::deg2rad(air_fov_deg / 2.0)) / 1.33;
  return 2.0 * geo::rad2deg(std::atan(t));
}

double Footprint::area() const {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto& a = corners[i];
    const auto& b = corners[(i + 1) % 4];
    s += a.east * b.north - b.east * a.north;
  }
  return std::abs(s) / 2.0;
}

Footprint footprint(const geo::Pose& pose, const CameraModel& camera,
                    double depth_m) {
  if (!(depth_m > 0.0)) {
    throw GeometryError("footprint: depth must be positive");
  }
  if (!(camera.hfov_water_deg > 0.0 && camera.hfov_water_deg < 180.0 &&
        camera.vfov_water_deg > 0.0 && camera.vfov_water_deg < 180.0)) {
    throw GeometryError("footprint: FOV out of range");
  }
  const double tau = geo::deg2rad(camera.tilt_from_vertical_deg);
  // Camera axes in the body frame (forward, starboard, down): boresight
  // tilts from body-down toward forward; x across-track, y along-track.
  const Eigen::Vector3d z_c(std::sin(tau), 0.0, std::cos(tau));
  const Eigen::Vector3d x_c(0.0, 1.0, 0.0);
  const Eigen::Vector3d y_c = z_c.cross(x_c);
  const double tx = std::tan(geo::deg2rad(camera.hfov_water_deg / 2.0));
  const double ty = std::tan(geo::deg2rad(camera.vfov_water_deg / 2.0));

  const std::array<std::pair<double, double>, 4> signs = {
      {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}};
  Footprint fp;
  const double plane_up = -depth_m;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d ray_body =
        x_c * (signs[i].first * tx) + y_c * (signs[i].second * ty) + z_c;
    const Eigen::Vector3d ray =
        geo::rotate_body_to_enu(ray_body, pose.attitude);
    if (ray.z() >= -1e-9) {
      throw GeometryError(
          "footprint: corner ray does not intersect the seabed plane");
    }
    const double s = (plane_up - pose.position.up) / ray.z();
    if (s <= 0.0) {
      throw GeometryError("footprint: camera below the seabed plane");
    }
    fp.corners[i] =
        geo::EnuPoint(pose.position.vec() + s * ray);
    fp.corners[i].up = plane_up;
  }
  return fp;
}

double swath_width(const CameraModel& camera, double depth_m) {
  return 2.0 * depth_m * std::tan(geo::deg2rad(camera.hfov_water_deg / 2.0));
}

double spacing_for_overlap(const CameraModel& camera, double depth_m,
                           double target_overlap) {
  if (!(target_overlap >= 0.0 && target_overlap < 1.0)) {
    throw GeometryError("overlap must be in [0, 1)");
  }
  if (!(depth_m > 0.0)) {
    throw GeometryError("depth must be positive");
  }
  return (1.0 - target_overlap) * swath_width(camera, depth_m);
}

double fov_for_spacing(double spacing_m, double depth_m,
                       double target_overlap) {
  if (!(spacing_m > 0.0 && depth_m > 0.0)) {
    throw GeometryError("spacing and depth must be positive");
  }
  if (!(target_overlap >= 0.0 && target_overlap < 1.0)) {
    throw GeometryError("overlap must be in [0, 1)");
  }
  const double swath = spacing_m / (1.0 - target_overlap);
  return 2.0 * geo::rad2deg(std::atan(swath / (2.0 * depth_m)));
}

namespace {

struct FramePose {
  double t;
  geo::Pose pose;
};

std::vector<FramePose> frame_poses(const logfmt::SurveyLog& log,
                                   double interval_s) {
  struct AttSample {
    double t, roll, pitch, yaw;
  };
  struct PosSample {
    double t;
    Eigen::Vector3d enu;
  };
  std::vector<AttSample> atts;
  std::vector<PosSample> positions;
  for (const auto& rec : log.records) {
    if (const auto* a = std::get_if<logfmt::AttRecord>(&rec)) {
      atts.push_back({a->t, a->roll, a->pitch, a->yaw});
    } else if (const auto* g = std::get_if<logfmt::GpsRecord>(&rec)) {
      positions.push_back(
          {g->t, geo::geo_to_enu(g->position, log.header.origin).vec()});
    }
  }
  if (atts.size() < 2 || positions.size() < 2) {
    throw GeometryError("coverage_report: log lacks GPS/ATT streams");
  }
  const double t0 = std::max(atts.front().t, positions.front().t);
  const double t1 = std::min(atts.back().t, positions.back().t);
  if (t1 <= t0) {
    throw GeometryError("coverage_report: GPS/ATT streams do not overlap");
  }

  std::vector<FramePose> frames;
  std::size_t ia = 0, ip = 0;
  for (double t = t0; t <= t1 + 1e-9; t += interval_s) {
    while (ia + 1 < atts.size() && atts[ia + 1].t <= t) ++ia;
    while (ip + 1 < positions.size() && positions[ip + 1].t <= t) ++ip;
    FramePose f;
    f.t = t;
    f.pose.t = t;
    {
      const auto& a = atts[ia];
      const auto& b = atts[std::min(ia + 1, atts.size() - 1)];
      const double alpha = b.t > a.t ? (t - a.t) / (b.t - a.t) : 0.0;
      f.pose.attitude.roll = a.roll + alpha * (b.roll - a.roll);
      f.pose.attitude.pitch = a.pitch + alpha * (b.pitch - a.pitch);
      double dy = b.yaw - a.yaw;
      while (dy > geo::kPi) dy -= 2.0 * geo::kPi;
      while (dy < -geo::kPi) dy += 2.0 * geo::kPi;
      double yaw = a.yaw + alpha * dy;
      while (yaw < 0.0) yaw += 2.0 * geo::kPi;
      while (yaw >= 2.0 * geo::kPi) yaw -= 2.0 * geo::kPi;
      f.pose.attitude.yaw = yaw;
    }
    {
      const auto& a = positions[ip];
      const auto& b = positions[std::min(ip + 1, positions.size() - 1)];
      const double alpha = b.t > a.t ? (t - a.t) / (b.t - a.t) : 0.0;
      f.pose.position = geo::EnuPoint(a.enu + alpha * (b.enu - a.enu));
    }
    frames.push_back(f);
  }
  return frames;
}

bool point_in_quad(const Footprint& fp, double e, double n) {
  double first = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto& a = fp.corners[i];
    const auto& b = fp.corners[(i + 1) % 4];
    const double cross =
        (b.east - a.east) * (n - a.north) - (b.north - a.north) * (e - a.east);
    if (i == 0) {
      first = cross;
    } else if (cross * first < 0.0) {
      return false;
    }
  }
  return true;
}

/// Andrew's monotone chain; returns the convex hull, counter-clockwise.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(),
            [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
              return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
            });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
                          return a == b;
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                  const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) -
           (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (int i = n - 2, lower = k + 1; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_hull(const std::vector<Eigen::Vector2d>& hull, double e,
                   double n) {
  const int m = static_cast<int>(hull.size());
  if (m < 3) return false;
  for (int i = 0; i < m; ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % m];
    const double cross =
        (b.x() - a.x()) * (n - a.y()) - (b.y() - a.y()) * (e - a.x());
    if (cross < 0.0) return false;
  }
  return true;
}

}  // namespace

CoverageReport coverage_report(
    const logfmt::SurveyLog& log, const CameraModel& camera,
    const std::function<double(double, double)>& depth_at, double cell_size_m,
    double target_overlap) {
  const auto frames = frame_poses(log, camera.frame_interval_s);
  if (frames.empty()) {
    throw GeometryError("coverage_report: no frames in the log window");
  }

  std::vector<Footprint> prints;
  prints.reserve(frames.size());
  for (const auto& f : frames) {
    const double depth =
        depth_at(f.pose.position.east, f.pose.position.north);
    prints.push_back(footprint(f.pose, camera, depth));
  }

  CoverageReport rep;
  rep.cell_size_m = cell_size_m;
  rep.frames = static_cast<int>(prints.size());

  double e_min = prints[0].corners[0].east, e_max = e_min;
  double n_min = prints[0].corners[0].north, n_max = n_min;
  std::vector<Eigen::Vector2d> all_corners;
  for (const auto& fp : prints) {
    for (const auto& c : fp.corners) {
      e_min = std::min(e_min, c.east);
      e_max = std::max(e_max, c.east);
      n_min = std::min(n_min, c.north);
      n_max = std::max(n_max, c.north);
      all_corners.emplace_back(c.east, c.north);
    }
  }
  rep.ll_east = e_min;
  rep.ll_north = n_min;
  rep.cols = static_cast<int>(std::ceil((e_max - e_min) / cell_size_m)) + 1;
  rep.rows = static_cast<int>(std::ceil((n_max - n_min) / cell_size_m)) + 1;
  rep.counts.assign(static_cast<std::size_t>(rep.rows) * rep.cols, 0);

  auto cell_center = [&](int row, int col) {
    return std::pair<double, double>(rep.ll_east + (col + 0.5) * cell_size_m,
                                     rep.ll_north + (row + 0.5) * cell_size_m);
  };

  // Rasterize each footprint; keep the cell lists for pair overlaps.
  std::vector<std::vector<int>> frame_cells(prints.size());
  for (std::size_t fi = 0; fi < prints.size(); ++fi) {
    const auto& fp = prints[fi];
    double fe_min = fp.corners[0].east, fe_max = fe_min;
    double fn_min = fp.corners[0].north, fn_max = fn_min;
    for (const auto& c : fp.corners) {
      fe_min = std::min(fe_min, c.east);
      fe_max = std::max(fe_max, c.east);
      fn_min = std::min(fn_min, c.north);
      fn_max = std::max(fn_max, c.north);
    }
    const int c0 = std::max(
        0, static_cast<int>(std::floor((fe_min - rep.ll_east) / cell_size_m)));
    const int c1 = std::min(
        rep.cols - 1,
        static_cast<int>(std::floor((fe_max - rep.ll_east) / cell_size_m)));
    const int r0 = std::max(
        0, static_cast<int>(std::floor((fn_min - rep.ll_north) / cell_size_m)));
    const int r1 = std::min(
        rep.rows - 1,
        static_cast<int>(std::floor((fn_max - rep.ll_north) / cell_size_m)));
    for (int row = r0; row <= r1; ++row) {
      for (int col = c0; col <= c1; ++col) {
        const auto [ce, cn] = cell_center(row, col);
        if (point_in_quad(fp, ce, cn)) {
          const int idx = row * rep.cols + col;
          ++rep.counts[idx];
          frame_cells[fi].push_back(idx);
        }
      }
    }
  }

  // Forward overlap between consecutive frames, by raster intersection.
  int pairs_ok = 0;
  int pairs = 0;
  for (std::size_t fi = 0; fi + 1 < prints.size(); ++fi) {
    auto& a = frame_cells[fi];
    auto& b = frame_cells[fi + 1];
    if (a.empty()) continue;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<int> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(inter));
    const double overlap =
        static_cast<double>(inter.size()) / static_cast<double>(a.size());
    rep.forward_overlap_mean += overlap;
    rep.forward_overlap_min = std::min(rep.forward_overlap_min, overlap);
    if (overlap >= target_overlap) ++pairs_ok;
    ++pairs;
  }
  if (pairs > 0) {
    rep.forward_overlap_mean /= pairs;
    rep.fraction_forward_pairs_ok = static_cast<double>(pairs_ok) / pairs;
  }

  // Coverage and gaps over the hull of all footprints.
  const auto hull = convex_hull(std::move(all_corners));
  long hull_cells = 0;
  long covered = 0;
  for (int row = 0; row < rep.rows; ++row) {
    int run_start = -1;
    for (int col = 0; col <= rep.cols; ++col) {
      bool gap = false;
      if (col < rep.cols) {
        const auto [ce, cn] = cell_center(row, col);
        if (point_in_hull(hull, ce, cn)) {
          ++hull_cells;
          if (rep.counts[row * rep.cols + col] > 0) {
            ++covered;
          } else {
            gap = true;
          }
        }
      }
      if (gap && run_start < 0) {
        run_start = col;
      } else if (!gap && run_start >= 0) {
        rep.gap_boxes.push_back(
            {rep.ll_east + run_start * cell_size_m,
             rep.ll_north + row * cell_size_m,
             rep.ll_east + col * cell_size_m,
             rep.ll_north + (row + 1) * cell_size_m});
        run_start = -1;
      }
    }
  }
  rep.covered_fraction =
      hull_cells > 0 ? static_cast<double>(covered) / hull_cells : 0.0;
  return rep;
}

CoverageReport coverage_report(const logfmt::SurveyLog& log,
                               const CameraModel& camera, double const_depth_m,
                               double cell_size_m, double target_overlap) {
  return coverage_report(
      log, camera, [const_depth_m](double, double) { return const_depth_m; },
      cell_size_m, target_overlap);
}

void CoverageReport::write_counts_ascii(std::ostream& out) const {
  out << "ncols " << cols << "\n";
  out << "nrows " << rows << "\n";
  out << "xllcorner " << std::setprecision(12) << ll_east << "\n";
  out << "yllcorner " << std::setprecision(12) << ll_north << "\n";
  out << "cellsize " << cell_size_m << "\n";
  out << "NODATA_value -9999\n";
  for (int row = rows - 1; row >= 0; --row) {
    for (int col = 0; col < cols; ++col) {
      if (col > 0) out << ' ';
      out << counts[static_cast<std::size_t>(row) * cols + col];
    }
    out << '\n';
  }
}

std::string CoverageReport::gaps_geojson(const geo::GeoPoint& origin) const {
  using ordered_json = nlohmann::ordered_json;
  ordered_json features = ordered_json::array();
  for (const auto& box : gap_boxes) {
    ordered_json ring = ordered_json::array();
    const std::array<std::pair<double, double>, 5> corners = {
        {{box[0], box[1]},
         {box[2], box[1]},
         {box[2], box[3]},
         {box[0], box[3]},
         {box[0], box[1]}}};
    for (const auto& [e, n] : corners) {
      const geo::GeoPoint g = geo::enu_to_geo({e, n, 0.0}, origin);
      ring.push_back({g.longitude_deg, g.latitude_deg});
    }
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "Polygon"}, {"coordinates", ordered_json::array({ring})}}},
         {"properties", {{"kind", "coverage_gap"}}}});
  }
  ordered_json root = {{"type", "FeatureCollection"}, {"features", features}};
  return root.dump(2) + "\n";
}

}  // namespace asv::photo

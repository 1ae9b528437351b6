#include "asvkit/bathy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include <nlohmann/json.hpp>

namespace asv::bathy {

namespace {

double lerp(double a, double b, double alpha) { return a + alpha * (b - a); }

double lerp_angle(double a, double b, double alpha) {
  double d = b - a;
  while (d > geo::kPi) d -= 2.0 * geo::kPi;
  while (d < -geo::kPi) d += 2.0 * geo::kPi;
  double r = a + alpha * d;
  while (r < 0.0) r += 2.0 * geo::kPi;
  while (r >= 2.0 * geo::kPi) r -= 2.0 * geo::kPi;
  return r;
}

}  // namespace

std::vector<BathySample> samples_from_log(const logfmt::SurveyLog& log) {
  struct AttSample {
    double t, roll, pitch, yaw;
  };
  struct PosSample {
    double t;
    Eigen::Vector3d enu;
  };
  std::vector<AttSample> atts;
  std::vector<PosSample> positions;
  std::vector<const logfmt::DepthRecord*> pings;
  for (const auto& rec : log.records) {
    if (const auto* a = std::get_if<logfmt::AttRecord>(&rec)) {
      atts.push_back({a->t, a->roll, a->pitch, a->yaw});
    } else if (const auto* g = std::get_if<logfmt::GpsRecord>(&rec)) {
      positions.push_back(
          {g->t, geo::geo_to_enu(g->position, log.header.origin).vec()});
    } else if (const auto* d = std::get_if<logfmt::DepthRecord>(&rec)) {
      pings.push_back(d);
    }
  }
  std::vector<BathySample> samples;
  samples.reserve(pings.size());
  std::size_t ia = 0, ip = 0;
  for (const auto* ping : pings) {
    const double t = ping->t;
    while (ia + 1 < atts.size() && atts[ia + 1].t <= t) ++ia;
    while (ip + 1 < positions.size() && positions[ip + 1].t <= t) ++ip;
    if (atts.empty() || positions.empty()) break;
    if (t < atts.front().t || t < positions.front().t) continue;
    if (ia + 1 >= atts.size() && atts[ia].t < t) break;
    if (ip + 1 >= positions.size() && positions[ip].t < t) break;

    BathySample s;
    s.raw_depth = ping->raw_depth;
    s.pose.t = t;
    {
      const auto& a = atts[ia];
      const auto& b = atts[std::min(ia + 1, atts.size() - 1)];
      const double alpha = b.t > a.t ? (t - a.t) / (b.t - a.t) : 0.0;
      s.pose.attitude.roll = lerp(a.roll, b.roll, alpha);
      s.pose.attitude.pitch = lerp(a.pitch, b.pitch, alpha);
      s.pose.attitude.yaw = lerp_angle(a.yaw, b.yaw, alpha);
    }
    {
      const auto& a = positions[ip];
      const auto& b = positions[std::min(ip + 1, positions.size() - 1)];
      const double alpha = b.t > a.t ? (t - a.t) / (b.t - a.t) : 0.0;
      s.pose.position = geo::EnuPoint(a.enu + alpha * (b.enu - a.enu));
    }
    samples.push_back(s);
  }
  return samples;
}

std::vector<BathySample> attitude_filter(std::vector<BathySample> samples,
                                         double max_angle_deg) {
  const double limit = geo::deg2rad(max_angle_deg);
  for (auto& s : samples) {
    if (std::abs(s.pose.attitude.roll) > limit ||
        std::abs(s.pose.attitude.pitch) > limit) {
      s.flags |= kAttitudeReject;
    }
  }
  return samples;
}

std::vector<BathySample> median_filter(std::vector<BathySample> samples,
                                       int window,
                                       std::optional<double> band_m) {
  if (window < 3 || window % 2 == 0) {
    throw std::invalid_argument("median_filter: window must be odd and >= 3");
  }
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!rejected(samples[i].flags)) active.push_back(i);
  }
  const int half = window / 2;
  auto median_of = [](std::vector<double>& v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  std::vector<unsigned> new_flags(samples.size(), 0);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::size_t lo = k >= static_cast<std::size_t>(half) ? k - half : 0;
    const std::size_t hi = std::min(k + half, active.size() - 1);
    std::vector<double> win;
    win.reserve(hi - lo + 1);
    for (std::size_t j = lo; j <= hi; ++j) {
      win.push_back(samples[active[j]].raw_depth);
    }
    std::vector<double> tmp = win;
    const double med = median_of(tmp);
    double band;
    if (band_m) {
      band = *band_m;
    } else {
      std::vector<double> dev;
      dev.reserve(win.size());
      for (double v : win) dev.push_back(std::abs(v - med));
      const double mad = median_of(dev);
      band = std::max(3.0 * 1.4826 * mad, 0.25);
    }
    if (std::abs(samples[active[k]].raw_depth - med) > band) {
      new_flags[active[k]] |= kMedianReject;
    }
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].flags |= new_flags[i];
  }
  return samples;
}

std::vector<DepthPoint> georeference(const std::vector<BathySample>& samples,
                                     const geo::LeverArm& sounder_arm,
                                     const GeoreferenceConfig& cfg) {
  std::vector<DepthPoint> points;
  points.reserve(samples.size());
  for (const auto& s : samples) {
    DepthPoint p;
    p.t = s.pose.t;
    p.flags = s.flags;
    const geo::EnuPoint sounder = geo::apply_lever_arm(s.pose, sounder_arm);
    const Eigen::Vector3d ray =
        geo::rotate_body_to_enu(Eigen::Vector3d(0, 0, 1), s.pose.attitude);
    if (ray.z() >= -0.05) {
      // Beam nearly horizontal; attitude gating should have caught this.
      p.flags |= kAttitudeReject;
      p.ground = sounder;
      p.corrected_depth = s.raw_depth;
      points.push_back(p);
      continue;
    }
    p.corrected_depth = s.raw_depth * (-ray.z()) + cfg.immersion_depth_m +
                        cfg.datum_offset_m + cfg.geoid_undulation_m;
    p.ground.east = sounder.east + s.raw_depth * ray.x();
    p.ground.north = sounder.north + s.raw_depth * ray.y();
    p.ground.up = -p.corrected_depth;
    points.push_back(p);
  }
  return points;
}

DepthGrid grid(const std::vector<DepthPoint>& points, double cell_size_m,
               GridMethod method, const geo::GeoPoint& geo_origin,
               double idw_radius_m) {
  if (!(cell_size_m > 0.0)) {
    throw std::invalid_argument("grid: cell size must be positive");
  }
  std::vector<const DepthPoint*> used;
  for (const auto& p : points) {
    if (!rejected(p.flags)) used.push_back(&p);
  }
  if (used.empty()) {
    throw PipelineError("grid: no unrejected points to rasterize");
  }

  double e_min = used[0]->ground.east, e_max = e_min;
  double n_min = used[0]->ground.north, n_max = n_min;
  for (const auto* p : used) {
    e_min = std::min(e_min, p->ground.east);
    e_max = std::max(e_max, p->ground.east);
    n_min = std::min(n_min, p->ground.north);
    n_max = std::max(n_max, p->ground.north);
  }

  DepthGrid g;
  g.geo_origin = geo_origin;
  g.cell_size_m = cell_size_m;
  g.ll_east = e_min - cell_size_m / 2.0;
  g.ll_north = n_min - cell_size_m / 2.0;
  g.cols = static_cast<int>(std::floor((e_max - g.ll_east) / cell_size_m)) + 1;
  g.rows = static_cast<int>(std::floor((n_max - g.ll_north) / cell_size_m)) + 1;
  g.cells.assign(static_cast<std::size_t>(g.rows) * g.cols, GridCell{});

  auto cell_index = [&](double e, double n) {
    const int col = static_cast<int>(std::floor((e - g.ll_east) / cell_size_m));
    const int row =
        static_cast<int>(std::floor((n - g.ll_north) / cell_size_m));
    return std::pair<int, int>(row, col);
  };

  if (method == GridMethod::MEAN) {
    std::vector<double> sum(g.cells.size(), 0.0), sum2(g.cells.size(), 0.0);
    for (const auto* p : used) {
      const auto [row, col] = cell_index(p->ground.east, p->ground.north);
      const std::size_t i = static_cast<std::size_t>(row) * g.cols + col;
      sum[i] += p->corrected_depth;
      sum2[i] += p->corrected_depth * p->corrected_depth;
      ++g.cells[i].count;
    }
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
      if (g.cells[i].count > 0) {
        const double mean = sum[i] / g.cells[i].count;
        g.cells[i].depth = mean;
        g.cells[i].sigma =
            std::sqrt(std::max(0.0, sum2[i] / g.cells[i].count - mean * mean));
      } else {
        g.cells[i].depth = DepthGrid::kNoData;
      }
    }
    return g;
  }

  // IDW: bin the points so each cell only inspects its neighborhood.
  const double radius = idw_radius_m > 0.0 ? idw_radius_m : 2.0 * cell_size_m;
  const int reach = static_cast<int>(std::ceil(radius / cell_size_m)) + 1;
  std::vector<std::vector<const DepthPoint*>> bins(g.cells.size());
  for (const auto* p : used) {
    const auto [row, col] = cell_index(p->ground.east, p->ground.north);
    bins[static_cast<std::size_t>(row) * g.cols + col].push_back(p);
  }
  const double eps2 = 1e-4 * cell_size_m * cell_size_m;
  for (int row = 0; row < g.rows; ++row) {
    for (int col = 0; col < g.cols; ++col) {
      const double ce = g.ll_east + (col + 0.5) * cell_size_m;
      const double cn = g.ll_north + (row + 0.5) * cell_size_m;
      double wsum = 0.0, dsum = 0.0, d2sum = 0.0;
      int count = 0;
      for (int r2 = std::max(0, row - reach);
           r2 <= std::min(g.rows - 1, row + reach); ++r2) {
        for (int c2 = std::max(0, col - reach);
             c2 <= std::min(g.cols - 1, col + reach); ++c2) {
          for (const auto* p :
               bins[static_cast<std::size_t>(r2) * g.cols + c2]) {
            const double dx = p->ground.east - ce;
            const double dy = p->ground.north - cn;
            const double dist2 = dx * dx + dy * dy;
            if (dist2 > radius * radius) continue;
            const double w = 1.0 / (dist2 + eps2);
            wsum += w;
            dsum += w * p->corrected_depth;
            d2sum += w * p->corrected_depth * p->corrected_depth;
            ++count;
          }
        }
      }
      GridCell& cell =
          g.cells[static_cast<std::size_t>(row) * g.cols + col];
      if (count > 0) {
        cell.count = count;
        cell.depth = dsum / wsum;
        cell.sigma =
            std::sqrt(std::max(0.0, d2sum / wsum - cell.depth * cell.depth));
      } else {
        cell.depth = DepthGrid::kNoData;
      }
    }
  }
  return g;
}

namespace {

struct Triangle {
  int a, b, c;
  double cx, cy, r2;  // circumcircle
};

bool circumcircle(const std::vector<Eigen::Vector2d>& pts, int ia, int ib,
                  int ic, double& cx, double& cy, double& r2) {
  const Eigen::Vector2d& a = pts[ia];
  const Eigen::Vector2d& b = pts[ib];
  const Eigen::Vector2d& c = pts[ic];
  const double d =
      2.0 * (a.x() * (b.y() - c.y()) + b.x() * (c.y() - a.y()) +
             c.x() * (a.y() - b.y()));
  if (std::abs(d) < 1e-18) return false;
  const double a2 = a.squaredNorm(), b2 = b.squaredNorm(), c2 = c.squaredNorm();
  cx = (a2 * (b.y() - c.y()) + b2 * (c.y() - a.y()) + c2 * (a.y() - b.y())) / d;
  cy = (a2 * (c.x() - b.x()) + b2 * (a.x() - c.x()) + c2 * (b.x() - a.x())) / d;
  r2 = (a - Eigen::Vector2d(cx, cy)).squaredNorm();
  return true;
}

}  // namespace

Tin triangulate(const std::vector<DepthPoint>& points) {
  std::vector<DepthPoint> vertices;
  std::vector<Eigen::Vector2d> pts;
  for (const auto& p : points) {
    if (rejected(p.flags)) continue;
    bool duplicate = false;
    for (const auto& q : pts) {
      if ((q - Eigen::Vector2d(p.ground.east, p.ground.north)).squaredNorm() <
          1e-18) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) {
      vertices.push_back(p);
      pts.emplace_back(p.ground.east, p.ground.north);
    }
  }
  const int n = static_cast<int>(pts.size());
  if (n < 3) {
    throw PipelineError("triangulate: need at least 3 distinct points");
  }
  // Collinearity: the largest doubled triangle area over a fan.
  {
    double max_area = 0.0;
    for (int i = 1; i + 1 < n; ++i) {
      const Eigen::Vector2d u = pts[i] - pts[0];
      const Eigen::Vector2d v = pts[i + 1] - pts[0];
      max_area = std::max(max_area, std::abs(u.x() * v.y() - u.y() * v.x()));
    }
    if (max_area < 1e-12) {
      throw PipelineError("triangulate: all points are collinear");
    }
  }

  Eigen::Vector2d lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector2d mid = 0.5 * (lo + hi);
  const double span = std::max((hi - lo).maxCoeff(), 1.0);

  // Super-triangle well outside the point cloud.
  std::vector<Eigen::Vector2d> all = pts;
  const int s0 = n, s1 = n + 1, s2 = n + 2;
  all.emplace_back(mid.x() - 20.0 * span, mid.y() - 10.0 * span);
  all.emplace_back(mid.x() + 20.0 * span, mid.y() - 10.0 * span);
  all.emplace_back(mid.x(), mid.y() + 20.0 * span);

  std::vector<Triangle> tris;
  {
    Triangle t{s0, s1, s2, 0, 0, 0};
    circumcircle(all, t.a, t.b, t.c, t.cx, t.cy, t.r2);
    tris.push_back(t);
  }

  std::vector<std::pair<int, int>> boundary;
  for (int ip = 0; ip < n; ++ip) {
    const Eigen::Vector2d& p = all[ip];
    boundary.clear();
    std::vector<Triangle> keep;
    keep.reserve(tris.size());
    auto push_edge = [&](int u, int v) {
      // Shared edges appear twice with opposite orientation; drop both.
      for (auto it = boundary.begin(); it != boundary.end(); ++it) {
        if (it->first == v && it->second == u) {
          boundary.erase(it);
          return;
        }
      }
      boundary.emplace_back(u, v);
    };
    for (const auto& t : tris) {
      const double dx = p.x() - t.cx, dy = p.y() - t.cy;
      if (dx * dx + dy * dy <= t.r2 * (1.0 + 1e-12)) {
        push_edge(t.a, t.b);
        push_edge(t.b, t.c);
        push_edge(t.c, t.a);
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& [u, v] : boundary) {
      Triangle t{u, v, ip, 0, 0, 0};
      if (circumcircle(all, t.a, t.b, t.c, t.cx, t.cy, t.r2)) {
        keep.push_back(t);
      }
    }
    tris.swap(keep);
  }

  Tin tin;
  tin.vertices = std::move(vertices);
  for (const auto& t : tris) {
    if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches super-triangle
    // Keep counter-clockwise orientation.
    const Eigen::Vector2d u = all[t.b] - all[t.a];
    const Eigen::Vector2d v = all[t.c] - all[t.a];
    const double cross = u.x() * v.y() - u.y() * v.x();
    if (std::abs(cross) < 1e-14) continue;  // degenerate sliver
    if (cross > 0.0) {
      tin.triangles.push_back({t.a, t.b, t.c});
    } else {
      tin.triangles.push_back({t.a, t.c, t.b});
    }
  }
  return tin;
}

void write_esri_ascii(const DepthGrid& grid, std::ostream& out) {
  out << "ncols " << grid.cols << "\n";
  out << "nrows " << grid.rows << "\n";
  out << "xllcorner " << std::setprecision(12) << grid.ll_east << "\n";
  out << "yllcorner " << std::setprecision(12) << grid.ll_north << "\n";
  out << "cellsize " << grid.cell_size_m << "\n";
  out << "NODATA_value " << DepthGrid::kNoData << "\n";
  out << std::setprecision(6);
  for (int row = grid.rows - 1; row >= 0; --row) {
    for (int col = 0; col < grid.cols; ++col) {
      if (col > 0) out << ' ';
      const GridCell& c = grid.at(row, col);
      out << (c.count > 0 ? c.depth : DepthGrid::kNoData);
    }
    out << '\n';
  }
}

void write_xyz_csv(const std::vector<DepthPoint>& points, std::ostream& out,
                   bool include_rejected) {
  out << "east,north,depth,t,flags\n";
  out << std::setprecision(10);
  for (const auto& p : points) {
    if (!include_rejected && rejected(p.flags)) continue;
    out << p.ground.east << ',' << p.ground.north << ',' << p.corrected_depth
        << ',' << p.t << ',' << p.flags << '\n';
  }
}

void write_tin_ply(const Tin& tin, std::ostream& out) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << tin.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "element face " << tin.triangles.size() << "\n";
  out << "property list uchar int vertex_indices\nend_header\n";
  out << std::setprecision(8);
  for (const auto& v : tin.vertices) {
    out << v.ground.east << ' ' << v.ground.north << ' ' << -v.corrected_depth
        << '\n';
  }
  for (const auto& t : tin.triangles) {
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

std::string rejected_geojson(const std::vector<DepthPoint>& points,
                             const geo::GeoPoint& origin) {
  using ordered_json = nlohmann::ordered_json;
  ordered_json features = ordered_json::array();
  for (const auto& p : points) {
    if (!rejected(p.flags)) continue;
    const geo::GeoPoint g = geo::enu_to_geo(p.ground, origin);
    ordered_json reasons = ordered_json::array();
    if (p.flags & kAttitudeReject) reasons.push_back("attitude");
    if (p.flags & kMedianReject) reasons.push_back("median");
    features.push_back(
        {{"type", "Feature"},
         {"geometry",
          {{"type", "Point"},
           {"coordinates", {g.longitude_deg, g.latitude_deg}}}},
         {"properties",
          {{"t", p.t}, {"depth", p.corrected_depth}, {"rejected_by", reasons}}}});
  }
  ordered_json root = {{"type", "FeatureCollection"}, {"features", features}};
  return root.dump(2) + "\n";
}

}  // namespace asv::bathy

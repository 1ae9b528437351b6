#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "asvkit/bathy.hpp"
#include "asvkit/sim.hpp"

using namespace asv;
using namespace asv::bathy;

namespace {

BathySample level_sample(double t, double depth, double roll_deg = 0.0,
                         double pitch_deg = 0.0) {
  BathySample s;
  s.pose.t = t;
  s.pose.position = {t, 0.0, 0.0};
  s.pose.attitude.roll = geo::deg2rad(roll_deg);
  s.pose.attitude.pitch = geo::deg2rad(pitch_deg);
  s.raw_depth = depth;
  return s;
}

DepthPoint point_at(double e, double n, double depth) {
  DepthPoint p;
  p.ground = {e, n, -depth};
  p.corrected_depth = depth;
  return p;
}

/// Brute-force Delaunay oracle: no unrejected point may fall strictly
/// inside any triangle's circumcircle.
bool empty_circumcircle_holds(const Tin& tin, double tol = 1e-9) {
  for (const auto& t : tin.triangles) {
    const auto& a = tin.vertices[t[0]].ground;
    const auto& b = tin.vertices[t[1]].ground;
    const auto& c = tin.vertices[t[2]].ground;
    const double d = 2.0 * (a.east * (b.north - c.north) +
                            b.east * (c.north - a.north) +
                            c.east * (a.north - b.north));
    if (std::abs(d) < 1e-15) return false;
    const double a2 = a.east * a.east + a.north * a.north;
    const double b2 = b.east * b.east + b.north * b.north;
    const double c2 = c.east * c.east + c.north * c.north;
    const double cx = (a2 * (b.north - c.north) + b2 * (c.north - a.north) +
                       c2 * (a.north - b.north)) /
                      d;
    const double cy = (a2 * (c.east - b.east) + b2 * (a.east - c.east) +
                       c2 * (b.east - a.east)) /
                      d;
    const double r2 = (a.east - cx) * (a.east - cx) +
                      (a.north - cy) * (a.north - cy);
    for (std::size_t vi = 0; vi < tin.vertices.size(); ++vi) {
      const auto& v = tin.vertices[vi].ground;
      const double dist2 =
          (v.east - cx) * (v.east - cx) + (v.north - cy) * (v.north - cy);
      if (dist2 < r2 * (1.0 - tol) - tol) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("attitude filter flags strictly above the threshold") {
  std::vector<BathySample> samples;
  samples.push_back(level_sample(0, 5.0));
  samples.push_back(level_sample(1, 5.0, 12.0, 0.0));
  samples.push_back(level_sample(2, 5.0, 10.0, 0.0));  // exactly 10: kept
  samples.push_back(level_sample(3, 5.0, 0.0, -11.0));
  const auto out = attitude_filter(samples, 10.0);
  CHECK(out[0].flags == 0);
  CHECK((out[1].flags & kAttitudeReject) != 0);
  CHECK(out[2].flags == 0);
  CHECK((out[3].flags & kAttitudeReject) != 0);
  // Nothing is deleted.
  CHECK(out.size() == samples.size());
}

TEST_CASE("median filter flags spikes and spares gradients") {
  SUBCASE("constant stream: zero flags") {
    std::vector<BathySample> samples;
    for (int i = 0; i < 50; ++i) samples.push_back(level_sample(i, 5.0));
    for (const auto& s : median_filter(samples, 9, 1.0)) {
      CHECK(s.flags == 0);
    }
  }
  SUBCASE("a 10 m spike in a 5 m stream is flagged, neighbors kept") {
    std::vector<BathySample> samples;
    for (int i = 0; i < 21; ++i) {
      samples.push_back(level_sample(i, i == 10 ? 10.0 : 5.0));
    }
    const auto out = median_filter(samples, 9, 1.0);
    for (int i = 0; i < 21; ++i) {
      if (i == 10) {
        CHECK((out[i].flags & kMedianReject) != 0);
      } else {
        CHECK(out[i].flags == 0);
      }
    }
  }
  SUBCASE("a smooth ramp within the band is untouched (auto band)") {
    std::vector<BathySample> samples;
    for (int i = 0; i < 200; ++i) {
      samples.push_back(level_sample(i, 3.0 + 0.05 * i));
    }
    for (const auto& s : median_filter(samples, 9)) {
      CHECK(s.flags == 0);
    }
  }
  SUBCASE("window must be odd and at least 3") {
    std::vector<BathySample> samples{level_sample(0, 5.0)};
    CHECK_THROWS_AS(static_cast<void>(median_filter(samples, 4)),
                    std::invalid_argument);
    CHECK_THROWS_AS(static_cast<void>(median_filter(samples, 1)),
                    std::invalid_argument);
  }
}

TEST_CASE("stages only ever add flags (flag monotonicity)") {
  std::vector<BathySample> samples;
  for (int i = 0; i < 30; ++i) {
    samples.push_back(level_sample(i, 5.0, i == 3 ? 15.0 : 0.0));
  }
  samples[7].raw_depth = 20.0;
  auto a = attitude_filter(samples, 10.0);
  auto b = median_filter(a, 9);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK((b[i].flags & a[i].flags) == a[i].flags);
  }
  const auto points = georeference(b, geo::LeverArm{});
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK((points[i].flags & b[i].flags) == b[i].flags);
  }
}

TEST_CASE("georeference identities and trigonometry") {
  SUBCASE("level, zero arm, zero offsets: ground under the sounder") {
    std::vector<BathySample> samples{level_sample(0, 7.0)};
    GeoreferenceConfig cfg;
    cfg.immersion_depth_m = 0.0;
    const auto pts = georeference(samples, geo::LeverArm{}, cfg);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].corrected_depth == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(pts[0].ground.east == doctest::Approx(0.0));
    CHECK(pts[0].ground.north == doctest::Approx(0.0));
  }
  SUBCASE("10 degree pitch shortens the vertical and displaces the ground") {
    std::vector<BathySample> samples{level_sample(0, 10.0, 0.0, 10.0)};
    GeoreferenceConfig cfg;
    cfg.immersion_depth_m = 0.0;
    const auto pts = georeference(samples, geo::LeverArm{}, cfg);
    const double c = std::cos(geo::deg2rad(10.0));
    const double s = std::sin(geo::deg2rad(10.0));
    CHECK(pts[0].corrected_depth == doctest::Approx(10.0 * c).epsilon(1e-9));
    const double horizontal = std::hypot(pts[0].ground.east - 0.0,
                                         pts[0].ground.north - 0.0);
    CHECK(horizontal == doctest::Approx(10.0 * s).epsilon(1e-9));
  }
  SUBCASE("immersion, datum, and geoid shift the depth additively") {
    std::vector<BathySample> samples{level_sample(0, 7.0)};
    GeoreferenceConfig cfg;
    cfg.immersion_depth_m = 0.1;
    cfg.datum_offset_m = 0.2;
    cfg.geoid_undulation_m = -0.05;
    const auto pts = georeference(samples, geo::LeverArm{}, cfg);
    CHECK(pts[0].corrected_depth == doctest::Approx(7.25).epsilon(1e-12));
  }
}

TEST_CASE("gridding") {
  const geo::GeoPoint origin{-22.340984, 40.337634, 0.0};
  SUBCASE("single point occupies a single cell") {
    const auto g = grid({point_at(1.0, 2.0, 5.0)}, 0.5, GridMethod::MEAN,
                        origin);
    int populated = 0;
    for (const auto& c : g.cells) {
      if (c.count > 0) {
        ++populated;
        CHECK(c.depth == doctest::Approx(5.0));
      }
    }
    CHECK(populated == 1);
  }
  SUBCASE("MEAN conserves mass and averages noise") {
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> coord(0.0, 20.0);
    std::vector<DepthPoint> pts;
    double depth_sum = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const double d = 5.0 + noise(rng);
      pts.push_back(point_at(coord(rng), coord(rng), d));
      depth_sum += d;
    }
    const auto g = grid(pts, 0.5, GridMethod::MEAN, origin);
    double cell_sum = 0.0;
    for (const auto& c : g.cells) {
      if (c.count > 0) {
        cell_sum += c.depth * c.count;
        CHECK(c.depth == doctest::Approx(5.0).epsilon(0.05));
      }
    }
    CHECK(cell_sum == doctest::Approx(depth_sum).epsilon(1e-12));
  }
  SUBCASE("IDW fills only within its radius") {
    std::vector<DepthPoint> pts = {point_at(0, 0, 4.0), point_at(10, 0, 6.0)};
    const auto g = grid(pts, 0.5, GridMethod::IDW, origin, 1.0);
    CHECK(g.cols > 15);
    int populated = 0;
    for (const auto& c : g.cells) {
      if (c.count > 0) ++populated;
    }
    // One 0.5 m cell row spans the two points; each fills the cells whose
    // centers sit within 1 m, three per point.
    CHECK(populated == 6);
    // The far ends of the row stay empty.
    CHECK(g.at(0, g.cols / 2).count == 0);
  }
  SUBCASE("rejected points and empty input") {
    DepthPoint p = point_at(0, 0, 4.0);
    p.flags = kMedianReject;
    CHECK_THROWS_AS(static_cast<void>(grid({p}, 0.5, GridMethod::MEAN,
                                           origin)),
                    PipelineError);
    CHECK_THROWS_AS(
        static_cast<void>(grid({}, 0.5, GridMethod::MEAN, origin)),
        PipelineError);
  }
}

TEST_CASE("Delaunay triangulation basics") {
  SUBCASE("three points make one triangle") {
    const auto tin = triangulate(
        {point_at(0, 0, 5), point_at(1, 0, 5), point_at(0, 1, 5)});
    CHECK(tin.triangles.size() == 1);
  }
  SUBCASE("a square splits into two triangles meeting the circle test") {
    const auto tin =
        triangulate({point_at(0, 0, 5), point_at(1, 0, 5), point_at(1, 1, 5),
                     point_at(0, 1, 5)});
    CHECK(tin.triangles.size() == 2);
    CHECK(empty_circumcircle_holds(tin));
  }
  SUBCASE("collinear input is an error") {
    CHECK_THROWS_AS(
        static_cast<void>(triangulate(
            {point_at(0, 0, 5), point_at(1, 1, 5), point_at(2, 2, 5)})),
        PipelineError);
    CHECK_THROWS_AS(
        static_cast<void>(triangulate({point_at(0, 0, 5), point_at(1, 1, 5)})),
        PipelineError);
  }
  SUBCASE("200 random points satisfy the brute-force oracle") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> coord(-50.0, 50.0);
    std::vector<DepthPoint> pts;
    for (int i = 0; i < 200; ++i) {
      pts.push_back(point_at(coord(rng), coord(rng), 5.0));
    }
    const auto tin = triangulate(pts);
    CHECK(tin.triangles.size() > 300);  // ~2n for a dense cloud
    CHECK(empty_circumcircle_holds(tin));
  }
}

TEST_CASE("noiseless level survey passes through the pipeline unchanged") {
  mission::SurveyArea area;
  area.center = {-22.340984, 40.337634, 0.0};
  area.width_m = 10.0;
  area.length_m = 30.0;
  const auto plan = mission::plan_lawnmower(area, 5.0, 1.0, 2.0);
  std::map<std::string, geo::LeverArm> arms;
  arms["gps"] = geo::LeverArm{};
  arms["echosounder"] = geo::LeverArm{};
  const auto log = sim::run_survey(plan, sim::VehicleModel{},
                                   sim::SeabedModel::plane(5.0),
                                   sim::WaveModel::calm(), sim::BatteryModel{},
                                   arms, sim::SensorNoiseConfig::noiseless(),
                                   4);
  auto samples = samples_from_log(log);
  REQUIRE(samples.size() > 50);
  samples = attitude_filter(samples);
  samples = median_filter(samples);
  GeoreferenceConfig cfg;
  cfg.immersion_depth_m = 0.0;
  const auto points = georeference(samples, geo::LeverArm{}, cfg);
  for (const auto& p : points) {
    CHECK(p.flags == 0);
    CHECK(p.corrected_depth == doctest::Approx(5.0).epsilon(1e-4));
  }
  const auto g = grid(points, 0.5, GridMethod::MEAN, log.header.origin);
  for (const auto& c : g.cells) {
    if (c.count > 0) CHECK(c.depth == doctest::Approx(5.0).epsilon(1e-4));
  }
}

TEST_CASE("Europa-scale grid shows 24 distinct transect bands") {
  const mission::SurveyArea area{{-22.340984, 40.337634, 0.0}, 49.0, 115.0,
                                 0.0};
  const auto plan = mission::plan_lawnmower(area, 2.0, 1.0, 2.0);
  const auto log = sim::run_survey(
      plan, sim::VehicleModel{}, sim::SeabedModel::plane(5.0),
      sim::WaveModel::calm(), sim::BatteryModel{}, sim::default_lever_arms(),
      sim::SensorNoiseConfig::noiseless(), 6);
  auto samples = attitude_filter(samples_from_log(log));
  samples = median_filter(samples);
  const auto points = georeference(samples, geo::LeverArm{});
  // Cluster east coordinates onto the 2 m transect comb.
  std::set<int> bands;
  for (const auto& p : points) {
    if (std::abs(p.ground.north) > 56.0) continue;  // skip the turns
    bands.insert(static_cast<int>(std::lround(p.ground.east / 2.0)));
  }
  CHECK(bands.size() == 24);
}

TEST_CASE("exports are well-formed") {
  const geo::GeoPoint origin{-22.340984, 40.337634, 0.0};
  std::vector<DepthPoint> pts = {point_at(0, 0, 4.0), point_at(3, 1, 5.0),
                                 point_at(1, 3, 6.0)};
  pts.push_back(point_at(2, 2, 50.0));
  pts.back().flags = kMedianReject;

  std::ostringstream asc;
  write_esri_ascii(grid(pts, 0.5, GridMethod::MEAN, origin), asc);
  CHECK(asc.str().find("ncols") == 0);
  CHECK(asc.str().find("NODATA_value") != std::string::npos);

  std::ostringstream xyz;
  write_xyz_csv(pts, xyz);
  const std::string xyz_text = xyz.str();
  CHECK(std::count(xyz_text.begin(), xyz_text.end(), '\n') == 4);  // 3 + hdr

  std::ostringstream ply;
  write_tin_ply(triangulate(pts), ply);
  CHECK(ply.str().find("ply") == 0);
  CHECK(ply.str().find("element face 1") != std::string::npos);

  const std::string gj = rejected_geojson(pts, origin);
  CHECK(gj.find("median") != std::string::npos);
  CHECK(gj.find("FeatureCollection") != std::string::npos);
}

#include <doctest.h>

#include <cmath>

#include "asvkit/photo.hpp"

using namespace asv;
using namespace asv::photo;

namespace {

const geo::GeoPoint kOrigin{-22.340984, 40.337634, 0.0};

/// Log with straight north-going transects at the given east offsets.
logfmt::SurveyLog transect_log(const std::vector<double>& east_offsets,
                               double length_m, double speed_mps) {
  logfmt::SurveyLog log;
  log.header.survey_id = "photo-test";
  log.header.origin = kOrigin;
  log.header.started_at_utc = "2020-10-09T08:00:00Z";
  double t = 0.0;
  for (std::size_t k = 0; k < east_offsets.size(); ++k) {
    const double e = east_offsets[k];
    for (double s = 0.0; s <= length_m; s += speed_mps) {
      const double n = (k % 2 == 0) ? s : length_m - s;
      log.records.push_back(logfmt::AttRecord{
          t, 0.0, 0.0, (k % 2 == 0) ? 0.0 : geo::kPi});
      log.records.push_back(logfmt::GpsRecord{
          t, geo::enu_to_geo({e, n, 0.0}, kOrigin),
          logfmt::GpsFixType::RTK_FIXED, 0.6});
      t += 1.0;
    }
  }
  return log;
}

}  // namespace

TEST_CASE("nadir footprint is the expected rectangle") {
  CameraModel cam;
  cam.hfov_water_deg = 60.0;
  cam.vfov_water_deg = 45.0;
  geo::Pose pose;
  pose.position = {10.0, 20.0, 0.0};
  const double d = 3.0;
  const Footprint fp = footprint(pose, cam, d);

  double e_min = 1e9, e_max = -1e9, n_min = 1e9, n_max = -1e9;
  for (const auto& c : fp.corners) {
    e_min = std::min(e_min, c.east);
    e_max = std::max(e_max, c.east);
    n_min = std::min(n_min, c.north);
    n_max = std::max(n_max, c.north);
  }
  const double width = 2.0 * d * std::tan(geo::deg2rad(30.0));
  const double length = 2.0 * d * std::tan(geo::deg2rad(22.5));
  CHECK(e_max - e_min == doctest::Approx(width).epsilon(1e-9));
  CHECK(n_max - n_min == doctest::Approx(length).epsilon(1e-9));
  // Centered under the vehicle.
  CHECK(0.5 * (e_min + e_max) == doctest::Approx(10.0).epsilon(1e-9));
  CHECK(0.5 * (n_min + n_max) == doctest::Approx(20.0).epsilon(1e-9));

  CHECK(swath_width(cam, 3.0) == doctest::Approx(3.4641).epsilon(1e-4));
  CHECK_THROWS_AS(static_cast<void>(footprint(pose, cam, 0.0)),
                  GeometryError);
}

TEST_CASE("footprint area scales with depth squared") {
  CameraModel cam;
  geo::Pose pose;
  for (double d : {1.0, 2.5, 7.0}) {
    const double a1 = footprint(pose, cam, d).area();
    const double a2 = footprint(pose, cam, 2.0 * d).area();
    CHECK(a2 / a1 == doctest::Approx(4.0).epsilon(1e-9));
  }
}

TEST_CASE("tilted cameras skew the footprint off-center") {
  CameraModel cam;
  cam.tilt_from_vertical_deg = 30.0;  // tracking configuration
  geo::Pose pose;
  const Footprint fp = footprint(pose, cam, 3.0);
  double n_mid = 0.0;
  for (const auto& c : fp.corners) n_mid += c.north / 4.0;
  CHECK(n_mid > 1.0);  // pushed forward of the vehicle

  cam.tilt_from_vertical_deg = 89.0;  // nearly horizontal boresight
  CHECK_THROWS_AS(static_cast<void>(footprint(pose, cam, 3.0)),
                  GeometryError);
}

TEST_CASE("spacing for overlap follows the swath geometry") {
  CameraModel cam;
  cam.hfov_water_deg = 60.0;
  SUBCASE("zero overlap demands a full swath") {
    CHECK(spacing_for_overlap(cam, 3.0, 0.0) ==
          doctest::Approx(swath_width(cam, 3.0)).epsilon(1e-12));
  }
  SUBCASE("the 70% rule at 3 m depth") {
    CHECK(spacing_for_overlap(cam, 3.0, 0.7) ==
          doctest::Approx(0.3 * 3.4641).epsilon(1e-3));
  }
  SUBCASE("monotonicity: tighter overlap, closer lines; deeper, wider") {
    double prev = spacing_for_overlap(cam, 3.0, 0.0);
    for (double o : {0.2, 0.5, 0.7, 0.9}) {
      const double s = spacing_for_overlap(cam, 3.0, o);
      CHECK(s < prev);
      prev = s;
    }
    prev = 0.0;
    for (double d : {1.0, 2.0, 4.0, 8.0}) {
      const double s = spacing_for_overlap(cam, d, 0.7);
      CHECK(s > prev);
      prev = s;
    }
  }
  CHECK_THROWS_AS(static_cast<void>(spacing_for_overlap(cam, 3.0, 1.0)),
                  GeometryError);
}

TEST_CASE("fov_for_spacing inverts the spacing calculator") {
  for (double s : {1.0, 2.0, 3.5}) {
    for (double d : {2.0, 4.0}) {
      const double fov = fov_for_spacing(s, d, 0.7);
      CameraModel cam;
      cam.hfov_water_deg = fov;
      CHECK(spacing_for_overlap(cam, d, 0.7) ==
            doctest::Approx(s).epsilon(1e-9));
    }
  }
  // A survey with 2 m lines over 2-4 m depths: at the conservative 2 m
  // depth the 70% side-lap implies a ~118 degree in-water FOV; the
  // wide-angle action camera comes close only at the deep end, which is
  // exactly why the calculator keys on minimum depth.
  const double implied = fov_for_spacing(2.0, 2.0, 0.7);
  CHECK(implied == doctest::Approx(118.07).epsilon(1e-3));
  const double gopro_water = water_fov_from_air(122.6);
  CHECK(gopro_water < implied);
  CHECK(fov_for_spacing(2.0, 4.0, 0.7) < gopro_water);
}

TEST_CASE("water FOV conversion uses the flat-port approximation") {
  const double w = water_fov_from_air(90.0);
  CHECK(w == doctest::Approx(2.0 * geo::rad2deg(std::atan(1.0 / 1.33)))
                 .epsilon(1e-12));
  CHECK_THROWS_AS(static_cast<void>(water_fov_from_air(0.0)), GeometryError);
}

TEST_CASE("single-transect forward overlap matches the closed form") {
  CameraModel cam;
  cam.hfov_water_deg = 60.0;
  cam.vfov_water_deg = 45.0;
  cam.frame_interval_s = 0.5;
  const double speed = 0.8;
  const double depth = 3.0;
  const auto log = transect_log({0.0}, 40.0, speed);
  const auto rep = coverage_report(log, cam, depth, 0.1, 0.7);

  const double footprint_len = 2.0 * depth * std::tan(geo::deg2rad(22.5));
  const double expected =
      1.0 - speed * cam.frame_interval_s / footprint_len;
  CHECK(rep.frames > 50);
  CHECK(rep.forward_overlap_mean == doctest::Approx(expected).epsilon(0.05));
  CHECK(rep.fraction_forward_pairs_ok == doctest::Approx(1.0));
}

TEST_CASE("transects a full swath apart cover without side overlap") {
  CameraModel cam;
  cam.hfov_water_deg = 60.0;
  cam.vfov_water_deg = 45.0;
  cam.frame_interval_s = 0.5;
  const double depth = 3.0;
  const double swath = swath_width(cam, depth);

  SUBCASE("exact tiling leaves no gaps") {
    const auto rep = coverage_report(transect_log({0.0, swath}, 30.0, 0.8),
                                     cam, depth, 0.1, 0.7);
    CHECK(rep.covered_fraction > 0.97);
  }
  SUBCASE("wider spacing opens a gap strip") {
    const auto rep =
        coverage_report(transect_log({0.0, 1.4 * swath}, 30.0, 0.8), cam,
                        depth, 0.1, 0.7);
    CHECK(rep.covered_fraction < 0.95);
    CHECK_FALSE(rep.gap_boxes.empty());
    const std::string gj = rep.gaps_geojson(kOrigin);
    CHECK(gj.find("coverage_gap") != std::string::npos);
  }
}

TEST_CASE("spacing from the calculator yields the target side overlap") {
  CameraModel cam;
  cam.hfov_water_deg = 60.0;
  cam.vfov_water_deg = 45.0;
  cam.frame_interval_s = 0.5;
  const double depth = 3.0;
  const double spacing = spacing_for_overlap(cam, depth, 0.7);
  const auto log = transect_log({0.0, spacing, 2.0 * spacing}, 30.0, 0.8);
  const auto rep = coverage_report(log, cam, depth, 0.1, 0.7);
  CHECK(rep.covered_fraction > 0.99);
  // Side overlap between adjacent swaths: 1 - spacing/swath = target.
  CHECK(1.0 - spacing / swath_width(cam, depth) ==
        doctest::Approx(0.7).epsilon(1e-9));
}

// asvkit: plan, simulate, and post-process shallow-water ASV surveys.
//
// Subcommands mirror the three mission types plus planning:
//   plan          lawnmower mission over a rectangle -> GeoJSON
//   simulate      survey simulation -> .svlog
//   track-sim     closed-loop acoustic tracking simulation -> .svlog
//   sbl-solve     re-solve raw TOA pings from a log -> CSV fixes
//   process-bathy correction pipeline -> ESRI grid / XYZ / PLY / GeoJSON
//   check-overlap photogrammetric coverage verification -> grid + gaps
//   report        human-readable summary of any produced artifact

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "asvkit/bathy.hpp"
#include "asvkit/geo.hpp"
#include "asvkit/logfmt.hpp"
#include "asvkit/mission.hpp"
#include "asvkit/photo.hpp"
#include "asvkit/sbl.hpp"
#include "asvkit/sim.hpp"
#include "asvkit/tracker.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace asv;

namespace {

constexpr const char* kVersion = "0.1.0";

uint64_t fnv1a_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

struct NullBuffer : std::streambuf {
  int overflow(int c) override { return c; }
};

struct RunContext {
  std::string out_dir = ".";
  uint64_t seed = 1;
  std::string log_level = "info";

  /// Informational prints; silenced by --log-level quiet.
  std::ostream& info() {
    static NullBuffer null_buffer;
    static std::ostream null_stream(&null_buffer);
    return log_level == "quiet" ? null_stream : std::cout;
  }
  std::string subcommand;
  ordered_json params = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  std::vector<std::string> outputs;

  fs::path out_path(const std::string& name) const {
    return fs::path(out_dir) / name;
  }
  void note_input(const std::string& path) {
    std::ostringstream h;
    h << "fnv64:" << std::hex << fnv1a_file(path);
    inputs[path] = h.str();
  }
  void write_manifest() {
    fs::create_directories(out_dir);
    ordered_json manifest = {{"tool", "asvkit"},
                             {"version", kVersion},
                             {"subcommand", subcommand},
                             {"seed", seed},
                             {"params", params},
                             {"inputs", inputs},
                             {"outputs", outputs}};
    std::ofstream out(out_path("manifest.json"));
    out << manifest.dump(2) << "\n";
  }
};

geo::GeoPoint parse_center(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) {
    throw CLI::ValidationError("--center expects 'lat,lon'");
  }
  geo::GeoPoint p{std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1)),
                  0.0};
  if (!p.valid()) {
    throw CLI::ValidationError("--center coordinates out of range");
  }
  return p;
}

void save_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
}

int cmd_plan(RunContext& ctx, const std::string& center, double width,
             double length, double bearing, double spacing, double speed,
             double rate, bool force_speed) {
  mission::SurveyArea area;
  area.center = parse_center(center);
  area.width_m = width;
  area.length_m = length;
  area.bearing_of_length_axis_deg = bearing;
  const auto plan =
      mission::plan_lawnmower(area, spacing, speed, rate, force_speed);

  fs::create_directories(ctx.out_dir);
  const fs::path out = ctx.out_path("plan.geojson");
  save_text(out, mission::plan_to_geojson(plan));
  ctx.outputs.push_back(out.string());

  const auto spec = mission::sampling_spec(plan, 5.0);
  ctx.info() << "plan: " << plan.transect_count << " transects of "
            << plan.transect_length_m << " m, spacing "
            << plan.transect_spacing_m << " m\n";
  ctx.info() << "along-track spacing: " << spec.along_track_m << " m\n";
  ctx.info() << "estimated duration (10 s turns): "
            << mission::estimate_duration_s(plan, 10.0) / 3600.0 << " h\n";
  ctx.info() << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_simulate(RunContext& ctx, const std::string& plan_path,
                 const std::string& seabed_path, const std::string& out_name,
                 double wave_roll_deg, double wave_pitch_deg,
                 double gust_probability, double draw_w, bool noiseless) {
  const auto plan = mission::plan_from_geojson_file(plan_path);
  ctx.note_input(plan_path);
  sim::SeabedModel seabed = sim::SeabedModel::plane(5.0);
  if (!seabed_path.empty()) {
    seabed = sim::SeabedModel::from_json_file(seabed_path);
    ctx.note_input(seabed_path);
  }
  sim::WaveModel waves;
  waves.roll_amplitude_rad = geo::deg2rad(wave_roll_deg);
  waves.pitch_amplitude_rad = geo::deg2rad(wave_pitch_deg);
  waves.gust_spike_probability = gust_probability;
  sim::BatteryModel battery;
  battery.avg_power_draw_w = draw_w;
  const sim::SensorNoiseConfig noise =
      noiseless ? sim::SensorNoiseConfig::noiseless()
                : sim::SensorNoiseConfig{};

  const auto log =
      sim::run_survey(plan, sim::VehicleModel{}, seabed, waves, battery,
                      sim::default_lever_arms(), noise, ctx.seed);
  const fs::path out = ctx.out_path(out_name);
  fs::create_directories(ctx.out_dir);
  logfmt::write_log_file(log, out.string());
  ctx.outputs.push_back(out.string());
  ctx.info() << "wrote " << out.string() << " (" << log.records.size()
            << " records, " << logfmt::record_time(log.records.back())
            << " s)\n";
  return 0;
}

/// Beacon track from a CSV file of "t,east,north,up" rows (header allowed).
std::vector<sim::TimedEnu> beacon_track_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open beacon profile: " + path);
  }
  std::vector<sim::TimedEnu> track;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::array<double, 4> v{};
    bool numeric = true;
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(row, cell, ',')) {
        numeric = false;
        break;
      }
      try {
        v[i] = std::stod(cell);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;  // header or stray line
    track.push_back({v[0], geo::EnuPoint{v[1], v[2], v[3]}});
  }
  if (track.size() < 2) {
    throw std::runtime_error("beacon profile has fewer than 2 usable rows: " +
                             path);
  }
  return track;
}

int cmd_track_sim(RunContext& ctx, const std::string& profile,
                  double duration_s, double beacon_speed, double threshold,
                  double loop_period, const std::string& out_name) {
  std::vector<sim::TimedEnu> beacon;
  if (fs::exists(profile)) {
    beacon = beacon_track_from_csv(profile);
    ctx.note_input(profile);
  } else {
    sim::BeaconProfileParams params;
    params.duration_s = duration_s;
    params.mean_speed_mps = beacon_speed;
    const auto kind = sim::beacon_profile_kind_from_string(profile);
    beacon = sim::beacon_profile(kind, params, ctx.seed);
  }

  tracker::TrackSessionConfig cfg;
  cfg.tracker.follow_threshold_m = threshold;
  cfg.tracker.loop_period_s = loop_period;
  cfg.origin = {-21.017348, 55.238212, 0.0};
  const auto result = tracker::track_session(beacon, cfg, ctx.seed);

  const fs::path out = ctx.out_path(out_name);
  fs::create_directories(ctx.out_dir);
  logfmt::write_log_file(result.log, out.string());
  ctx.outputs.push_back(out.string());

  const auto& st = result.stats;
  ctx.info() << "tracked " << st.control_steps << " control steps ("
            << beacon.back().t / 60.0 << " min)\n";
  ctx.info() << "within acoustic range: " << st.fraction_within_range * 100.0
            << "% of steps\n";
  if (st.convergence_time_s >= 0.0) {
    ctx.info() << "converged after " << st.convergence_time_s << " s; near ("
              << threshold << "+2 m) for "
              << st.fraction_near_after_convergence * 100.0
              << "% of steps\n";
  }
  for (const auto& [mode, count] : st.mode_counts) {
    ctx.info() << "mode " << mode << ": " << count << " steps\n";
  }
  for (const auto& w : st.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  ctx.info() << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_sbl_solve(RunContext& ctx, const std::string& in_path,
                  const std::string& out_name, double max_range,
                  double sound_speed) {
  const auto log = logfmt::read_log_file(in_path);
  ctx.note_input(in_path);

  // Pose track from GPS/ATT records for geolocating each ping.
  struct PoseSample {
    double t;
    geo::EnuPoint position;
    double yaw;
  };
  geo::LeverArm gps_arm;
  if (log.header.lever_arms.contains("gps")) {
    gps_arm = log.header.lever_arms.at("gps");
  }
  std::vector<PoseSample> poses;
  double last_yaw = 0.0;
  for (const auto& rec : log.records) {
    if (const auto* a = std::get_if<logfmt::AttRecord>(&rec)) {
      last_yaw = a->yaw;
    } else if (const auto* g = std::get_if<logfmt::GpsRecord>(&rec)) {
      // Reference the pose to the vehicle, not the antenna.
      geo::Attitude att;
      att.yaw = last_yaw;
      const Eigen::Vector3d ref =
          geo::geo_to_enu(g->position, log.header.origin).vec() -
          geo::rotate_body_to_enu(gps_arm.offset, att);
      poses.push_back({g->t, geo::EnuPoint(ref), last_yaw});
    }
  }
  if (poses.empty()) {
    throw std::runtime_error("log has no GPS records to geolocate against");
  }

  sbl::SblConfig cfg;
  cfg.max_range_m = max_range;
  cfg.sound_speed = sound_speed;
  const auto array = sbl::ReceiverArray::square();

  std::ostringstream csv;
  csv << "t,lat,lon,depth,std,valid\n";
  csv.precision(10);
  std::size_t pi = 0;
  std::optional<Eigen::Vector3d> prior;
  int solved = 0;
  for (const auto& rec : log.records) {
    const auto* toa_rec = std::get_if<logfmt::ToaRecord>(&rec);
    if (!toa_rec) continue;
    while (pi + 1 < poses.size() && poses[pi + 1].t <= toa_rec->t) ++pi;
    geo::Pose pose;
    pose.t = toa_rec->t;
    pose.position = poses[pi].position;
    pose.attitude.yaw = poses[pi].yaw;

    sbl::ToaSet toa;
    toa.t = toa_rec->t;
    toa.arrival_s = toa_rec->arrival_s;
    toa.sound_speed = toa_rec->sound_speed;
    const auto fix = sbl::solve_fix(toa, pose, array, prior, cfg,
                                    log.header.origin);
    if (fix.valid) prior = fix.rel_position;
    const geo::EnuPoint enu =
        geo::geo_to_enu(fix.geo_position, log.header.origin);
    csv << fix.t << ',' << fix.geo_position.latitude_deg << ','
        << fix.geo_position.longitude_deg << ',' << -enu.up << ','
        << fix.std_m << ',' << (fix.valid ? 1 : 0) << '\n';
    ++solved;
  }
  if (solved == 0) {
    throw std::runtime_error("log contains no TOA records to solve");
  }
  const fs::path out = ctx.out_path(out_name);
  fs::create_directories(ctx.out_dir);
  save_text(out, csv.str());
  ctx.outputs.push_back(out.string());
  ctx.info() << "solved " << solved << " pings -> " << out.string() << "\n";
  return 0;
}

int cmd_process_bathy(RunContext& ctx, const std::string& in_path,
                      double cell, const std::string& method_name,
                      double max_angle, int window, double band,
                      double immersion, double datum, double geoid,
                      const std::string& out_name, bool with_xyz,
                      bool with_ply, bool with_rejected) {
  const auto log = logfmt::read_log_file(in_path);
  ctx.note_input(in_path);

  auto samples = bathy::samples_from_log(log);
  if (samples.empty()) {
    throw std::runtime_error("log has no usable DPTH/GPS/ATT overlap");
  }
  samples = bathy::attitude_filter(std::move(samples), max_angle);
  samples = bathy::median_filter(
      std::move(samples), window,
      band > 0.0 ? std::optional<double>(band) : std::nullopt);

  // Echo-sounder offset relative to the GPS antenna, from the log header.
  geo::LeverArm relative_arm;
  if (log.header.lever_arms.contains("echosounder") &&
      log.header.lever_arms.contains("gps")) {
    relative_arm.offset = log.header.lever_arms.at("echosounder").offset -
                          log.header.lever_arms.at("gps").offset;
  }
  bathy::GeoreferenceConfig geo_cfg;
  geo_cfg.immersion_depth_m = immersion;
  geo_cfg.datum_offset_m = datum;
  geo_cfg.geoid_undulation_m = geoid;
  const auto points = bathy::georeference(samples, relative_arm, geo_cfg);

  int rejected_n = 0;
  for (const auto& p : points) {
    if (bathy::rejected(p.flags)) ++rejected_n;
  }

  const auto method = method_name == "idw" ? bathy::GridMethod::IDW
                                           : bathy::GridMethod::MEAN;
  const auto grid =
      bathy::grid(points, cell, method, log.header.origin);

  fs::create_directories(ctx.out_dir);
  const fs::path out = ctx.out_path(out_name);
  {
    std::ofstream f(out);
    bathy::write_esri_ascii(grid, f);
  }
  ctx.outputs.push_back(out.string());
  if (with_xyz) {
    const fs::path p = ctx.out_path("soundings.xyz.csv");
    std::ofstream f(p);
    bathy::write_xyz_csv(points, f);
    ctx.outputs.push_back(p.string());
  }
  if (with_ply) {
    const fs::path p = ctx.out_path("tin.ply");
    std::ofstream f(p);
    bathy::write_tin_ply(bathy::triangulate(points), f);
    ctx.outputs.push_back(p.string());
  }
  if (with_rejected) {
    const fs::path p = ctx.out_path("rejected.geojson");
    save_text(p, bathy::rejected_geojson(points, log.header.origin));
    ctx.outputs.push_back(p.string());
  }

  int populated = 0;
  for (const auto& c : grid.cells) {
    if (c.count > 0) ++populated;
  }
  ctx.info() << points.size() << " soundings, " << rejected_n << " rejected ("
            << (points.empty()
                    ? 0.0
                    : 100.0 * rejected_n / static_cast<double>(points.size()))
            << "%)\n";
  ctx.info() << "grid " << grid.rows << " x " << grid.cols << " at " << cell
            << " m, " << populated << " populated cells\n";
  ctx.info() << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_check_overlap(RunContext& ctx, const std::string& in_path,
                      double fov_water, double vfov_water, double interval,
                      double depth, double target, const std::string& out_name,
                      const std::string& gaps_name) {
  const auto log = logfmt::read_log_file(in_path);
  ctx.note_input(in_path);
  photo::CameraModel cam;
  cam.hfov_water_deg = fov_water;
  cam.vfov_water_deg = vfov_water;
  cam.frame_interval_s = interval;
  const auto rep = photo::coverage_report(log, cam, depth, 0.1, target);

  fs::create_directories(ctx.out_dir);
  const fs::path out = ctx.out_path(out_name);
  {
    std::ofstream f(out);
    rep.write_counts_ascii(f);
  }
  ctx.outputs.push_back(out.string());
  if (!gaps_name.empty()) {
    const fs::path p = ctx.out_path(gaps_name);
    save_text(p, rep.gaps_geojson(log.header.origin));
    ctx.outputs.push_back(p.string());
  }

  ctx.info() << rep.frames << " frames\n";
  ctx.info() << "area covered by >=1 view: " << rep.covered_fraction * 100.0
            << "%\n";
  ctx.info() << "forward overlap: mean " << rep.forward_overlap_mean * 100.0
            << "%, min " << rep.forward_overlap_min * 100.0 << "%\n";
  ctx.info() << "frame pairs meeting " << target * 100.0
            << "%: " << rep.fraction_forward_pairs_ok * 100.0 << "%\n";
  ctx.info() << "gap rectangles: " << rep.gap_boxes.size() << "\n";
  ctx.info() << "wrote " << out.string() << "\n";
  return (rep.fraction_forward_pairs_ok >= 1.0 || rep.frames == 0) ? 0 : 0;
}

std::string summarize_svlog(const fs::path& path) {
  const auto log = logfmt::read_log_file(path.string());
  std::map<std::string, int> counts;
  std::map<std::string, int> modes;
  std::vector<double> sbl_std;
  int sbl_in_range = 0;
  for (const auto& rec : log.records) {
    ++counts[std::string(logfmt::record_tag(rec))];
    if (const auto* o = std::get_if<logfmt::OpaqueRecord>(&rec)) {
      if (o->tag == "TRK") {
        const auto j = ordered_json::parse(o->payload);
        if (j.contains("mode")) {
          ++modes[j["mode"].get<std::string>()];
        }
      }
    } else if (const auto* s = std::get_if<logfmt::SblRecord>(&rec)) {
      sbl_std.push_back(s->std_m);
      if (Eigen::Vector3d(s->rel_x, s->rel_y, s->rel_z).norm() < 100.0) {
        ++sbl_in_range;
      }
    }
  }
  std::ostringstream out;
  out << path.string() << ": survey '" << log.header.survey_id << "'\n";
  const double duration =
      log.records.empty() ? 0.0 : logfmt::record_time(log.records.back());
  out << "  duration: " << duration << " s (" << duration / 60.0
      << " min)\n";
  for (const auto& [tag, n] : counts) {
    out << "  " << tag << ": " << n << " records\n";
  }
  if (!sbl_std.empty()) {
    std::nth_element(sbl_std.begin(), sbl_std.begin() + sbl_std.size() / 2,
                     sbl_std.end());
    out << "  SBL fixes within 100 m: "
        << 100.0 * sbl_in_range / static_cast<double>(sbl_std.size())
        << "%, median std " << sbl_std[sbl_std.size() / 2] << " m\n";
  }
  if (!modes.empty()) {
    out << "  tracker transitions:";
    for (const auto& [mode, n] : modes) {
      out << ' ' << mode << " x" << n;
    }
    out << "\n";
  }
  return out.str();
}

std::string summarize_asc(const fs::path& path, const std::string& truth) {
  std::ifstream in(path);
  std::string key;
  long ncols = 0, nrows = 0;
  double cellsize = 0.0, nodata = -9999.0, xll = 0.0, yll = 0.0;
  for (int i = 0; i < 6; ++i) {
    std::string value;
    in >> key >> value;
    if (key == "ncols") ncols = std::stol(value);
    if (key == "nrows") nrows = std::stol(value);
    if (key == "cellsize") cellsize = std::stod(value);
    if (key == "xllcorner") xll = std::stod(value);
    if (key == "yllcorner") yll = std::stod(value);
    if (key == "NODATA_value") nodata = std::stod(value);
  }
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(std::max(0L, nrows * ncols)));
  double v;
  while (in >> v) values.push_back(v);

  long populated = 0;
  for (double x : values) {
    if (x != nodata) ++populated;
  }
  std::ostringstream out;
  out << path.string() << ": " << nrows << " x " << ncols << " grid at "
      << cellsize << " m\n";
  if (!values.empty()) {
    out << "  populated: " << populated << "/" << values.size() << " cells ("
        << 100.0 * populated / static_cast<double>(values.size()) << "%)\n";
  } else {
    out << "  populated: 0 cells (coverage 0%)\n";
  }
  if (!truth.empty() && populated > 0 &&
      values.size() == static_cast<std::size_t>(nrows * ncols)) {
    const auto seabed = sim::SeabedModel::from_json_file(truth);
    double acc = 0.0;
    long n = 0;
    for (long row = 0; row < nrows; ++row) {
      for (long col = 0; col < ncols; ++col) {
        // Rows are written north-down; row 0 of the file is the top.
        const double depth = values[row * ncols + col];
        if (depth == nodata) continue;
        const double e = xll + (col + 0.5) * cellsize;
        const double nn = yll + (nrows - 1 - row + 0.5) * cellsize;
        const double err = depth - seabed.depth_at(e, nn);
        acc += err * err;
        ++n;
      }
    }
    out << "  RMSE vs truth: " << std::sqrt(acc / n) << " m over " << n
        << " cells\n";
  }
  return out.str();
}

std::string summarize_plan(const fs::path& path) {
  const auto plan = mission::plan_from_geojson_file(path.string());
  const auto spec = mission::sampling_spec(plan, 5.0);
  std::ostringstream out;
  out << path.string() << ": mission plan\n";
  out << "  transects: " << plan.transect_count << " x "
      << plan.transect_length_m << " m, spacing " << plan.transect_spacing_m
      << " m\n";
  out << "  along-track spacing: " << spec.along_track_m << " m at "
      << plan.cruise_speed_mps << " m/s, " << plan.sample_rate_hz << " Hz\n";
  out << "  estimated duration (10 s turns): "
      << mission::estimate_duration_s(plan, 10.0) / 60.0 << " min\n";
  return out.str();
}

int cmd_report(RunContext& ctx, const std::vector<std::string>& inputs,
               const std::string& truth, bool html) {
  if (inputs.empty()) {
    throw std::runtime_error("report: needs at least one artifact");
  }
  if (!truth.empty()) {
    ctx.note_input(truth);
  }
  std::ostringstream body;
  for (const auto& input : inputs) {
    const fs::path path(input);
    ctx.note_input(input);
    const std::string ext = path.extension().string();
    if (ext == ".svlog") {
      body << summarize_svlog(path);
    } else if (ext == ".asc") {
      body << summarize_asc(path, truth);
    } else if (ext == ".geojson") {
      body << summarize_plan(path);
    } else {
      throw std::runtime_error("report: unknown artifact type: " + input);
    }
  }
  std::cout << body.str();
  if (html) {
    fs::create_directories(ctx.out_dir);
    const fs::path out = ctx.out_path("report.html");
    std::ostringstream page;
    page << "<!doctype html><html><head><meta charset=\"utf-8\">"
         << "<title>asvkit report</title></head><body><pre>\n"
         << body.str() << "</pre></body></html>\n";
    save_text(out, page.str());
    ctx.outputs.push_back(out.string());
    std::cout << "wrote " << out.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shallow-water ASV survey toolkit"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "read default option values from a file");
  app.require_subcommand(1);

  RunContext ctx;
  app.add_option("--out-dir", ctx.out_dir, "directory for outputs")
      ->capture_default_str();
  app.add_option("--seed", ctx.seed, "random seed for simulations")
      ->capture_default_str();
  app.add_option("--log-level", ctx.log_level, "quiet|info|debug")
      ->capture_default_str();

  // plan
  auto* plan = app.add_subcommand("plan", "generate a lawnmower mission");
  std::string center = "-22.340984,40.337634";
  double width = 49.0, length = 115.0, bearing = 0.0, spacing = 2.0,
         speed = 1.0, rate = 2.0;
  bool force_speed = false;
  plan->add_option("--center", center, "area center 'lat,lon'")
      ->capture_default_str();
  plan->add_option("--width", width, "meters")->capture_default_str();
  plan->add_option("--length", length, "meters")->capture_default_str();
  plan->add_option("--bearing", bearing, "length-axis bearing, deg")
      ->capture_default_str();
  plan->add_option("--spacing", spacing, "transect spacing, m")
      ->capture_default_str();
  plan->add_option("--speed", speed, "cruise speed, m/s")
      ->capture_default_str();
  plan->add_option("--rate", rate, "depth sampling rate, Hz")
      ->capture_default_str();
  plan->add_flag("--force-speed", force_speed,
                 "allow speeds outside 0.5..1.2 m/s");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run a survey simulation");
  std::string plan_path, seabed_path, sim_out = "survey.svlog";
  double wave_roll = 4.0, wave_pitch = 3.0, gust_p = 0.01, draw = 70.0;
  bool noiseless = false;
  simulate->add_option("--plan", plan_path, "plan GeoJSON")->required();
  simulate->add_option("--seabed", seabed_path, "seabed spec JSON");
  simulate->add_option("--out", sim_out, "output log name")
      ->capture_default_str();
  simulate->add_option("--wave-roll", wave_roll, "roll amplitude, deg")
      ->capture_default_str();
  simulate->add_option("--wave-pitch", wave_pitch, "pitch amplitude, deg")
      ->capture_default_str();
  simulate->add_option("--gust-probability", gust_p, "per 0.1 s step")
      ->capture_default_str();
  simulate->add_option("--draw", draw, "average power draw, W")
      ->capture_default_str();
  simulate->add_flag("--noiseless", noiseless, "disable all sensor noise");

  // track-sim
  auto* track = app.add_subcommand("track-sim", "closed-loop tracking run");
  std::string profile = "dive_cycle", track_out = "tracking.svlog";
  double duration = 1500.0, beacon_speed = 0.8, threshold = 5.0,
         loop_period = 1.0;
  track->add_option("--beacon-profile", profile,
                    "stationary|random_walk|dive_cycle, or a CSV file of "
                    "t,east,north,up rows")
      ->capture_default_str();
  track->add_option("--duration", duration, "seconds")->capture_default_str();
  track->add_option("--beacon-speed", beacon_speed, "m/s")
      ->capture_default_str();
  track->add_option("--threshold", threshold, "follow threshold, m")
      ->capture_default_str();
  track->add_option("--loop-period", loop_period, "controller period, s")
      ->capture_default_str();
  track->add_option("--out", track_out, "output log name")
      ->capture_default_str();

  // sbl-solve
  auto* solve = app.add_subcommand("sbl-solve", "solve raw TOA records");
  std::string solve_in, solve_out = "fixes.csv";
  double max_range = 100.0, sound_speed = 1530.0;
  solve->add_option("--in", solve_in, "input .svlog")->required();
  solve->add_option("--out", solve_out, "output CSV name")
      ->capture_default_str();
  solve->add_option("--max-range", max_range, "m")->capture_default_str();
  solve->add_option("--sound-speed", sound_speed, "m/s")
      ->capture_default_str();

  // process-bathy
  auto* bathy_cmd = app.add_subcommand("process-bathy",
                                       "run the correction pipeline");
  std::string bathy_in, bathy_out = "grid.asc", method = "mean";
  double cell = 0.5, max_angle = 10.0, band = 0.0, immersion = 0.1,
         datum = 0.0, geoid = 0.0;
  int window = 9;
  bool with_xyz = false, with_ply = false, with_rejected = false;
  bathy_cmd->add_option("--in", bathy_in, "input .svlog")->required();
  bathy_cmd->add_option("--cell", cell, "grid cell size, m")
      ->capture_default_str();
  bathy_cmd->add_option("--method", method, "mean|idw")
      ->check(CLI::IsMember({"mean", "idw"}))
      ->capture_default_str();
  bathy_cmd->add_option("--max-angle", max_angle,
                        "attitude rejection threshold, deg")
      ->capture_default_str();
  bathy_cmd->add_option("--window", window, "median filter window")
      ->capture_default_str();
  bathy_cmd->add_option("--band", band,
                        "median filter band, m (0 = MAD-based)")
      ->capture_default_str();
  bathy_cmd->add_option("--immersion", immersion, "transducer depth, m")
      ->capture_default_str();
  bathy_cmd->add_option("--datum", datum, "datum offset, m")
      ->capture_default_str();
  bathy_cmd->add_option("--geoid", geoid, "geoid undulation, m")
      ->capture_default_str();
  bathy_cmd->add_option("--out", bathy_out, "output ESRI ASCII name")
      ->capture_default_str();
  bathy_cmd->add_flag("--xyz", with_xyz, "also write soundings.xyz.csv");
  bathy_cmd->add_flag("--ply", with_ply, "also write tin.ply");
  bathy_cmd->add_flag("--rejected-geojson", with_rejected,
                      "also write rejected.geojson");

  // check-overlap
  auto* overlap = app.add_subcommand("check-overlap",
                                     "photogrammetric coverage check");
  std::string overlap_in, overlap_out = "coverage.asc",
              gaps_out = "gaps.geojson";
  double fov_water = 60.0, vfov_water = 45.0, interval = 0.5, depth = 3.0,
         target = 0.7;
  overlap->add_option("--in", overlap_in, "input .svlog")->required();
  overlap->add_option("--fov-water", fov_water, "horizontal in-water FOV, deg")
      ->capture_default_str();
  overlap->add_option("--vfov-water", vfov_water,
                      "vertical in-water FOV, deg")
      ->capture_default_str();
  overlap->add_option("--interval", interval, "frame interval, s")
      ->capture_default_str();
  overlap->add_option("--depth", depth, "seabed depth, m")
      ->capture_default_str();
  overlap->add_option("--target", target, "target overlap fraction")
      ->capture_default_str();
  overlap->add_option("--out", overlap_out, "coverage grid name")
      ->capture_default_str();
  overlap->add_option("--gaps", gaps_out, "gap polygons name ('' = none)")
      ->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "summarize artifacts");
  std::vector<std::string> report_inputs;
  std::string truth_path;
  bool html = false;
  report->add_option("--in", report_inputs, "artifacts to summarize")
      ->required();
  report->add_option("--truth", truth_path,
                     "seabed spec JSON; adds grid RMSE vs truth");
  report->add_flag("--html", html, "also write report.html");

  CLI11_PARSE(app, argc, argv);

  try {
    int rc = 1;
    if (*plan) {
      ctx.subcommand = "plan";
      ctx.params = {{"center", center},       {"width", width},
                    {"length", length},       {"bearing", bearing},
                    {"spacing", spacing},     {"speed", speed},
                    {"rate", rate},           {"force_speed", force_speed}};
      rc = cmd_plan(ctx, center, width, length, bearing, spacing, speed, rate,
                    force_speed);
    } else if (*simulate) {
      ctx.subcommand = "simulate";
      ctx.params = {{"plan", plan_path},     {"seabed", seabed_path},
                    {"out", sim_out},        {"wave_roll", wave_roll},
                    {"wave_pitch", wave_pitch}, {"gust_probability", gust_p},
                    {"draw", draw},          {"noiseless", noiseless}};
      rc = cmd_simulate(ctx, plan_path, seabed_path, sim_out, wave_roll,
                        wave_pitch, gust_p, draw, noiseless);
    } else if (*track) {
      ctx.subcommand = "track-sim";
      ctx.params = {{"beacon_profile", profile},
                    {"duration", duration},
                    {"beacon_speed", beacon_speed},
                    {"threshold", threshold},
                    {"loop_period", loop_period},
                    {"out", track_out}};
      rc = cmd_track_sim(ctx, profile, duration, beacon_speed, threshold,
                         loop_period, track_out);
    } else if (*solve) {
      ctx.subcommand = "sbl-solve";
      ctx.params = {{"in", solve_in},
                    {"out", solve_out},
                    {"max_range", max_range},
                    {"sound_speed", sound_speed}};
      rc = cmd_sbl_solve(ctx, solve_in, solve_out, max_range, sound_speed);
    } else if (*bathy_cmd) {
      ctx.subcommand = "process-bathy";
      ctx.params = {{"in", bathy_in},     {"cell", cell},
                    {"method", method},   {"max_angle", max_angle},
                    {"window", window},   {"band", band},
                    {"immersion", immersion}, {"datum", datum},
                    {"geoid", geoid},     {"out", bathy_out}};
      rc = cmd_process_bathy(ctx, bathy_in, cell, method, max_angle, window,
                             band, immersion, datum, geoid, bathy_out,
                             with_xyz, with_ply, with_rejected);
    } else if (*overlap) {
      ctx.subcommand = "check-overlap";
      ctx.params = {{"in", overlap_in},   {"fov_water", fov_water},
                    {"vfov_water", vfov_water}, {"interval", interval},
                    {"depth", depth},     {"target", target},
                    {"out", overlap_out}, {"gaps", gaps_out}};
      rc = cmd_check_overlap(ctx, overlap_in, fov_water, vfov_water, interval,
                             depth, target, overlap_out, gaps_out);
    } else if (*report) {
      ctx.subcommand = "report";
      ctx.params = {{"in", report_inputs}, {"truth", truth_path},
                    {"html", html}};
      rc = cmd_report(ctx, report_inputs, truth_path, html);
    }
    if (rc == 0) {
      ctx.write_manifest();
    }
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

#include "asvkit/logfmt.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace asv::logfmt {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(GpsFixType t) {
  switch (t) {
    case GpsFixType::NONE: return "NONE";
    case GpsFixType::FIX_3D: return "3D";
    case GpsFixType::RTK_FLOAT: return "RTK_FLOAT";
    case GpsFixType::RTK_FIXED: return "RTK_FIXED";
  }
  return "NONE";
}

GpsFixType gps_fix_from_string(std::string_view s) {
  if (s == "NONE") return GpsFixType::NONE;
  if (s == "3D") return GpsFixType::FIX_3D;
  if (s == "RTK_FLOAT") return GpsFixType::RTK_FLOAT;
  if (s == "RTK_FIXED") return GpsFixType::RTK_FIXED;
  throw std::invalid_argument("unknown GPS fix type: " + std::string(s));
}

double record_time(const LogRecord& r) {
  return std::visit([](const auto& rec) { return rec.t; }, r);
}

bool OpaqueRecord::operator==(const OpaqueRecord& o) const {
  if (t != o.t || tag != o.tag) return false;
  if (payload == o.payload) return true;
  // Compare at the value level; formatting differences do not matter.
  const auto a = ordered_json::parse(payload, nullptr, false);
  const auto b = ordered_json::parse(o.payload, nullptr, false);
  return !a.is_discarded() && !b.is_discarded() && a == b;
}

std::string_view record_tag(const LogRecord& r) {
  struct Tag {
    std::string_view operator()(const AttRecord&) const { return "ATT"; }
    std::string_view operator()(const GpsRecord&) const { return "GPS"; }
    std::string_view operator()(const DepthRecord&) const { return "DPTH"; }
    std::string_view operator()(const SblRecord&) const { return "SBL"; }
    std::string_view operator()(const BatteryRecord&) const { return "BAT"; }
    std::string_view operator()(const ToaRecord&) const { return "TOA"; }
    std::string_view operator()(const OpaqueRecord& o) const { return o.tag; }
  };
  return std::visit(Tag{}, r);
}

bool operator==(const SurveyLog& a, const SurveyLog& b) {
  auto arm_eq = [](const std::map<std::string, geo::LeverArm>& x,
                   const std::map<std::string, geo::LeverArm>& y) {
    if (x.size() != y.size()) return false;
    for (const auto& [k, v] : x) {
      auto it = y.find(k);
      if (it == y.end() || it->second.offset != v.offset) return false;
    }
    return true;
  };
  const auto& ha = a.header;
  const auto& hb = b.header;
  return ha.schema_version == hb.schema_version &&
         ha.survey_id == hb.survey_id &&
         ha.origin.latitude_deg == hb.origin.latitude_deg &&
         ha.origin.longitude_deg == hb.origin.longitude_deg &&
         ha.origin.height_m == hb.origin.height_m &&
         ha.started_at_utc == hb.started_at_utc &&
         arm_eq(ha.lever_arms, hb.lever_arms) && a.records == b.records;
}

namespace {

constexpr double kTwoPi = 2.0 * geo::kPi;

void check_finite_time(double t, std::size_t idx) {
  if (!(std::isfinite(t) && t >= 0.0)) {
    throw ValidationError("record " + std::to_string(idx) +
                          ": timestamp must be finite and >= 0");
  }
}

void validate_record(const LogRecord& r, std::size_t idx) {
  check_finite_time(record_time(r), idx);
  const std::string where = "record " + std::to_string(idx);
  if (const auto* d = std::get_if<DepthRecord>(&r)) {
    if (!(d->raw_depth > 0.0 && d->raw_depth <= 50.0)) {
      throw ValidationError(where + " (DPTH t=" + std::to_string(d->t) +
                            "): raw_depth must be in (0, 50] m, got " +
                            std::to_string(d->raw_depth));
    }
  } else if (const auto* b = std::get_if<BatteryRecord>(&r)) {
    if (!(b->voltage > 0.0 && b->voltage < 30.0)) {
      throw ValidationError(where + " (BAT): voltage must be in (0, 30) V");
    }
  } else if (const auto* g = std::get_if<GpsRecord>(&r)) {
    if (!g->position.valid()) {
      throw ValidationError(where + " (GPS): coordinates out of range");
    }
    if (!(std::isfinite(g->hdop) && g->hdop >= 0.0)) {
      throw ValidationError(where + " (GPS): hdop must be >= 0");
    }
  } else if (const auto* a = std::get_if<AttRecord>(&r)) {
    if (!(a->roll > -geo::kPi - 1e-12 && a->roll <= geo::kPi + 1e-12 &&
          a->pitch > -geo::kPi - 1e-12 && a->pitch <= geo::kPi + 1e-12 &&
          a->yaw >= 0.0 && a->yaw < kTwoPi)) {
      throw ValidationError(where + " (ATT): attitude angles out of range");
    }
  } else if (const auto* s = std::get_if<SblRecord>(&r)) {
    if (!(std::isfinite(s->rel_x) && std::isfinite(s->rel_y) &&
          std::isfinite(s->rel_z) && std::isfinite(s->std_m) &&
          s->std_m >= 0.0)) {
      throw ValidationError(where + " (SBL): non-finite fields or std < 0");
    }
  } else if (const auto* toa = std::get_if<ToaRecord>(&r)) {
    for (double v : toa->arrival_s) {
      if (!(std::isfinite(v) && v > 0.0)) {
        throw ValidationError(where + " (TOA): arrival times must be > 0");
      }
    }
    if (!(toa->sound_speed >= 1400.0 && toa->sound_speed <= 1600.0)) {
      throw ValidationError(where +
                            " (TOA): sound speed must be in [1400, 1600]");
    }
  } else if (const auto* o = std::get_if<OpaqueRecord>(&r)) {
    if (ordered_json::parse(o->payload, nullptr, false).is_discarded()) {
      throw ValidationError(where + " (" + o->tag +
                            "): payload is not valid JSON");
    }
  }
}

ordered_json record_to_json(const LogRecord& r) {
  struct ToJson {
    ordered_json operator()(const AttRecord& a) const {
      return {{"type", "ATT"},
              {"t", a.t},
              {"roll", a.roll},
              {"pitch", a.pitch},
              {"yaw", a.yaw}};
    }
    ordered_json operator()(const GpsRecord& g) const {
      return {{"type", "GPS"},
              {"t", g.t},
              {"lat", g.position.latitude_deg},
              {"lon", g.position.longitude_deg},
              {"height", g.position.height_m},
              {"fix", std::string(to_string(g.fix_type))},
              {"hdop", g.hdop}};
    }
    ordered_json operator()(const DepthRecord& d) const {
      return {{"type", "DPTH"}, {"t", d.t}, {"depth", d.raw_depth}};
    }
    ordered_json operator()(const SblRecord& s) const {
      return {{"type", "SBL"}, {"t", s.t},     {"x", s.rel_x},
              {"y", s.rel_y},  {"z", s.rel_z}, {"std", s.std_m}};
    }
    ordered_json operator()(const BatteryRecord& b) const {
      return {{"type", "BAT"},
              {"t", b.t},
              {"voltage", b.voltage},
              {"current", b.current}};
    }
    ordered_json operator()(const ToaRecord& toa) const {
      return {{"type", "TOA"},
              {"t", toa.t},
              {"toa", toa.arrival_s},
              {"c", toa.sound_speed}};
    }
    ordered_json operator()(const OpaqueRecord& o) const {
      return ordered_json::parse(o.payload);
    }
  };
  return std::visit(ToJson{}, r);
}

double require_number(const ordered_json& j, const char* key,
                      std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw ParseError(line, std::string("missing or non-numeric field '") +
                               key + "'");
  }
  return it->get<double>();
}

LogRecord record_from_json(const ordered_json& j, std::size_t line) {
  auto type_it = j.find("type");
  if (type_it == j.end() || !type_it->is_string()) {
    throw ParseError(line, "record has no string 'type' field");
  }
  const std::string type = type_it->get<std::string>();
  const double t = require_number(j, "t", line);
  if (type == "ATT") {
    return AttRecord{t, require_number(j, "roll", line),
                     require_number(j, "pitch", line),
                     require_number(j, "yaw", line)};
  }
  if (type == "GPS") {
    GpsRecord g;
    g.t = t;
    g.position = {require_number(j, "lat", line),
                  require_number(j, "lon", line),
                  require_number(j, "height", line)};
    auto fix_it = j.find("fix");
    if (fix_it == j.end() || !fix_it->is_string()) {
      throw ParseError(line, "GPS record missing string 'fix'");
    }
    try {
      g.fix_type = gps_fix_from_string(fix_it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, e.what());
    }
    g.hdop = require_number(j, "hdop", line);
    return g;
  }
  if (type == "DPTH") {
    return DepthRecord{t, require_number(j, "depth", line)};
  }
  if (type == "SBL") {
    return SblRecord{t, require_number(j, "x", line),
                     require_number(j, "y", line),
                     require_number(j, "z", line),
                     require_number(j, "std", line)};
  }
  if (type == "BAT") {
    return BatteryRecord{t, require_number(j, "voltage", line),
                         require_number(j, "current", line)};
  }
  if (type == "TOA") {
    ToaRecord rec;
    rec.t = t;
    auto toa_it = j.find("toa");
    if (toa_it == j.end() || !toa_it->is_array() || toa_it->size() != 4) {
      throw ParseError(line, "TOA record needs a 4-element 'toa' array");
    }
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(*toa_it)[i].is_number()) {
        throw ParseError(line, "TOA arrival times must be numbers");
      }
      rec.arrival_s[i] = (*toa_it)[i].get<double>();
    }
    rec.sound_speed = require_number(j, "c", line);
    return rec;
  }
  // Unknown tag: preserve the whole object.
  return OpaqueRecord{t, type, j.dump()};
}

ordered_json header_to_json(const LogHeader& h) {
  ordered_json arms = ordered_json::object();
  for (const auto& [name, arm] : h.lever_arms) {
    arms[name] = {arm.offset.x(), arm.offset.y(), arm.offset.z()};
  }
  return {{"type", "header"},
          {"version", h.schema_version},
          {"survey_id", h.survey_id},
          {"origin",
           {{"lat", h.origin.latitude_deg},
            {"lon", h.origin.longitude_deg},
            {"height", h.origin.height_m}}},
          {"lever_arms", arms},
          {"started_at", h.started_at_utc}};
}

LogHeader header_from_json(const ordered_json& j, std::size_t line) {
  LogHeader h;
  auto ver = j.find("version");
  if (ver == j.end() || !ver->is_number_integer()) {
    throw ParseError(line, "header missing integer 'version'");
  }
  h.schema_version = ver->get<int>();
  auto id = j.find("survey_id");
  if (id == j.end() || !id->is_string()) {
    throw ParseError(line, "header missing string 'survey_id'");
  }
  h.survey_id = id->get<std::string>();
  auto origin = j.find("origin");
  if (origin == j.end() || !origin->is_object()) {
    throw ParseError(line, "header missing 'origin' object");
  }
  h.origin = {require_number(*origin, "lat", line),
              require_number(*origin, "lon", line),
              require_number(*origin, "height", line)};
  if (!h.origin.valid()) {
    throw ValidationError("header origin coordinates out of range");
  }
  auto arms = j.find("lever_arms");
  if (arms != j.end()) {
    if (!arms->is_object()) {
      throw ParseError(line, "'lever_arms' must be an object");
    }
    for (auto it = arms->begin(); it != arms->end(); ++it) {
      if (!it->is_array() || it->size() != 3 || !(*it)[0].is_number() ||
          !(*it)[1].is_number() || !(*it)[2].is_number()) {
        throw ParseError(line, "lever arm '" + it.key() +
                                   "' must be a 3-element numeric array");
      }
      geo::LeverArm arm;
      arm.offset = Eigen::Vector3d((*it)[0].get<double>(),
                                   (*it)[1].get<double>(),
                                   (*it)[2].get<double>());
      if (arm.offset.norm() >= 5.0) {
        throw ValidationError("lever arm '" + it.key() +
                              "' exceeds the 5 m board-scale bound");
      }
      h.lever_arms[it.key()] = arm;
    }
  }
  auto started = j.find("started_at");
  if (started != j.end() && started->is_string()) {
    h.started_at_utc = started->get<std::string>();
  }
  return h;
}

}  // namespace

void validate(const SurveyLog& log) {
  if (!log.header.origin.valid()) {
    throw ValidationError("header origin coordinates out of range");
  }
  for (const auto& [name, arm] : log.header.lever_arms) {
    if (!(arm.offset.allFinite() && arm.offset.norm() < 5.0)) {
      throw ValidationError("lever arm '" + name +
                            "' exceeds the 5 m board-scale bound");
    }
  }
  std::string out_of_order;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    validate_record(log.records[i], i);
    if (i > 0 &&
        record_time(log.records[i]) < record_time(log.records[i - 1])) {
      out_of_order += (out_of_order.empty() ? "" : ", ") + std::to_string(i);
    }
  }
  if (!out_of_order.empty()) {
    throw ValidationError("records out of timestamp order at indices: " +
                          out_of_order);
  }
}

std::size_t write_log(const SurveyLog& log, std::ostream& sink) {
  validate(log);
  std::size_t bytes = 0;
  auto put_line = [&](const std::string& s) {
    sink << s << '\n';
    bytes += s.size() + 1;
  };
  put_line(header_to_json(log.header).dump());
  for (const auto& r : log.records) {
    put_line(record_to_json(r).dump());
  }
  if (!sink) {
    throw std::runtime_error("write_log: sink I/O failure");
  }
  return bytes;
}

std::string write_log_string(const SurveyLog& log) {
  std::ostringstream out;
  write_log(log, out);
  return out.str();
}

SurveyLog read_log(std::istream& source) {
  SurveyLog log;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (!j.is_object()) {
      throw ParseError(line_no, "each line must be a JSON object");
    }
    auto type_it = j.find("type");
    const bool is_header =
        type_it != j.end() && type_it->is_string() &&
        type_it->get<std::string>() == "header";
    if (!have_header) {
      if (!is_header) {
        throw ValidationError("first record must be the header line");
      }
      log.header = header_from_json(j, line_no);
      have_header = true;
      continue;
    }
    if (is_header) {
      throw ValidationError("duplicate header at line " +
                            std::to_string(line_no));
    }
    log.records.push_back(record_from_json(j, line_no));
  }
  if (!have_header) {
    throw ValidationError("log has no header line");
  }
  validate(log);
  return log;
}

SurveyLog read_log_string(const std::string& text) {
  std::istringstream in(text);
  return read_log(in);
}

SurveyLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open log file: " + path);
  }
  return read_log(in);
}

void write_log_file(const SurveyLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open log file for writing: " + path);
  }
  write_log(log, out);
}

std::vector<LogRecord> extract_channel(const SurveyLog& log,
                                       std::string_view tag, double t0,
                                       double t1) {
  if (t0 > t1) {
    throw std::invalid_argument("extract_channel: t0 must be <= t1");
  }
  std::vector<LogRecord> out;
  for (const auto& r : log.records) {
    const double t = record_time(r);
    if (t >= t0 && t <= t1 && record_tag(r) == tag) {
      out.push_back(r);
    }
  }
  return out;
}

}  // namespace asv::logfmt

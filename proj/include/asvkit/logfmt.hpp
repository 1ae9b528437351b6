// Survey-log record stream (.svlog): newline-delimited JSON, one record per
// line, header line first. Timestamps are seconds since survey start; UTC
// wall clock lives only in the header. Unknown record tags are preserved as
// opaque records so logs from newer producers still parse.
#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "asvkit/geo.hpp"

namespace asv::logfmt {

enum class GpsFixType { NONE, FIX_3D, RTK_FLOAT, RTK_FIXED };

std::string_view to_string(GpsFixType t);
GpsFixType gps_fix_from_string(std::string_view s);

struct AttRecord {
  double t = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  bool operator==(const AttRecord&) const = default;
};

struct GpsRecord {
  double t = 0.0;
  geo::GeoPoint position;
  GpsFixType fix_type = GpsFixType::FIX_3D;
  double hdop = 1.0;
  bool operator==(const GpsRecord& o) const {
    return t == o.t && position.latitude_deg == o.position.latitude_deg &&
           position.longitude_deg == o.position.longitude_deg &&
           position.height_m == o.position.height_m && fix_type == o.fix_type &&
           hdop == o.hdop;
  }
};

struct DepthRecord {
  double t = 0.0;
  double raw_depth = 0.0;  // meters, positive down, (0, 50]
  bool operator==(const DepthRecord&) const = default;
};

/// Solved acoustic fix relative to the vehicle frame (forward, starboard, down).
struct SblRecord {
  double t = 0.0;
  double rel_x = 0.0;
  double rel_y = 0.0;
  double rel_z = 0.0;
  double std_m = 0.0;
  bool operator==(const SblRecord&) const = default;
};

struct BatteryRecord {
  double t = 0.0;
  double voltage = 0.0;  // volts, (0, 30)
  double current = 0.0;  // amperes
  bool operator==(const BatteryRecord&) const = default;
};

/// Raw acoustic arrival times for one ping, one value per receiver.
struct ToaRecord {
  double t = 0.0;
  std::array<double, 4> arrival_s{};
  double sound_speed = 1530.0;
  bool operator==(const ToaRecord&) const = default;
};

/// Record with an unrecognized tag, preserved verbatim at the value level.
struct OpaqueRecord {
  double t = 0.0;
  std::string tag;
  std::string payload;  // full record object as JSON text
  bool operator==(const OpaqueRecord& o) const;
};

using LogRecord = std::variant<AttRecord, GpsRecord, DepthRecord, SblRecord,
                               BatteryRecord, ToaRecord, OpaqueRecord>;

double record_time(const LogRecord& r);
std::string_view record_tag(const LogRecord& r);

struct LogHeader {
  int schema_version = 1;
  std::string survey_id;
  geo::GeoPoint origin;
  std::map<std::string, geo::LeverArm> lever_arms;  // sensor name -> offset
  std::string started_at_utc;                       // ISO-8601
};

struct SurveyLog {
  LogHeader header;
  std::vector<LogRecord> records;
};

bool operator==(const SurveyLog& a, const SurveyLog& b);

/// Malformed input: bad JSON, bad field types. Carries the 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Structurally sound input that violates a log invariant.
class ValidationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Throws ValidationError if any record violates its invariants or the
/// stream is not time-ordered.
void validate(const SurveyLog& log);

/// Serialize; header line first, then records. Returns bytes written.
std::size_t write_log(const SurveyLog& log, std::ostream& sink);
std::string write_log_string(const SurveyLog& log);

/// Parse and validate. Throws ParseError or ValidationError; never crashes
/// on arbitrary bytes.
SurveyLog read_log(std::istream& source);
SurveyLog read_log_string(const std::string& text);
SurveyLog read_log_file(const std::string& path);
void write_log_file(const SurveyLog& log, const std::string& path);

/// Order-preserving subsequence of records with the given tag inside
/// [t0, t1]. Throws std::invalid_argument if t0 > t1.
std::vector<LogRecord> extract_channel(const SurveyLog& log,
                                       std::string_view tag, double t0,
                                       double t1);

}  // namespace asv::logfmt

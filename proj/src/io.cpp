#include "extrinsic/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

namespace extrinsic::io {

using nlohmann::json;

namespace {

constexpr std::string_view kMarkerLogSchema = "extrinsic.marker_log";
constexpr std::string_view kMotionSchema = "extrinsic.motion_sequence";
constexpr std::string_view kReportSchema = "extrinsic.estimate_report";
constexpr std::string_view kScenarioSchema = "extrinsic.scenario";
constexpr std::string_view kTruthSchema = "extrinsic.truth";

// ---------------------------------------------------------------- writing

std::string json_string(std::string_view s) { return json(std::string(s)).dump(); }

std::string vec3(const Eigen::Vector3d& v) {
  return "[" + format_number(v.x()) + ", " + format_number(v.y()) + ", " + format_number(v.z()) + "]";
}

std::string matrix3(const Eigen::Matrix3d& m, const std::string& indent) {
  std::string out = "[\n";
  for (int r = 0; r < 3; ++r) {
    out += indent + "  " + vec3(m.row(r).transpose()) + (r < 2 ? ",\n" : "\n");
  }
  return out + indent + "]";
}

std::string header(std::string_view schema) {
  return "{\n  \"schema\": " + json_string(schema) + ",\n  \"schema_version\": " + json_string(kSchemaVersion) + ",\n";
}

std::string motions_array(const MotionSequenced& motions, const std::string& indent) {
  std::string out = "[\n";
  for (std::size_t k = 0; k < motions.size(); ++k) {
    const auto& m = motions[k];
    out += indent + "  {\n";
    out += indent + "    \"frame_index\": " + std::to_string(m.frame_index()) + ",\n";
    out += indent + "    \"rotation\": " + matrix3(m.rotation(), indent + "    ") + ",\n";
    out += indent + "    \"translation\": " + vec3(m.translation()) + "\n";
    out += indent + "  }" + (k + 1 < motions.size() ? ",\n" : "\n");
  }
  return out + indent + "]";
}

std::string contact_object(const sim::ContactGeometry& contact) {
  return std::visit(
      [](const auto& c) -> std::string {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, sim::FixedPointContact>) {
          return "{\"type\": \"fixed_point\", \"point\": " + vec3(c.point) + "}";
        } else if constexpr (std::is_same_v<T, sim::FixedDirectionContact>) {
          return "{\"type\": \"fixed_direction\", \"axis\": " + vec3(c.axis) + "}";
        } else {
          return "{\"type\": \"line_contact\", \"direction\": " + vec3(c.direction) + ", \"point\": " +
                 vec3(c.point) + ", \"n0\": " + vec3(c.n0) + "}";
        }
      },
      contact);
}

// ---------------------------------------------------------------- parsing

// Rewrites bare NaN / Infinity / -Infinity tokens outside strings as quoted
// strings so the strict JSON parser accepts them. `inserted_at` records the
// rewritten-text offsets where two quote characters were added.
std::string quote_nonfinite_tokens(std::string_view text, std::vector<std::size_t>& inserted_at) {
  static constexpr std::array<std::string_view, 3> kTokens = {"-Infinity", "Infinity", "NaN"};
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (std::size_t i = 0; i < text.size();) {
    const char ch = text[i];
    if (in_string) {
      out += ch;
      if (ch == '\\' && i + 1 < text.size()) {
        out += text[i + 1];
        i += 2;
        continue;
      }
      if (ch == '"') in_string = false;
      ++i;
      continue;
    }
    if (ch == '"') {
      in_string = true;
      out += ch;
      ++i;
      continue;
    }
    bool replaced = false;
    for (std::string_view token : kTokens) {
      if (text.substr(i, token.size()) == token) {
        inserted_at.push_back(out.size());
        out += '"';
        out += token;
        out += '"';
        i += token.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) {
      out += ch;
      ++i;
    }
  }
  return out;
}

json parse_json(std::string_view text) {
  std::vector<std::size_t> inserted_at;
  const std::string rewritten = quote_nonfinite_tokens(text, inserted_at);
  try {
    return json::parse(rewritten);
  } catch (const json::parse_error& e) {
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    std::size_t shift = 0;
    for (std::size_t pos : inserted_at) {
      if (pos < offset) shift += 2;
    }
    offset = std::min(offset - std::min(offset, shift), text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    // Drop the parser's own position, which refers to the rewritten text.
    std::string detail = e.what();
    if (const auto at = detail.find("parse error"); at != std::string::npos) {
      if (const auto colon = detail.find(": ", at); colon != std::string::npos) detail.erase(0, colon + 2);
    }
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                           " (offset " + std::to_string(offset) + "): " + detail);
  }
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ParseError, where + ": " + what);
}

const json& field(const json& obj, std::string_view key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) fail(where, "missing field \"" + std::string(key) + "\"");
  return *it;
}

const json* optional_field(const json& obj, std::string_view key) {
  const auto it = obj.find(std::string(key));
  return it == obj.end() ? nullptr : &*it;
}

// Numbers, or the strings "NaN" / "Infinity" / "-Infinity".
double number(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  fail(where, "expected a number");
}

double finite_number(const json& j, const std::string& where) {
  const double v = number(j, where);
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, where + " is not finite");
  return v;
}

std::string string_field(const json& obj, std::string_view key, const std::string& where) {
  const json& j = field(obj, key, where);
  if (!j.is_string()) fail(where + "." + std::string(key), "expected a string");
  return j.get<std::string>();
}

std::size_t index_value(const json& j, const std::string& where) {
  if (!j.is_number_unsigned()) fail(where, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

Eigen::Vector3d vector3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected an array of three numbers");
  return {finite_number(j[0], where + "[0]"), finite_number(j[1], where + "[1]"),
          finite_number(j[2], where + "[2]")};
}

Eigen::Matrix3d matrix3_value(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected three rows");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) = vector3(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]").transpose();
  return m;
}

void check_schema(const json& root, std::string_view schema) {
  const std::string found = string_field(root, "schema", "root");
  if (found != schema) fail("root.schema", "expected \"" + std::string(schema) + "\", found \"" + found + "\"");
  const std::string version = string_field(root, "schema_version", "root");
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::SchemaVersionMismatch,
                "schema version \"" + version + "\" is not supported (expected \"" + std::string(kSchemaVersion) + "\")");
  }
}

// Rotation matrices are re-projected onto SO(3) by RelativeMotion; report
// clearly broken input as a parse error rather than silently fixing it.
RelativeMotiond motion_value(const json& j, const std::string& where) {
  const std::size_t frame_index = index_value(field(j, "frame_index", where), where + ".frame_index");
  const Eigen::Matrix3d rotation = matrix3_value(field(j, "rotation", where), where + ".rotation");
  const Eigen::Vector3d translation = vector3(field(j, "translation", where), where + ".translation");
  if ((rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).norm() > 1e-6) {
    fail(where + ".rotation", "not a rotation matrix");
  }
  try {
    return RelativeMotiond(rotation, translation, frame_index);
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

MotionSequenced motions_value(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<RelativeMotiond> motions;
  for (std::size_t k = 0; k < j.size(); ++k) {
    motions.push_back(motion_value(j[k], where + "[" + std::to_string(k) + "]"));
  }
  try {
    return MotionSequenced(std::move(motions));
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

sim::ContactGeometry contact_value(const json& j, const std::string& where) {
  const std::string type = string_field(j, "type", where);
  if (type == "fixed_point") {
    return sim::FixedPointContact{vector3(field(j, "point", where), where + ".point")};
  }
  if (type == "fixed_direction") {
    return sim::FixedDirectionContact{vector3(field(j, "axis", where), where + ".axis")};
  }
  if (type == "line_contact") {
    return sim::LineContact{vector3(field(j, "direction", where), where + ".direction"),
                            vector3(field(j, "point", where), where + ".point"),
                            vector3(field(j, "n0", where), where + ".n0")};
  }
  fail(where + ".type", "unknown contact type \"" + type + "\"");
}

double angle_value(const json& j, const std::string& where) {
  if (const json* deg = optional_field(j, "angle_deg")) {
    return finite_number(*deg, where + ".angle_deg") * std::numbers::pi / 180.0;
  }
  if (const json* rad = optional_field(j, "angle_rad")) return finite_number(*rad, where + ".angle_rad");
  fail(where, "missing field \"angle_deg\" or \"angle_rad\"");
}

ContactKind kind_value(const std::string& s, const std::string& where) {
  if (s == "point" || s == "fixed_point") return ContactKind::FixedPoint;
  if (s == "direction" || s == "fixed_direction") return ContactKind::FixedDirection;
  if (s == "line" || s == "line_contact") return ContactKind::LineContact;
  fail(where, "unknown contact type \"" + s + "\"");
}

EstimatorConfigd config_value(const json& j, EstimatorConfigd config, const std::string& where) {
  if (const json* v = optional_field(j, "angle_threshold")) config.angle_threshold = finite_number(*v, where + ".angle_threshold");
  if (const json* v = optional_field(j, "cond_threshold")) config.cond_threshold = finite_number(*v, where + ".cond_threshold");
  if (const json* v = optional_field(j, "rank_tolerance")) config.rank_tolerance = finite_number(*v, where + ".rank_tolerance");
  if (const json* v = optional_field(j, "min_frames")) config.min_frames = static_cast<int>(index_value(*v, where + ".min_frames"));
  if (const json* v = optional_field(j, "strict")) {
    if (!v->is_boolean()) fail(where + ".strict", "expected a boolean");
    config.strict = v->get<bool>();
  }
  try {
    config.validate();
  } catch (const Error& e) {
    fail(where, e.what());
  }
  return config;
}

std::string config_object(const EstimatorConfigd& c) {
  return "{\"angle_threshold\": " + format_number(c.angle_threshold) +
         ", \"cond_threshold\": " + format_number(c.cond_threshold) +
         ", \"rank_tolerance\": " + format_number(c.rank_tolerance) +
         ", \"min_frames\": " + std::to_string(c.min_frames) + ", \"strict\": " + (c.strict ? "true" : "false") + "}";
}

std::string number_or_infinity(double v) {
  if (std::isinf(v)) return v > 0 ? "\"Infinity\"" : "\"-Infinity\"";
  if (std::isnan(v)) return "\"NaN\"";
  return format_number(v);
}

}  // namespace

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;  // drop the sign of -0
  std::array<char, 32> buffer{};
  const int n = std::snprintf(buffer.data(), buffer.size(), "%.17g", value);
  return std::string(buffer.data(), static_cast<std::size_t>(n));
}

// ---------------------------------------------------------------- marker log

void MarkerLog::validate() const {
  if (frames.empty()) throw Error(ErrorCode::InvalidArgument, "marker log has no frames");
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (frames[k].frame_index() != k) {
      throw Error(ErrorCode::InvalidArgument, "frame indices must be dense from 0", k);
    }
    if (frames[k].size() != frames[0].size()) {
      throw Error(ErrorCode::MismatchedFrames, "marker count differs from frame 0", k);
    }
  }
}

std::string format_marker_log(const MarkerLog& log) {
  log.validate();
  std::string out = "{\n  \"schema\": " + json_string(kMarkerLogSchema) + ",\n  \"schema_version\": " +
                    json_string(log.schema_version) + ",\n  \"units\": " + json_string(log.units) + ",\n  \"frames\": [\n";
  for (std::size_t k = 0; k < log.frames.size(); ++k) {
    const auto& positions = log.frames[k].positions();
    out += "    {\n      \"frame_index\": " + std::to_string(log.frames[k].frame_index()) +
           ",\n      \"positions\": [\n";
    for (Eigen::Index i = 0; i < positions.cols(); ++i) {
      out += "        " + vec3(positions.col(i)) + (i + 1 < positions.cols() ? ",\n" : "\n");
    }
    out += std::string("      ]\n    }") + (k + 1 < log.frames.size() ? ",\n" : "\n");
  }
  return out + "  ]\n}\n";
}

MarkerLog parse_marker_log(std::string_view text) {
  const json root = parse_json(text);
  check_schema(root, kMarkerLogSchema);
  MarkerLog log;
  log.schema_version = string_field(root, "schema_version", "root");
  log.units = string_field(root, "units", "root");
  const json& frames = field(root, "frames", "root");
  if (!frames.is_array() || frames.empty()) fail("root.frames", "expected a non-empty array");

  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string where = "frames[" + std::to_string(k) + "]";
    const std::size_t frame_index = index_value(field(frames[k], "frame_index", where), where + ".frame_index");
    const json& positions = field(frames[k], "positions", where);
    if (!positions.is_array()) fail(where + ".positions", "expected an array");
    Matrix3X<double> matrix(3, static_cast<Eigen::Index>(positions.size()));
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const std::string marker_where = where + ".positions[" + std::to_string(i) + "]";
      const json& p = positions[i];
      if (!p.is_array() || p.size() != 3) fail(marker_where, "expected an array of three numbers");
      for (std::size_t axis = 0; axis < 3; ++axis) {
        const double v = number(p[axis], marker_where);
        if (!std::isfinite(v)) {
          throw Error(ErrorCode::NonFiniteValue,
                      "frame " + std::to_string(frame_index) + " marker " + std::to_string(i) +
                          " has a non-finite coordinate",
                      frame_index);
        }
        matrix(static_cast<Eigen::Index>(axis), static_cast<Eigen::Index>(i)) = v;
      }
    }
    log.frames.emplace_back(std::move(matrix), frame_index);
  }
  try {
    log.validate();
  } catch (const Error& e) {
    fail("root.frames", e.what());
  }
  return log;
}

MarkerLog read_marker_log(const std::filesystem::path& path) { return parse_marker_log(read_file(path)); }

void write_marker_log(const MarkerLog& log, const std::filesystem::path& path) {
  write_file(path, format_marker_log(log));
}

// ---------------------------------------------------------------- motions

std::string format_motion_sequence(const MotionSequenced& motions, std::string_view units) {
  return header(kMotionSchema) + "  \"units\": " + json_string(units) + ",\n  \"motions\": " +
         motions_array(motions, "  ") + "\n}\n";
}

MotionSequenced parse_motion_sequence(std::string_view text) {
  const json root = parse_json(text);
  check_schema(root, kMotionSchema);
  return motions_value(field(root, "motions", "root"), "motions");
}

// ---------------------------------------------------------------- reports

std::string format_estimate_report(const EstimateReport& report) {
  const auto& e = report.estimate;
  const auto& c = e.conditioning();
  std::string out = header(kReportSchema);
  out += "  \"tool_version\": " + json_string(report.tool_version) + ",\n";
  out += "  \"input_digest\": " + json_string(report.input_digest) + ",\n";
  out += "  \"estimate\": {\n    \"kind\": " + json_string(to_string(e.kind())) + ",\n";
  if (e.direction()) out += "    \"direction\": " + vec3(*e.direction()) + ",\n";
  if (e.point()) out += "    \"point\": " + vec3(*e.point()) + ",\n";
  out += "    \"residual_rms\": " + format_number(e.residual_rms()) + ",\n";
  out += "    \"conditioning\": {\"max_rotation_angle\": " + format_number(c.max_rotation_angle) +
         ", \"smallest_singular_value\": " + format_number(c.smallest_singular_value) +
         ", \"condition_number\": " + number_or_infinity(c.condition_number) +
         ", \"well_posed\": " + (c.well_posed ? "true" : "false") + "}\n  },\n";
  out += "  \"per_frame_residuals\": [";
  for (std::size_t k = 0; k < report.per_frame_residuals.size(); ++k) {
    out += (k ? ", " : "") + format_number(report.per_frame_residuals[k]);
  }
  out += "],\n  \"config\": " + config_object(report.config) + "\n}\n";
  return out;
}

EstimateReport parse_estimate_report(std::string_view text) {
  const json root = parse_json(text);
  check_schema(root, kReportSchema);
  EstimateReport report;
  report.tool_version = string_field(root, "tool_version", "root");
  report.input_digest = string_field(root, "input_digest", "root");

  const json& e = field(root, "estimate", "root");
  const ContactKind kind = kind_value(string_field(e, "kind", "estimate"), "estimate.kind");
  const json& c = field(e, "conditioning", "estimate");
  ConditioningReportd conditioning;
  conditioning.max_rotation_angle = finite_number(field(c, "max_rotation_angle", "conditioning"), "conditioning.max_rotation_angle");
  conditioning.smallest_singular_value =
      finite_number(field(c, "smallest_singular_value", "conditioning"), "conditioning.smallest_singular_value");
  conditioning.condition_number = number(field(c, "condition_number", "conditioning"), "conditioning.condition_number");
  const json& well_posed = field(c, "well_posed", "conditioning");
  if (!well_posed.is_boolean()) fail("conditioning.well_posed", "expected a boolean");
  conditioning.well_posed = well_posed.get<bool>();
  const double rms = finite_number(field(e, "residual_rms", "estimate"), "estimate.residual_rms");

  try {
    switch (kind) {
      case ContactKind::FixedPoint:
        report.estimate = ContactEstimated::fixed_point(vector3(field(e, "point", "estimate"), "estimate.point"),
                                                        rms, conditioning);
        break;
      case ContactKind::FixedDirection:
        report.estimate = ContactEstimated::fixed_direction(
            vector3(field(e, "direction", "estimate"), "estimate.direction"), rms, conditioning);
        break;
      case ContactKind::LineContact:
        report.estimate = ContactEstimated::line_contact(
            vector3(field(e, "direction", "estimate"), "estimate.direction"),
            vector3(field(e, "point", "estimate"), "estimate.point"), rms, conditioning);
        break;
    }
  } catch (const Error& err) {
    if (err.code() != ErrorCode::InvalidArgument) throw;
    fail("estimate", err.what());
  }

  const json& residuals = field(root, "per_frame_residuals", "root");
  if (!residuals.is_array()) fail("per_frame_residuals", "expected an array");
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    report.per_frame_residuals.push_back(number(residuals[k], "per_frame_residuals[" + std::to_string(k) + "]"));
  }
  report.config = config_value(field(root, "config", "root"), {}, "config");
  return report;
}

// ---------------------------------------------------------------- scenarios

ScenarioFile parse_scenario(std::string_view text) {
  const json root = parse_json(text);
  check_schema(root, kScenarioSchema);
  ScenarioFile file;
  if (const json* name = optional_field(root, "name")) {
    if (!name->is_string()) fail("root.name", "expected a string");
    file.name = name->get<std::string>();
  }
  if (const json* units = optional_field(root, "units")) {
    if (!units->is_string()) fail("root.units", "expected a string");
    file.units = units->get<std::string>();
  }

  sim::ScenarioConfig& config = file.config;
  config.contact = contact_value(field(root, "contact", "root"), "contact");

  const json& grid = field(root, "marker_grid", "root");
  if (const json* v = optional_field(grid, "rows")) config.grid.rows = static_cast<int>(index_value(*v, "marker_grid.rows"));
  if (const json* v = optional_field(grid, "cols")) config.grid.cols = static_cast<int>(index_value(*v, "marker_grid.cols"));
  if (const json* v = optional_field(grid, "pitch")) config.grid.pitch = finite_number(*v, "marker_grid.pitch");
  if (const json* v = optional_field(grid, "dome_ratio")) config.grid.dome_ratio = finite_number(*v, "marker_grid.dome_ratio");
  if (const json* pose = optional_field(grid, "sensor_pose")) {
    const Eigen::Vector3d axis =
        optional_field(*pose, "axis") ? vector3((*pose)["axis"], "sensor_pose.axis") : Eigen::Vector3d::UnitZ();
    const double angle = optional_field(*pose, "axis") ? angle_value(*pose, "sensor_pose") : 0.0;
    const Eigen::Vector3d translation = optional_field(*pose, "translation")
                                            ? vector3((*pose)["translation"], "sensor_pose.translation")
                                            : Eigen::Vector3d::Zero();
    try {
      config.grid.sensor_pose = RelativeMotiond::from_axis_angle(axis, angle, translation);
    } catch (const Error& e) {
      fail("sensor_pose", e.what());
    }
  }

  const json& schedule = field(root, "schedule", "root");
  if (!schedule.is_array()) fail("schedule", "expected an array");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const std::string where = "schedule[" + std::to_string(k) + "]";
    sim::ScheduleStep step;
    step.axis = vector3(field(schedule[k], "axis", where), where + ".axis");
    step.angle = angle_value(schedule[k], where);
    if (const json* v = optional_field(schedule[k], "slide")) step.slide = finite_number(*v, where + ".slide");
    if (const json* v = optional_field(schedule[k], "translation")) step.translation = vector3(*v, where + ".translation");
    config.schedule.push_back(step);
  }

  if (const json* noise = optional_field(root, "noise_sigma")) {
    config.noise_sigma = noise->is_array() ? vector3(*noise, "noise_sigma")
                                           : Eigen::Vector3d::Constant(finite_number(*noise, "noise_sigma"));
  } else {
    config.noise_sigma = Eigen::Vector3d::Constant(0.01 * config.grid.pitch);
  }
  if (const json* seed = optional_field(root, "seed")) {
    if (!seed->is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    config.seed = seed->get<std::uint64_t>();
  }

  file.estimate.type = sim::kind_of(config.contact);
  if (const auto* line = std::get_if<sim::LineContact>(&config.contact)) {
    file.estimate.n0 = line->n0.normalized();
  }
  if (const json* estimate = optional_field(root, "estimate")) {
    if (const json* type = optional_field(*estimate, "type")) {
      if (!type->is_string()) fail("estimate.type", "expected a string");
      file.estimate.type = kind_value(type->get<std::string>(), "estimate.type");
    }
    if (const json* n0 = optional_field(*estimate, "n0")) file.estimate.n0 = vector3(*n0, "estimate.n0");
    file.estimate.config = config_value(*estimate, {}, "estimate");
  }
  if (file.estimate.type == ContactKind::LineContact && !file.estimate.n0) {
    fail("estimate", "line estimation needs n0");
  }

  if (const json* tol = optional_field(root, "tolerances")) {
    if (const json* v = optional_field(*tol, "direction_rad")) file.tolerances.direction_rad = finite_number(*v, "tolerances.direction_rad");
    if (const json* v = optional_field(*tol, "point_distance")) file.tolerances.point_distance = finite_number(*v, "tolerances.point_distance");
  }

  try {
    config.validate();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument) throw;
    fail("scenario", e.what());
  }
  return file;
}

ScenarioFile read_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

// ---------------------------------------------------------------- truth

std::string format_truth(const sim::ScenarioTruth& truth, std::string_view units) {
  return header(kTruthSchema) + "  \"units\": " + json_string(units) + ",\n  \"contact\": " +
         contact_object(truth.contact) + ",\n  \"motions\": " + motions_array(truth.motions, "  ") + "\n}\n";
}

sim::ScenarioTruth parse_truth(std::string_view text) {
  const json root = parse_json(text);
  check_schema(root, kTruthSchema);
  return {motions_value(field(root, "motions", "root"), "motions"), contact_value(field(root, "contact", "root"), "contact")};
}

// ---------------------------------------------------------------- files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoFailure, "SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

}  // namespace extrinsic::io

#pragma once

// JSON file formats: marker logs, motion sequences, estimate reports,
// scenario descriptions and ground-truth sidecars.
//
// Every file carries a "schema" tag and a "schema_version". Numbers are
// written with 17 significant digits, so write(read(write(x))) reproduces
// the first write byte for byte. Readers accept the bare tokens NaN,
// Infinity and -Infinity (as emitted by common JSON writers) so that
// non-finite data is reported as NonFiniteValue rather than a syntax error.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "extrinsic/core.hpp"
#include "extrinsic/estimators.hpp"
#include "extrinsic/simulator.hpp"

namespace extrinsic::io {

inline constexpr std::string_view kSchemaVersion = "1";

struct MarkerLog {
  std::string schema_version{kSchemaVersion};
  std::string units = "mm";
  std::vector<MarkerFramed> frames;

  /// Constant marker count and dense frame indices starting at 0.
  void validate() const;
};

std::string format_marker_log(const MarkerLog& log);
MarkerLog parse_marker_log(std::string_view text);
MarkerLog read_marker_log(const std::filesystem::path& path);
void write_marker_log(const MarkerLog& log, const std::filesystem::path& path);

std::string format_motion_sequence(const MotionSequenced& motions, std::string_view units);
MotionSequenced parse_motion_sequence(std::string_view text);

struct EstimateReport {
  ContactEstimated estimate = ContactEstimated::fixed_point(Eigen::Vector3d::Zero(), 0.0, {});
  std::vector<double> per_frame_residuals;  // one per non-reference frame
  EstimatorConfigd config;
  std::string input_digest;
  std::string tool_version;
};

std::string format_estimate_report(const EstimateReport& report);
EstimateReport parse_estimate_report(std::string_view text);

/// Bounds checked by `roundtrip`. Unset bounds are not checked.
struct Tolerances {
  std::optional<double> direction_rad;
  std::optional<double> point_distance;
};

struct EstimateSettings {
  ContactKind type = ContactKind::FixedPoint;
  std::optional<Eigen::Vector3d> n0;  // line contacts; defaults to the scenario's face normal
  EstimatorConfigd config;
};

struct ScenarioFile {
  std::string name;
  std::string units = "mm";
  sim::ScenarioConfig config;
  EstimateSettings estimate;
  Tolerances tolerances;
};

ScenarioFile parse_scenario(std::string_view text);
ScenarioFile read_scenario(const std::filesystem::path& path);

std::string format_truth(const sim::ScenarioTruth& truth, std::string_view units);
sim::ScenarioTruth parse_truth(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Lowercase hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// "%.17g", with negative zero written as 0.
std::string format_number(double value);

}  // namespace extrinsic::io

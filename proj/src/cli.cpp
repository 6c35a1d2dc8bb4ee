#include "extrinsic/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "extrinsic/io.hpp"
#include "extrinsic/registration.hpp"

#ifndef EXTRINSIC_VERSION
#define EXTRINSIC_VERSION "0.0.0"
#endif

namespace extrinsic::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double angle_between_lines(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

double distance_to_line(const Eigen::Vector3d& p, const Eigen::Vector3d& through, const Eigen::Vector3d& direction) {
  const Eigen::Vector3d l = direction.normalized();
  const Eigen::Vector3d d = p - through;
  return (d - d.dot(l) * l).norm();
}

Eigen::Vector3d parse_vector_flag(const std::string& text) {
  std::stringstream in(text);
  std::string item;
  std::vector<double> values;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--n0 expects three comma-separated numbers, got \"" + text + "\"");
    }
  }
  if (values.size() != 3) throw UsageError("--n0 expects three comma-separated numbers, got \"" + text + "\"");
  const Eigen::Vector3d v(values[0], values[1], values[2]);
  if (!v.allFinite() || !(v.norm() > 0)) throw UsageError("--n0 must be a finite nonzero vector");
  return v.normalized();
}

ContactKind parse_type_flag(const std::string& text) {
  if (text == "point") return ContactKind::FixedPoint;
  if (text == "direction") return ContactKind::FixedDirection;
  if (text == "line") return ContactKind::LineContact;
  throw UsageError("--type must be one of point, direction, line");
}

std::filesystem::path default_truth_path(const std::filesystem::path& log_path) {
  std::filesystem::path p = log_path;
  p.replace_extension(".truth.json");
  return p;
}

void print_errors(std::ostream& out, const TruthErrors& errors, const io::Tolerances& tolerances, bool& ok) {
  auto line = [&](const char* name, const std::optional<double>& value, const std::optional<double>& bound) {
    if (!value) return;
    out << name << ": " << io::format_number(*value);
    if (bound) {
      const bool within = *value <= *bound;
      ok = ok && within;
      out << " (tolerance " << io::format_number(*bound) << ") " << (within ? "ok" : "EXCEEDED");
    }
    out << '\n';
  };
  line("direction_error_rad", errors.direction_rad, tolerances.direction_rad);
  line("point_distance", errors.point_distance, tolerances.point_distance);
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path, std::string truth_path,
                 std::ostream& out) {
  const io::ScenarioFile scenario = io::read_scenario(scenario_path);
  const sim::Scenario generated = sim::generate(scenario.config);
  if (truth_path.empty()) truth_path = default_truth_path(out_path).string();

  io::MarkerLog log;
  log.units = scenario.units;
  log.frames = generated.frames;
  io::write_marker_log(log, out_path);
  io::write_file(truth_path, io::format_truth(generated.truth, scenario.units));
  out << "wrote " << log.frames.size() << " frames of " << log.frames.front().size() << " markers to " << out_path
      << "\nwrote ground truth to " << truth_path << '\n';
  return kExitOk;
}

int cmd_register(const std::string& log_path, const std::string& out_path, double rank_tolerance,
                 std::ostream& out) {
  const io::MarkerLog log = io::read_marker_log(log_path);
  const MotionSequenced motions = register_sequence(log.frames, rank_tolerance);
  io::write_file(out_path, io::format_motion_sequence(motions, log.units));
  out << "wrote " << motions.size() << " motions to " << out_path << '\n';
  return kExitOk;
}

int cmd_estimate(ContactKind type, const std::string& log_path, const std::optional<Eigen::Vector3d>& n0,
                 const EstimatorConfigd& config, const std::string& out_path, std::ostream& out) {
  const std::string bytes = io::read_file(log_path);
  const io::MarkerLog log = io::parse_marker_log(bytes);
  const MotionSequenced motions = register_sequence(log.frames, config.rank_tolerance);

  io::EstimateReport report;
  report.estimate = run_estimator(motions, type, n0, config);
  report.per_frame_residuals = per_frame_residuals(report.estimate, motions, n0);
  report.config = config;
  report.input_digest = "sha256:" + io::sha256_hex(bytes);
  report.tool_version = EXTRINSIC_VERSION;
  io::write_file(out_path, io::format_estimate_report(report));

  const auto& c = report.estimate.conditioning();
  out << to_string(report.estimate.kind()) << " estimate written to " << out_path << "\nresidual_rms: "
      << io::format_number(report.estimate.residual_rms())
      << "\ncondition_number: " << io::format_number(c.condition_number)
      << "\nwell_posed: " << (c.well_posed ? "true" : "false") << '\n';
  return kExitOk;
}

int cmd_roundtrip(const std::string& scenario_path, const std::string& report_path, std::ostream& out) {
  const std::string scenario_bytes = io::read_file(scenario_path);
  const io::ScenarioFile scenario = io::parse_scenario(scenario_bytes);
  const sim::Scenario generated = sim::generate(scenario.config);

  // Go through the on-disk formats so the comparison sees what a user would.
  io::MarkerLog log;
  log.units = scenario.units;
  log.frames = generated.frames;
  const io::MarkerLog parsed = io::parse_marker_log(io::format_marker_log(log));
  const sim::ScenarioTruth truth = io::parse_truth(io::format_truth(generated.truth, scenario.units));

  const EstimatorConfigd& config = scenario.estimate.config;
  const MotionSequenced motions = register_sequence(parsed.frames, config.rank_tolerance);
  const ContactEstimated estimate = run_estimator(motions, scenario.estimate.type, scenario.estimate.n0, config);
  const TruthErrors errors = compare_to_truth(estimate, truth.contact);

  out << "scenario: " << (scenario.name.empty() ? scenario_path : scenario.name) << '\n'
      << "estimate: " << to_string(estimate.kind()) << '\n'
      << "residual_rms: " << io::format_number(estimate.residual_rms()) << '\n'
      << "condition_number: " << io::format_number(estimate.conditioning().condition_number) << '\n';
  bool ok = true;
  print_errors(out, errors, scenario.tolerances, ok);

  if (!report_path.empty()) {
    io::EstimateReport report;
    report.estimate = estimate;
    report.per_frame_residuals = per_frame_residuals(estimate, motions, scenario.estimate.n0);
    report.config = config;
    report.input_digest = "sha256:" + io::sha256_hex(scenario_bytes);
    report.tool_version = EXTRINSIC_VERSION;
    io::write_file(report_path, io::format_estimate_report(report));
  }
  out << (ok ? "roundtrip: PASS" : "roundtrip: FAIL") << '\n';
  return ok ? kExitOk : kExitToleranceExceeded;
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MismatchedFrames:
    case ErrorCode::DegenerateMarkers:
    case ErrorCode::TooFewMarkers:
    case ErrorCode::TooFewFrames:
    case ErrorCode::IllConditioned:
    case ErrorCode::AmbiguousDirection:
    case ErrorCode::RankDeficientBeyondLine:
      return kExitEstimation;
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidSchedule:
    case ErrorCode::ParseError:
    case ErrorCode::SchemaVersionMismatch:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::IoFailure:
      return kExitParse;
  }
  return kExitParse;
}

ContactEstimated run_estimator(const MotionSequenced& motions, ContactKind type,
                               const std::optional<Eigen::Vector3d>& n0, const EstimatorConfigd& config) {
  switch (type) {
    case ContactKind::FixedPoint:
      return estimate_fixed_point(motions, config);
    case ContactKind::FixedDirection:
      return estimate_fixed_direction(motions, config);
    case ContactKind::LineContact:
      if (!n0) throw Error(ErrorCode::InvalidArgument, "line contact estimation needs the face normal n0");
      return estimate_line_contact(motions, *n0, config);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown contact type");
}

std::vector<double> per_frame_residuals(const ContactEstimated& estimate, const MotionSequenced& motions,
                                        const std::optional<Eigen::Vector3d>& n0) {
  switch (estimate.kind()) {
    case ContactKind::FixedPoint:
      return evaluate_residuals(motions, [&](const RelativeMotiond& m) { return fixed_point_residual(m, *estimate.point()); });
    case ContactKind::FixedDirection:
      return evaluate_residuals(
          motions, [&](const RelativeMotiond& m) { return fixed_direction_residual(m, *estimate.direction()); });
    case ContactKind::LineContact:
      if (!n0) throw Error(ErrorCode::InvalidArgument, "line residuals need the face normal n0");
      return evaluate_residuals(motions, [&](const RelativeMotiond& m) { return plane_residual(m, *n0, *estimate.point()); });
  }
  return {};
}

TruthErrors compare_to_truth(const ContactEstimated& estimate, const sim::ContactGeometry& truth) {
  std::optional<Eigen::Vector3d> true_point;
  std::optional<Eigen::Vector3d> true_direction;
  bool point_is_line = false;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, sim::FixedPointContact>) {
          true_point = c.point;
        } else if constexpr (std::is_same_v<T, sim::FixedDirectionContact>) {
          true_direction = c.axis.normalized();
        } else {
          true_point = c.point;
          true_direction = c.direction.normalized();
          point_is_line = true;
        }
      },
      truth);

  TruthErrors errors;
  if (estimate.direction() && true_direction) {
    errors.direction_rad = angle_between_lines(*estimate.direction(), *true_direction);
  }
  if (estimate.point() && true_point) {
    errors.point_distance = point_is_line ? distance_to_line(*estimate.point(), *true_point, *true_direction)
                                          : (*estimate.point() - *true_point).norm();
  }
  return errors;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Extrinsic contact localization from tactile marker motion", "extrinsic"};
  app.set_version_flag("--version", EXTRINSIC_VERSION);
  app.require_subcommand(1);

  std::string scenario_path, out_path, truth_path, log_path, report_path, type_text, n0_text;
  EstimatorConfigd config;
  double register_rank_tolerance = config.rank_tolerance;

  auto* simulate = app.add_subcommand("simulate", "Generate a marker log and ground-truth sidecar from a scenario");
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--out", out_path, "Marker log to write")->required();
  simulate->add_option("--truth", truth_path, "Ground-truth sidecar (default: <out>.truth.json)");

  auto* reg = app.add_subcommand("register", "Recover relative motions from a marker log");
  reg->add_option("--log", log_path, "Marker log")->required();
  reg->add_option("--out", out_path, "Motion sequence file to write")->required();
  reg->add_option("--rank-tolerance", register_rank_tolerance, "Relative rank tolerance");

  auto* estimate = app.add_subcommand("estimate", "Register a marker log and localize the contact");
  estimate->add_option("--type", type_text, "point | direction | line")->required();
  estimate->add_option("--log", log_path, "Marker log")->required();
  estimate->add_option("--n0", n0_text, "Contacting face normal in the reference frame, x,y,z (line only)");
  estimate->add_option("--out", out_path, "Estimate report to write")->required();
  estimate->add_option("--angle-threshold", config.angle_threshold, "Minimum max rotation angle (rad)");
  estimate->add_option("--cond-threshold", config.cond_threshold, "Maximum condition number");
  estimate->add_option("--rank-tolerance", config.rank_tolerance, "Singular value tolerance");
  estimate->add_option("--min-frames", config.min_frames, "Minimum frames, reference included");
  estimate->add_flag("--strict", config.strict, "Fail with exit 4 on ill-conditioned input");

  auto* roundtrip = app.add_subcommand("roundtrip", "Simulate, estimate and compare against ground truth");
  roundtrip->add_option("--scenario", scenario_path, "Scenario file")->required();
  roundtrip->add_option("--report", report_path, "Optional estimate report to write");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(scenario_path, out_path, truth_path, out);
    if (reg->parsed()) return cmd_register(log_path, out_path, register_rank_tolerance, out);
    if (roundtrip->parsed()) return cmd_roundtrip(scenario_path, report_path, out);

    const ContactKind type = parse_type_flag(type_text);
    std::optional<Eigen::Vector3d> n0;
    if (!n0_text.empty()) n0 = parse_vector_flag(n0_text);
    if (type == ContactKind::LineContact && !n0) throw UsageError("--type line requires --n0 x,y,z");
    try {
      config.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    return cmd_estimate(type, log_path, n0, config, out_path, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << estimate->help();
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  }
}

}  // namespace extrinsic::cli

#pragma once

// Command-line driver and the pipeline pieces it shares with tests.
//
//   simulate  --scenario <file> --out <log> [--truth <file>]
//   register  --log <file> --out <motions>
//   estimate  --type point|direction|line --log <file> [--n0 x,y,z] --out <report>
//   roundtrip --scenario <file> [--report <file>]
//
// Exit codes: 0 success, 1 roundtrip tolerance exceeded or output failure,
// 2 usage error, 3 input/parse error, 4 estimation error.

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "extrinsic/estimators.hpp"
#include "extrinsic/simulator.hpp"

namespace extrinsic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitToleranceExceeded = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitEstimation = 4;

int exit_code_for(ErrorCode code) noexcept;

/// Dispatches to the estimator for `type`; line contacts require n0.
ContactEstimated run_estimator(const MotionSequenced& motions, ContactKind type,
                               const std::optional<Eigen::Vector3d>& n0, const EstimatorConfigd& config);

/// Constraint residual of the estimate at every non-reference frame.
std::vector<double> per_frame_residuals(const ContactEstimated& estimate, const MotionSequenced& motions,
                                        const std::optional<Eigen::Vector3d>& n0);

struct TruthErrors {
  std::optional<double> direction_rad;   // angle between directions, up to sign
  std::optional<double> point_distance;  // to the true point, or to the true edge line
};

TruthErrors compare_to_truth(const ContactEstimated& estimate, const sim::ContactGeometry& truth);

/// Runs the CLI; `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace extrinsic::cli

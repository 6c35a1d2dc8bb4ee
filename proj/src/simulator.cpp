#include "extrinsic/simulator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "extrinsic/constraints.hpp"

namespace extrinsic::sim {

namespace {

constexpr double kParallelTolerance = 1e-9;

double length_scale(const ScenarioConfig& config) {
  double scale = std::max(1.0, config.grid.pitch);
  std::visit([&](const auto& c) {
    using T = std::decay_t<decltype(c)>;
    if constexpr (!std::is_same_v<T, FixedDirectionContact>) scale = std::max(scale, c.point.norm());
  }, config.contact);
  return scale;
}

void require_parallel(const Eigen::Vector3d& axis, const Eigen::Vector3d& reference, std::size_t frame) {
  if (axis.normalized().cross(reference).norm() > kParallelTolerance) {
    throw Error(ErrorCode::InvalidSchedule, "rotation axis is not the contact axis", frame);
  }
}

void require_translation(const ScheduleStep& step, const Eigen::Vector3d& expected, double scale,
                         std::size_t frame) {
  if (step.translation && (*step.translation - expected).norm() > kParallelTolerance * scale) {
    throw Error(ErrorCode::InvalidSchedule, "translation violates the contact constraint", frame);
  }
}

RelativeMotiond step_motion(const ContactGeometry& contact, const ScheduleStep& step, double scale,
                            std::size_t frame) {
  if (!(step.axis.norm() > 0) || !std::isfinite(step.angle) || !std::isfinite(step.slide)) {
    throw Error(ErrorCode::InvalidSchedule, "schedule step needs a nonzero axis and finite values", frame);
  }
  const Eigen::Matrix3d rotation = Eigen::AngleAxisd(step.angle, step.axis.normalized()).toRotationMatrix();
  const Eigen::Matrix3d i_minus_r = Eigen::Matrix3d::Identity() - rotation;

  return std::visit(
      [&](const auto& c) -> RelativeMotiond {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, FixedPointContact>) {
          if (step.slide != 0.0) {
            throw Error(ErrorCode::InvalidSchedule, "fixed-point schedule cannot slide", frame);
          }
          const Eigen::Vector3d t = i_minus_r * c.point;
          require_translation(step, t, scale, frame);
          return RelativeMotiond(rotation, t, frame);
        } else if constexpr (std::is_same_v<T, FixedDirectionContact>) {
          const Eigen::Vector3d axis = c.axis.normalized();
          require_parallel(step.axis, axis, frame);
          const Eigen::Vector3d t = step.translation.value_or(Eigen::Vector3d::Zero()) + step.slide * axis;
          return RelativeMotiond(rotation, t, frame);
        } else {
          const Eigen::Vector3d l = c.direction.normalized();
          require_parallel(step.axis, l, frame);
          const Eigen::Vector3d t = i_minus_r * c.point + step.slide * l;
          require_translation(step, t, scale, frame);
          return RelativeMotiond(rotation, t, frame);
        }
      },
      contact);
}

}  // namespace

ContactKind kind_of(const ContactGeometry& contact) {
  switch (contact.index()) {
    case 0: return ContactKind::FixedPoint;
    case 1: return ContactKind::FixedDirection;
    default: return ContactKind::LineContact;
  }
}

Matrix3X<double> MarkerGrid::positions() const {
  const double half_w = 0.5 * (cols - 1) * pitch;
  const double half_h = 0.5 * (rows - 1) * pitch;
  const double radius_sq = half_w * half_w + half_h * half_h;
  Matrix3X<double> local(3, rows * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double x = c * pitch - half_w;
      const double y = r * pitch - half_h;
      const double z = dome_ratio * pitch * (1.0 - (x * x + y * y) / radius_sq);
      local.col(r * cols + c) << x, y, z;
    }
  }
  return sensor_pose.apply(local);
}

void ScenarioConfig::validate() const {
  if (grid.rows < 2 || grid.cols < 2) {
    throw Error(ErrorCode::InvalidArgument, "marker grid needs at least 2 rows and 2 columns");
  }
  if (!(grid.pitch > 0) || !std::isfinite(grid.pitch) || !std::isfinite(grid.dome_ratio)) {
    throw Error(ErrorCode::InvalidArgument, "grid pitch must be positive and finite");
  }
  if (!noise_sigma.allFinite() || (noise_sigma.array() < 0).any()) {
    throw Error(ErrorCode::InvalidArgument, "noise_sigma must be finite and nonnegative");
  }
  if (schedule.empty()) {
    throw Error(ErrorCode::InvalidSchedule, "motion schedule is empty");
  }
  std::visit(
      [](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, FixedPointContact>) {
          if (!c.point.allFinite()) throw Error(ErrorCode::InvalidArgument, "pivot must be finite");
        } else if constexpr (std::is_same_v<T, FixedDirectionContact>) {
          if (!(c.axis.norm() > 0) || !c.axis.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "contact axis must be nonzero");
          }
        } else {
          if (!(c.direction.norm() > 0) || !(c.n0.norm() > 0) || !c.point.allFinite()) {
            throw Error(ErrorCode::InvalidArgument, "edge direction and face normal must be nonzero");
          }
          if (std::abs(c.direction.normalized().dot(c.n0.normalized())) > kParallelTolerance) {
            throw Error(ErrorCode::InvalidArgument, "face normal must be orthogonal to the edge");
          }
        }
      },
      contact);
}

ScenarioTruth make_truth(const ScenarioConfig& config) {
  config.validate();
  const double scale = length_scale(config);
  std::vector<RelativeMotiond> motions;
  motions.reserve(config.schedule.size() + 1);
  motions.push_back(RelativeMotiond::identity(0));
  for (std::size_t k = 0; k < config.schedule.size(); ++k) {
    motions.push_back(step_motion(config.contact, config.schedule[k], scale, k + 1));
  }

  ContactGeometry contact = config.contact;
  std::visit(
      [](auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, FixedDirectionContact>) {
          c.axis.normalize();
        } else if constexpr (std::is_same_v<T, LineContact>) {
          c.direction.normalize();
          c.n0.normalize();
        }
      },
      contact);
  return {MotionSequenced(std::move(motions)), contact};
}

Scenario generate(const ScenarioConfig& config) {
  Scenario scenario;
  scenario.truth = make_truth(config);

  const Matrix3X<double> reference = config.grid.positions();
  NormalSource normal(config.seed);
  scenario.frames.reserve(scenario.truth.motions.size());
  scenario.frames.emplace_back(reference, 0);
  for (std::size_t k = 1; k < scenario.truth.motions.size(); ++k) {
    Matrix3X<double> moved = scenario.truth.motions[k].apply(reference);
    for (Eigen::Index i = 0; i < moved.cols(); ++i) {
      for (int axis = 0; axis < 3; ++axis) moved(axis, i) += config.noise_sigma(axis) * normal.next();
    }
    scenario.frames.emplace_back(std::move(moved), k);
  }
  return scenario;
}

std::vector<double> constraint_residuals(const ScenarioTruth& truth) {
  std::vector<double> out;
  out.reserve(truth.motions.size());
  for (const auto& m : truth.motions) {
    out.push_back(std::visit(
        [&](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, FixedPointContact>) {
            return fixed_point_residual(m, c.point);
          } else if constexpr (std::is_same_v<T, FixedDirectionContact>) {
            return fixed_direction_residual(m, Eigen::Vector3d(c.axis.normalized()));
          } else {
            // Both ends of a unit segment of the edge must lie on the moved face.
            const Eigen::Vector3d l = c.direction.normalized();
            const Eigen::Vector3d n0 = c.n0.normalized();
            return std::max(std::abs(plane_residual(m, n0, c.point)),
                            std::abs(plane_residual(m, n0, Eigen::Vector3d(c.point + l))));
          }
        },
        truth.contact));
  }
  return out;
}

double NormalSource::uniform_open_closed() {
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double NormalSource::next() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed()));
  const double theta = 2.0 * std::numbers::pi * uniform_open_closed();
  spare_ = radius * std::sin(theta);
  return radius * std::cos(theta);
}

}  // namespace extrinsic::sim

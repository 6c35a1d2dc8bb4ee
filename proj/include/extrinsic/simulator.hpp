#pragma once

// Synthetic tactile data: a marker grid rigidly attached to an object that
// moves under a known contact constraint, observed with Gaussian noise.

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "extrinsic/core.hpp"

namespace extrinsic::sim {

/// Body point fixed in the world.
struct FixedPointContact {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

/// Body direction fixed in the world; translations are unconstrained.
struct FixedDirectionContact {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
};

/// Object face (normal n0 in the reference frame) resting on a fixed edge
/// through `point` along `direction`. The object rotates about the edge and
/// slides along it.
struct LineContact {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Vector3d n0 = Eigen::Vector3d::UnitZ();
};

using ContactGeometry = std::variant<FixedPointContact, FixedDirectionContact, LineContact>;

ContactKind kind_of(const ContactGeometry& contact);

/// Regular rows x cols grid in the sensor's xy plane, centered on the sensor
/// origin, with a quadratic dome of height dome_ratio * pitch along +z so
/// the marker cloud has full rank. sensor_pose places the grid on the object.
struct MarkerGrid {
  int rows = 11;
  int cols = 11;
  double pitch = 1.0;
  double dome_ratio = 0.05;
  RelativeMotiond sensor_pose;

  Matrix3X<double> positions() const;
};

/// One frame of the motion schedule, relative to frame 0. The rotation is
/// about `axis` through the contact (pivot, or edge line). `slide` moves
/// along the contact axis (line and direction contacts only). `translation`,
/// when given, must agree with the constraint for point and line contacts
/// and is added freely for direction contacts.
struct ScheduleStep {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double angle = 0.0;  // radians
  double slide = 0.0;
  std::optional<Eigen::Vector3d> translation;
};

struct ScenarioConfig {
  ContactGeometry contact = FixedPointContact{};
  MarkerGrid grid;
  std::vector<ScheduleStep> schedule;
  Eigen::Vector3d noise_sigma = Eigen::Vector3d::Constant(0.01);
  std::uint64_t seed = 0;

  void validate() const;
};

struct ScenarioTruth {
  MotionSequenced motions;  // includes the identity for frame 0
  ContactGeometry contact;
};

struct Scenario {
  std::vector<MarkerFramed> frames;
  ScenarioTruth truth;
};

/// Noiseless motions implied by the schedule. Independent of noise and seed.
/// Throws InvalidSchedule when a step contradicts the contact variant.
ScenarioTruth make_truth(const ScenarioConfig& config);

/// Frame 0 is the noiseless reference grid; frame k is truth motion k
/// applied to the grid plus zero-mean Gaussian noise. Deterministic in seed.
Scenario generate(const ScenarioConfig& config);

/// Residual of the generating constraint, one per frame (frame 0 included).
std::vector<double> constraint_residuals(const ScenarioTruth& truth);

/// Standard normal deviates from std::mt19937_64 by the Box-Muller
/// transform. Both are fully specified, so streams are reproducible across
/// platforms and standard libraries (unlike std::normal_distribution).
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  double uniform_open_closed();  // (0, 1]

  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace extrinsic::sim

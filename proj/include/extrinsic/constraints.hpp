#pragma once

// Contact-constraint residuals f(M, U): one value per motion, zero when the
// motion is consistent with the contact hypothesis U.

#include <cmath>
#include <vector>

#include "extrinsic/core.hpp"

namespace extrinsic {

/// |R P + t - P|: displacement of a body point that should stay fixed.
template <std::floating_point Scalar>
Scalar fixed_point_residual(const RelativeMotion<Scalar>& m, const Vector3<Scalar>& point) {
  return (m.apply(point) - point).norm();
}

/// |(R - I) e|: change of a body direction that should stay fixed.
template <std::floating_point Scalar>
Scalar fixed_direction_residual(const RelativeMotion<Scalar>& m, const Vector3<Scalar>& direction) {
  return (m.rotation() * direction - direction).norm();
}

/// n_k . (R x0 + t - x0) with n_k = R n0: signed distance of the edge point
/// x0 from the object's contacting face at this frame.
template <std::floating_point Scalar>
Scalar plane_residual(const RelativeMotion<Scalar>& m, const Vector3<Scalar>& n0,
                      const Vector3<Scalar>& point) {
  const Vector3<Scalar> normal = (m.rotation() * n0).normalized();
  return normal.dot(m.apply(point) - point);
}

/// Evaluates `residual(motion)` for every motion except the reference frame.
template <std::floating_point Scalar, typename Residual>
std::vector<Scalar> evaluate_residuals(const MotionSequence<Scalar>& motions, Residual&& residual) {
  std::vector<Scalar> out;
  out.reserve(motions.size());
  for (const auto& m : motions) {
    if (m.frame_index() == 0) continue;
    out.push_back(static_cast<Scalar>(residual(m)));
  }
  return out;
}

template <std::floating_point Scalar>
Scalar root_mean_square(const std::vector<Scalar>& values) {
  if (values.empty()) return Scalar(0);
  Scalar sum = 0;
  for (Scalar v : values) sum += v * v;
  return std::sqrt(sum / static_cast<Scalar>(values.size()));
}

}  // namespace extrinsic

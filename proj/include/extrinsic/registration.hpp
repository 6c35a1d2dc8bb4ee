#pragma once

// Rigid point-set registration between index-corresponded marker frames
// (SVD / Kabsch solution of min sum_i |R a0_i + t - ak_i|^2).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "extrinsic/core.hpp"

namespace extrinsic {

template <std::floating_point Scalar>
struct RegistrationResult {
  RelativeMotion<Scalar> motion;
  Scalar rms_error = 0;
  int marker_covariance_rank = 0;
};

/// Least-squares rigid motion taking `reference` onto `current`.
///
/// Markers are matched by column index. A reflection in the naive SVD
/// solution is corrected by flipping the weakest singular direction, so the
/// returned rotation is always proper. Near-planar marker sets (covariance
/// rank 2) are accepted; rank < 2 leaves the rotation unobservable and throws
/// DegenerateMarkers. `rank_tolerance` is relative to the largest singular
/// value of the centered cross-covariance.
template <std::floating_point Scalar>
RegistrationResult<Scalar> register_frames(const MarkerFrame<Scalar>& reference,
                                           const MarkerFrame<Scalar>& current,
                                           Scalar rank_tolerance = Scalar(1e-8)) {
  using Mat3 = Matrix3<Scalar>;
  using Vec3 = Vector3<Scalar>;

  const Eigen::Index m = reference.size();
  if (current.size() != m) {
    throw Error(ErrorCode::MismatchedFrames,
                "marker count " + std::to_string(current.size()) + " differs from reference count " +
                    std::to_string(m),
                current.frame_index());
  }
  if (m < 3) {
    throw Error(ErrorCode::TooFewMarkers, "registration needs at least 3 markers, got " + std::to_string(m),
                current.frame_index());
  }

  const Matrix3X<Scalar>& a = reference.positions();
  const Matrix3X<Scalar>& b = current.positions();
  const Vec3 a_mean = a.rowwise().mean();
  const Vec3 b_mean = b.rowwise().mean();
  const Matrix3X<Scalar> a_centered = a.colwise() - a_mean;
  const Matrix3X<Scalar> b_centered = b.colwise() - b_mean;

  const Mat3 covariance = a_centered * b_centered.transpose();
  Eigen::JacobiSVD<Mat3> svd(covariance, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();

  int rank = 0;
  if (sigma(0) > Scalar(0)) {
    for (int i = 0; i < 3; ++i) {
      if (sigma(i) > rank_tolerance * sigma(0)) ++rank;
    }
  }
  if (rank < 2) {
    throw Error(ErrorCode::DegenerateMarkers,
                "marker cross-covariance has rank " + std::to_string(rank) + "; rotation is unobservable",
                current.frame_index());
  }

  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Vec3 correction = Vec3::Ones();
  if ((v * u.transpose()).determinant() < Scalar(0)) correction(2) = Scalar(-1);
  const Mat3 rotation = v * correction.asDiagonal() * u.transpose();
  const Vec3 translation = b_mean - rotation * a_mean;

  RegistrationResult<Scalar> result;
  result.motion = RelativeMotion<Scalar>(rotation, translation, current.frame_index());
  const Matrix3X<Scalar> residual = result.motion.apply(a) - b;
  result.rms_error = std::sqrt(residual.squaredNorm() / static_cast<Scalar>(m));
  result.marker_covariance_rank = rank;
  return result;
}

/// Registers every frame against frames[0]. The entry for the reference frame
/// is the exact identity. Errors carry the index of the offending frame.
template <std::floating_point Scalar>
MotionSequence<Scalar> register_sequence(std::span<const MarkerFrame<Scalar>> frames,
                                         Scalar rank_tolerance = Scalar(1e-8)) {
  if (frames.size() < 2) {
    throw Error(ErrorCode::TooFewFrames, "registration needs at least 2 frames");
  }
  std::vector<RelativeMotion<Scalar>> motions;
  motions.reserve(frames.size());
  motions.push_back(RelativeMotion<Scalar>::identity(frames[0].frame_index()));
  for (std::size_t k = 1; k < frames.size(); ++k) {
    if (frames[k].size() != frames[0].size()) {
      throw Error(ErrorCode::MismatchedFrames,
                  "frame " + std::to_string(frames[k].frame_index()) + " has " +
                      std::to_string(frames[k].size()) + " markers, reference has " +
                      std::to_string(frames[0].size()),
                  frames[k].frame_index());
    }
    motions.push_back(register_frames(frames[0], frames[k], rank_tolerance).motion);
  }
  return MotionSequence<Scalar>(std::move(motions));
}

template <std::floating_point Scalar>
MotionSequence<Scalar> register_sequence(const std::vector<MarkerFrame<Scalar>>& frames,
                                         Scalar rank_tolerance = Scalar(1e-8)) {
  return register_sequence(std::span<const MarkerFrame<Scalar>>(frames), rank_tolerance);
}

using RegistrationResultd = RegistrationResult<double>;

}  // namespace extrinsic

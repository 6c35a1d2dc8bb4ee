#pragma once

// Constraint estimators: localize a fixed point, a fixed direction, or a
// sliding line contact from a sequence of relative motions.
//
// All three stack one linear constraint block per motion and solve the
// resulting least-squares problem by SVD. The stacked blocks, (I - R_k) and
// n_k^T (R_k - I), are dimensionless, so a singular value counts as zero
// when it falls below rank_tolerance * max(sigma_max, 1). Near-identity
// rotations make every system singular; ConditioningReport exposes how close
// a given sequence is to that limit.

#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "extrinsic/constraints.hpp"
#include "extrinsic/core.hpp"

namespace extrinsic {

template <std::floating_point Scalar>
struct EstimatorConfig {
  Scalar angle_threshold = Scalar(0.035);  // ~2 degrees
  Scalar cond_threshold = Scalar(1e6);
  Scalar rank_tolerance = Scalar(1e-8);
  int min_frames = 3;  // counts the reference frame
  bool strict = false;  // raise IllConditioned instead of only flagging

  void validate() const {
    if (!(angle_threshold > 0) || !(cond_threshold > 0) || !(rank_tolerance > 0)) {
      throw Error(ErrorCode::InvalidArgument, "estimator thresholds must be positive");
    }
    if (min_frames < 2) {
      throw Error(ErrorCode::InvalidArgument, "min_frames counts the reference frame and must be at least 2");
    }
  }
};

/// The object's contacting face at each frame: n_k . x = c_k.
template <std::floating_point Scalar>
class PlaneTrack {
 public:
  PlaneTrack() = default;

  PlaneTrack(std::vector<Vector3<Scalar>> normals, std::vector<Scalar> offsets)
      : normals_(std::move(normals)), offsets_(std::move(offsets)) {
    if (normals_.size() != offsets_.size()) {
      throw Error(ErrorCode::InvalidArgument, "plane track normals and offsets differ in length");
    }
    for (const auto& n : normals_) {
      if (std::abs(n.norm() - Scalar(1)) > detail::invariant_tolerance<Scalar>()) {
        throw Error(ErrorCode::InvalidArgument, "plane normals must have unit norm");
      }
    }
  }

  std::size_t size() const noexcept { return normals_.size(); }
  const std::vector<Vector3<Scalar>>& normals() const noexcept { return normals_; }
  const std::vector<Scalar>& offsets() const noexcept { return offsets_; }

 private:
  std::vector<Vector3<Scalar>> normals_;
  std::vector<Scalar> offsets_;
};

namespace detail {

template <std::floating_point Scalar>
bool negligible(Scalar sigma, Scalar sigma_max, Scalar rank_tolerance) {
  return sigma <= rank_tolerance * std::max(sigma_max, Scalar(1));
}

template <std::floating_point Scalar>
void require_frames(const MotionSequence<Scalar>& motions, const EstimatorConfig<Scalar>& config) {
  config.validate();
  if (motions.frame_count() < static_cast<std::size_t>(config.min_frames)) {
    throw Error(ErrorCode::TooFewFrames, "need at least " + std::to_string(config.min_frames) +
                                             " frames, got " + std::to_string(motions.frame_count()));
  }
}

template <std::floating_point Scalar>
void check_strict(const ConditioningReport<Scalar>& report, const EstimatorConfig<Scalar>& config) {
  if (config.strict && !(report.condition_number <= config.cond_threshold)) {
    throw Error(ErrorCode::IllConditioned,
                "condition number " + std::to_string(report.condition_number) + " exceeds " +
                    std::to_string(config.cond_threshold));
  }
}

/// Flips v so that its first component with |c| > 1e-12 is positive.
template <std::floating_point Scalar>
Vector3<Scalar> canonical_sign(const Vector3<Scalar>& v) {
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v(i)) > Scalar(1e-12)) return v(i) < 0 ? Vector3<Scalar>(-v) : v;
  }
  return v;
}

/// Orthonormal basis of the plane orthogonal to unit vector l, as columns.
template <std::floating_point Scalar>
Eigen::Matrix<Scalar, 3, 2> orthogonal_complement(const Vector3<Scalar>& l) {
  Eigen::Index weakest;
  l.cwiseAbs().minCoeff(&weakest);
  const Vector3<Scalar> u = l.cross(Vector3<Scalar>::Unit(weakest)).normalized();
  Eigen::Matrix<Scalar, 3, 2> basis;
  basis.col(0) = u;
  basis.col(1) = l.cross(u).normalized();
  return basis;
}

template <std::floating_point Scalar>
struct LinePointSolution {
  Vector3<Scalar> point;    // on the edge, closest to the origin
  Vector3<Scalar> optimum;  // least-squares minimizer of the full system
  Scalar smallest_singular_value;
  Scalar condition_number;
};

template <std::floating_point Scalar>
LinePointSolution<Scalar> solve_line_point(const MotionSequence<Scalar>& motions,
                                           const PlaneTrack<Scalar>& track,
                                           const Vector3<Scalar>& direction,
                                           const EstimatorConfig<Scalar>& config) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  config.validate();
  if (track.size() != motions.size()) {
    throw Error(ErrorCode::InvalidArgument, "plane track and motion sequence differ in length");
  }
  if (std::abs(direction.norm() - Scalar(1)) > invariant_tolerance<Scalar>()) {
    throw Error(ErrorCode::InvalidArgument, "edge direction must have unit norm");
  }

  const auto n = static_cast<Eigen::Index>(motions.size());
  MatrixX a(n, 3);
  VectorX b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& m = motions[static_cast<std::size_t>(k)];
    const Vector3<Scalar>& normal = track.normals()[static_cast<std::size_t>(k)];
    a.row(k) = normal.transpose() * (m.rotation() - Matrix3<Scalar>::Identity());
    b(k) = -normal.dot(m.translation());
  }

  // Transverse to the edge the system must have full rank; this 2-column
  // reduction carries the conditioning report.
  const Eigen::Matrix<Scalar, 3, 2> basis = orthogonal_complement(direction);
  const Eigen::JacobiSVD<MatrixX> reduced(a * basis);
  const VectorX sigma = reduced.singularValues();
  const Scalar sigma_max = sigma.size() > 0 ? sigma(0) : Scalar(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (!negligible(sigma(i), sigma_max, config.rank_tolerance)) ++rank;
  }
  if (rank < 2) {
    throw Error(ErrorCode::RankDeficientBeyondLine,
                "edge position transverse to the edge is undetermined (rank " + std::to_string(rank) + ")");
  }

  // Minimum-norm least squares over all three unknowns. Noiseless data leave
  // the edge direction in the null space and the solution is already the
  // edge point closest to the origin; with noise the solution is unique and
  // is slid along the edge to that representative.
  Eigen::JacobiSVD<MatrixX> full(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorX s = full.singularValues();
  const VectorX ub = full.matrixU().transpose() * b;
  VectorX y = VectorX::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (!negligible(s(i), s(0), config.rank_tolerance)) y(i) = ub(i) / s(i);
  }
  const Vector3<Scalar> optimum = full.matrixV() * y;
  const Vector3<Scalar> point = optimum - optimum.dot(direction) * direction;
  return {point, optimum, sigma(1), sigma(0) / sigma(1)};
}

}  // namespace detail

/// Body point P_b that stays fixed in the world: least squares on the stacked
/// system (I - R_k) P_b = t_k, solved by truncated SVD (minimum-norm when the
/// stack is rank deficient). A poorly conditioned sequence is flagged in the
/// report and only raises IllConditioned in strict mode.
template <std::floating_point Scalar>
ContactEstimate<Scalar> estimate_fixed_point(const MotionSequence<Scalar>& motions,
                                             const EstimatorConfig<Scalar>& config = {}) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  detail::require_frames(motions, config);

  const auto n = static_cast<Eigen::Index>(motions.size());
  MatrixX a(3 * n, 3);
  VectorX r(3 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& m = motions[static_cast<std::size_t>(k)];
    a.template block<3, 3>(3 * k, 0) = Matrix3<Scalar>::Identity() - m.rotation();
    r.template segment<3>(3 * k) = m.translation();
  }

  Eigen::JacobiSVD<MatrixX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorX sigma = svd.singularValues();
  const VectorX projected = svd.matrixU().transpose() * r;

  Vector3<Scalar> point = Vector3<Scalar>::Zero();
  for (int i = 0; i < 3; ++i) {
    if (!detail::negligible(sigma(i), sigma(0), config.rank_tolerance)) {
      point += svd.matrixV().col(i) * (projected(i) / sigma(i));
    }
  }

  const Scalar condition = detail::negligible(sigma(2), sigma(0), config.rank_tolerance)
                               ? std::numeric_limits<Scalar>::infinity()
                               : sigma(0) / sigma(2);
  const auto report = make_conditioning_report(max_rotation_angle(motions), sigma(2), condition,
                                               config.angle_threshold, config.cond_threshold);
  detail::check_strict(report, config);

  const auto residuals =
      evaluate_residuals(motions, [&](const RelativeMotion<Scalar>& m) { return fixed_point_residual(m, point); });
  return ContactEstimate<Scalar>::fixed_point(point, root_mean_square(residuals), report);
}

/// Body direction e_b unchanged by every rotation: the right singular vector
/// of the stacked (R_k - I) with the smallest singular value. The
/// conditioning report uses the two remaining singular values, since the
/// answer is determined by the gap above the null space.
template <std::floating_point Scalar>
ContactEstimate<Scalar> estimate_fixed_direction(const MotionSequence<Scalar>& motions,
                                                 const EstimatorConfig<Scalar>& config = {}) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  detail::require_frames(motions, config);

  const auto n = static_cast<Eigen::Index>(motions.size());
  MatrixX stack(3 * n, 3);
  for (Eigen::Index k = 0; k < n; ++k) {
    stack.template block<3, 3>(3 * k, 0) =
        motions[static_cast<std::size_t>(k)].rotation() - Matrix3<Scalar>::Identity();
  }
  Eigen::JacobiSVD<MatrixX> svd(stack, Eigen::ComputeThinV);
  const auto sigma = svd.singularValues();
  if (detail::negligible(sigma(1), sigma(0), config.rank_tolerance)) {
    throw Error(ErrorCode::AmbiguousDirection, "rotations leave a subspace of dimension >= 2 unchanged");
  }

  const Vector3<Scalar> direction = detail::canonical_sign<Scalar>(svd.matrixV().col(2).normalized());
  const auto report = make_conditioning_report(max_rotation_angle(motions), sigma(1), sigma(0) / sigma(1),
                                               config.angle_threshold, config.cond_threshold);
  detail::check_strict(report, config);

  const auto residuals = evaluate_residuals(
      motions, [&](const RelativeMotion<Scalar>& m) { return fixed_direction_residual(m, direction); });
  return ContactEstimate<Scalar>::fixed_direction(direction, root_mean_square(residuals), report);
}

/// Carries the contacting face through the motions: n_k = R_k n0 and
/// c_k = n_k . (R_k x0 + t_k).
template <std::floating_point Scalar>
PlaneTrack<Scalar> propagate_plane(const Vector3<Scalar>& n0, const std::type_identity_t<Vector3<Scalar>>& x0_hint,
                                   const MotionSequence<Scalar>& motions) {
  if (!detail::all_finite(n0) || std::abs(n0.norm() - Scalar(1)) > detail::invariant_tolerance<Scalar>()) {
    throw Error(ErrorCode::InvalidArgument, "face normal n0 must be a unit vector");
  }
  if (!detail::all_finite(x0_hint)) {
    throw Error(ErrorCode::InvalidArgument, "plane point must be finite");
  }
  std::vector<Vector3<Scalar>> normals;
  std::vector<Scalar> offsets;
  normals.reserve(motions.size());
  offsets.reserve(motions.size());
  for (const auto& m : motions) {
    const Vector3<Scalar> normal = (m.rotation() * n0).normalized();
    normals.push_back(normal);
    offsets.push_back(normal.dot(m.apply(x0_hint)));
  }
  return PlaneTrack<Scalar>(std::move(normals), std::move(offsets));
}

/// Edge direction l minimizing sum_k (n_k . l)^2 subject to |l| = 1: the
/// eigenvector of sum_k n_k n_k^T with the smallest eigenvalue.
template <std::floating_point Scalar>
Vector3<Scalar> estimate_line_direction(const PlaneTrack<Scalar>& track,
                                        const EstimatorConfig<Scalar>& config = {}) {
  config.validate();
  if (track.size() < static_cast<std::size_t>(config.min_frames)) {
    throw Error(ErrorCode::TooFewFrames, "need at least " + std::to_string(config.min_frames) +
                                             " planes, got " + std::to_string(track.size()));
  }
  Matrix3<Scalar> scatter = Matrix3<Scalar>::Zero();
  for (const auto& n : track.normals()) scatter.noalias() += n * n.transpose();

  Eigen::SelfAdjointEigenSolver<Matrix3<Scalar>> eig(scatter);
  const Vector3<Scalar>& lambda = eig.eigenvalues();  // ascending
  if (lambda(1) - lambda(0) <= config.rank_tolerance * std::max(lambda(2), Scalar(1))) {
    throw Error(ErrorCode::AmbiguousDirection, "face normals span at most one dimension");
  }
  return detail::canonical_sign<Scalar>(eig.eigenvectors().col(0).normalized());
}

/// Point on the contact edge, from sum_k (n_k . (R_k x0 + t_k - x0))^2.
/// The returned point lies on the line through the least-squares optimum
/// along `direction`, at its closest approach to the origin.
template <std::floating_point Scalar>
Vector3<Scalar> estimate_line_point(const MotionSequence<Scalar>& motions, const PlaneTrack<Scalar>& track,
                                    const Vector3<Scalar>& direction,
                                    const EstimatorConfig<Scalar>& config = {}) {
  return detail::solve_line_point(motions, track, direction, config).point;
}

/// Sliding line contact: edge direction and point given the contacting face
/// normal n0 in the reference frame.
template <std::floating_point Scalar>
ContactEstimate<Scalar> estimate_line_contact(const MotionSequence<Scalar>& motions, const Vector3<Scalar>& n0,
                                              const EstimatorConfig<Scalar>& config = {}) {
  detail::require_frames(motions, config);
  const PlaneTrack<Scalar> track = propagate_plane<Scalar>(n0, Vector3<Scalar>::Zero(), motions);
  const Vector3<Scalar> direction = estimate_line_direction(track, config);
  const auto solution = detail::solve_line_point(motions, track, direction, config);

  const auto report = make_conditioning_report(max_rotation_angle(motions), solution.smallest_singular_value,
                                               solution.condition_number, config.angle_threshold,
                                               config.cond_threshold);
  detail::check_strict(report, config);

  const auto residuals = evaluate_residuals(
      motions, [&](const RelativeMotion<Scalar>& m) { return plane_residual(m, n0, solution.optimum); });
  return ContactEstimate<Scalar>::line_contact(direction, solution.point, root_mean_square(residuals), report);
}

using EstimatorConfigd = EstimatorConfig<double>;
using PlaneTrackd = PlaneTrack<double>;

}  // namespace extrinsic

#pragma once

// Domain types shared by registration, estimators, simulator and io.
//
// Every type here is an immutable value type templated on the scalar. All
// motions are expressed relative to the initial frame (0 -> k); incremental
// transforms are obtained with compose() and inverse().

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "extrinsic/errors.hpp"

namespace extrinsic {

template <std::floating_point Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <std::floating_point Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <std::floating_point Scalar>
using Matrix3X = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

namespace detail {

// Tolerance used for structural invariants (unit norms, identity checks):
// 1e-9 for double, relaxed to sqrt(eps) for narrower types.
template <std::floating_point Scalar>
Scalar invariant_tolerance() {
  return std::max(Scalar(1e-9), Scalar(4) * std::sqrt(std::numeric_limits<Scalar>::epsilon()));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.array().isFinite().all();
}

}  // namespace detail

/// Rigid transform x -> R x + t of the object from the initial frame to frame
/// `frame_index`. The rotation is projected onto SO(3) on construction.
template <std::floating_point Scalar>
class RelativeMotion {
 public:
  using Vec3 = Vector3<Scalar>;
  using Mat3 = Matrix3<Scalar>;

  RelativeMotion() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  RelativeMotion(const Mat3& rotation, const Vec3& translation, std::size_t frame_index = 0)
      : rotation_(project_to_rotation(rotation)),
        translation_(translation),
        frame_index_(frame_index) {
    if (!detail::all_finite(translation)) {
      throw Error(ErrorCode::InvalidArgument, "translation has non-finite entries", frame_index);
    }
  }

  static RelativeMotion identity(std::size_t frame_index = 0) {
    RelativeMotion m;
    m.frame_index_ = frame_index;
    return m;
  }

  static RelativeMotion from_axis_angle(const Vec3& axis, Scalar angle,
                                        const Vec3& translation = Vec3::Zero(),
                                        std::size_t frame_index = 0) {
    if (!(axis.norm() > Scalar(0))) {
      throw Error(ErrorCode::InvalidArgument, "rotation axis must be nonzero");
    }
    return RelativeMotion(Eigen::AngleAxis<Scalar>(angle, axis.normalized()).toRotationMatrix(),
                          translation, frame_index);
  }

  static RelativeMotion translation_only(const Vec3& translation, std::size_t frame_index = 0) {
    return RelativeMotion(Mat3::Identity(), translation, frame_index);
  }

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }
  std::size_t frame_index() const noexcept { return frame_index_; }

  RelativeMotion with_frame_index(std::size_t frame_index) const {
    RelativeMotion m = *this;
    m.frame_index_ = frame_index;
    return m;
  }

  Vec3 apply(const Vec3& point) const { return rotation_ * point + translation_; }

  Matrix3X<Scalar> apply(const Matrix3X<Scalar>& points) const {
    return (rotation_ * points).colwise() + translation_;
  }

  RelativeMotion inverse() const {
    RelativeMotion m;
    m.rotation_ = rotation_.transpose();
    m.translation_ = -(rotation_.transpose() * translation_);
    m.frame_index_ = frame_index_;
    return m;
  }

  bool is_approx(const RelativeMotion& other, Scalar tolerance) const {
    return (rotation_ - other.rotation_).norm() <= tolerance &&
           (translation_ - other.translation_).norm() <= tolerance;
  }

  /// Nearest proper rotation in Frobenius norm (polar factor). Rejects
  /// non-finite input and reflections.
  static Mat3 project_to_rotation(const Mat3& m) {
    if (!detail::all_finite(m)) {
      throw Error(ErrorCode::InvalidArgument, "rotation has non-finite entries");
    }
    if (!(m.determinant() > Scalar(0))) {
      throw Error(ErrorCode::InvalidArgument, "rotation matrix is singular or a reflection");
    }
    // Already orthonormal to rounding: keep the caller's bits.
    if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() <= 8 * std::numeric_limits<Scalar>::epsilon()) {
      return m;
    }
    Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < Scalar(0)) {
      throw Error(ErrorCode::InvalidArgument, "rotation matrix is a reflection");
    }
    return r;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
  std::size_t frame_index_ = 0;
};

/// a * b: apply b first, then a. The result carries a's frame index.
template <std::floating_point Scalar>
RelativeMotion<Scalar> compose(const RelativeMotion<Scalar>& a, const RelativeMotion<Scalar>& b) {
  // Product of two proper rotations drifts by O(eps); re-project.
  return RelativeMotion<Scalar>(a.rotation() * b.rotation(),
                                a.rotation() * b.translation() + a.translation(),
                                a.frame_index());
}

template <std::floating_point Scalar>
RelativeMotion<Scalar> operator*(const RelativeMotion<Scalar>& a, const RelativeMotion<Scalar>& b) {
  return compose(a, b);
}

/// Geodesic angle of the rotation, in [0, pi]. Equal to
/// arccos((trace(R) - 1) / 2), evaluated through atan2 so that small angles
/// keep full precision.
template <std::floating_point Scalar>
Scalar rotation_angle(const RelativeMotion<Scalar>& m) {
  const Matrix3<Scalar>& r = m.rotation();
  const Scalar c = std::clamp((r.trace() - Scalar(1)) / Scalar(2), Scalar(-1), Scalar(1));
  const Vector3<Scalar> skew(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(skew.norm() / Scalar(2), c);
}

/// Positions of m tracked markers at one instant, one column per marker.
template <std::floating_point Scalar>
class MarkerFrame {
 public:
  MarkerFrame() = default;

  explicit MarkerFrame(Matrix3X<Scalar> positions, std::size_t frame_index = 0)
      : positions_(std::move(positions)), frame_index_(frame_index) {
    if (!detail::all_finite(positions_)) {
      throw Error(ErrorCode::NonFiniteValue, "marker frame has non-finite coordinates", frame_index);
    }
  }

  const Matrix3X<Scalar>& positions() const noexcept { return positions_; }
  std::size_t frame_index() const noexcept { return frame_index_; }
  Eigen::Index size() const noexcept { return positions_.cols(); }

 private:
  Matrix3X<Scalar> positions_;
  std::size_t frame_index_ = 0;
};

/// Ordered motions, each relative to frame 0. Frame indices are strictly
/// increasing and an entry for frame 0, when present, is the identity.
template <std::floating_point Scalar>
class MotionSequence {
 public:
  using value_type = RelativeMotion<Scalar>;
  using const_iterator = typename std::vector<value_type>::const_iterator;

  MotionSequence() = default;

  explicit MotionSequence(std::vector<value_type> motions) : motions_(std::move(motions)) {
    for (std::size_t i = 1; i < motions_.size(); ++i) {
      if (motions_[i].frame_index() <= motions_[i - 1].frame_index()) {
        throw Error(ErrorCode::InvalidArgument, "frame indices must be strictly increasing",
                    motions_[i].frame_index());
      }
    }
    if (!motions_.empty() && motions_.front().frame_index() == 0 &&
        !motions_.front().is_approx(value_type::identity(), detail::invariant_tolerance<Scalar>())) {
      throw Error(ErrorCode::InvalidArgument, "motion for frame 0 must be the identity", 0);
    }
  }

  /// Builds a sequence from motions in order, numbering them 1, 2, ...
  static MotionSequence from_motions(const std::vector<value_type>& motions) {
    std::vector<value_type> numbered;
    numbered.reserve(motions.size());
    for (std::size_t i = 0; i < motions.size(); ++i) {
      numbered.push_back(motions[i].with_frame_index(i + 1));
    }
    return MotionSequence(std::move(numbered));
  }

  std::size_t size() const noexcept { return motions_.size(); }
  bool empty() const noexcept { return motions_.empty(); }
  const value_type& operator[](std::size_t i) const { return motions_[i]; }
  const_iterator begin() const noexcept { return motions_.begin(); }
  const_iterator end() const noexcept { return motions_.end(); }
  const std::vector<value_type>& motions() const noexcept { return motions_; }

  /// Number of frames the sequence describes, counting the reference frame
  /// even when it has no explicit identity entry.
  std::size_t frame_count() const noexcept {
    if (motions_.empty()) return 0;
    return motions_.size() + (motions_.front().frame_index() == 0 ? 0 : 1);
  }

 private:
  std::vector<value_type> motions_;
};

/// Rigidly maps every motion of a sequence into a new world frame:
/// M_k -> G M_k G^-1.
template <std::floating_point Scalar>
MotionSequence<Scalar> conjugate(const MotionSequence<Scalar>& motions,
                                 const RelativeMotion<Scalar>& g) {
  std::vector<RelativeMotion<Scalar>> out;
  out.reserve(motions.size());
  const RelativeMotion<Scalar> g_inv = g.inverse();
  for (const auto& m : motions) {
    if (m.frame_index() == 0) {
      out.push_back(m);
    } else {
      out.push_back(compose(compose(g, m), g_inv).with_frame_index(m.frame_index()));
    }
  }
  return MotionSequence<Scalar>(std::move(out));
}

template <std::floating_point Scalar>
Scalar max_rotation_angle(const MotionSequence<Scalar>& motions) {
  Scalar best = 0;
  for (const auto& m : motions) best = std::max(best, rotation_angle(m));
  return best;
}

template <std::floating_point Scalar>
struct ConditioningReport {
  Scalar max_rotation_angle = 0;
  Scalar smallest_singular_value = 0;
  Scalar condition_number = std::numeric_limits<Scalar>::infinity();
  bool well_posed = false;
};

/// Fills well_posed from the angle and condition thresholds.
template <std::floating_point Scalar>
ConditioningReport<Scalar> make_conditioning_report(Scalar max_angle, Scalar smallest_singular_value,
                                                    Scalar condition_number,
                                                    Scalar angle_threshold,
                                                    Scalar cond_threshold) {
  ConditioningReport<Scalar> report;
  report.max_rotation_angle = max_angle;
  report.smallest_singular_value = smallest_singular_value;
  report.condition_number = condition_number;
  report.well_posed = max_angle >= angle_threshold && condition_number <= cond_threshold;
  return report;
}

enum class ContactKind { FixedPoint, FixedDirection, LineContact };

constexpr std::string_view to_string(ContactKind kind) noexcept {
  switch (kind) {
    case ContactKind::FixedPoint: return "fixed_point";
    case ContactKind::FixedDirection: return "fixed_direction";
    case ContactKind::LineContact: return "line_contact";
  }
  return "unknown";
}

/// Result of one estimator. FixedPoint carries a point, FixedDirection a unit
/// direction, LineContact both (edge direction and the point on the edge
/// closest to the origin).
template <std::floating_point Scalar>
class ContactEstimate {
 public:
  using Vec3 = Vector3<Scalar>;

  static ContactEstimate fixed_point(const Vec3& point, Scalar residual_rms,
                                     const ConditioningReport<Scalar>& conditioning) {
    return ContactEstimate(ContactKind::FixedPoint, point, std::nullopt, residual_rms, conditioning);
  }

  static ContactEstimate fixed_direction(const Vec3& direction, Scalar residual_rms,
                                         const ConditioningReport<Scalar>& conditioning) {
    return ContactEstimate(ContactKind::FixedDirection, std::nullopt, direction, residual_rms,
                           conditioning);
  }

  static ContactEstimate line_contact(const Vec3& direction, const Vec3& point, Scalar residual_rms,
                                      const ConditioningReport<Scalar>& conditioning) {
    return ContactEstimate(ContactKind::LineContact, point, direction, residual_rms, conditioning);
  }

  ContactKind kind() const noexcept { return kind_; }
  const std::optional<Vec3>& point() const noexcept { return point_; }
  const std::optional<Vec3>& direction() const noexcept { return direction_; }
  Scalar residual_rms() const noexcept { return residual_rms_; }
  const ConditioningReport<Scalar>& conditioning() const noexcept { return conditioning_; }

 private:
  ContactEstimate(ContactKind kind, std::optional<Vec3> point, std::optional<Vec3> direction,
                  Scalar residual_rms, const ConditioningReport<Scalar>& conditioning)
      : kind_(kind),
        point_(std::move(point)),
        direction_(std::move(direction)),
        residual_rms_(residual_rms),
        conditioning_(conditioning) {
    if (direction_ && std::abs(direction_->norm() - Scalar(1)) > detail::invariant_tolerance<Scalar>()) {
      throw Error(ErrorCode::InvalidArgument, "contact direction must have unit norm");
    }
    if (!(residual_rms_ >= Scalar(0))) {
      throw Error(ErrorCode::InvalidArgument, "residual_rms must be nonnegative");
    }
  }

  ContactKind kind_;
  std::optional<Vec3> point_;
  std::optional<Vec3> direction_;
  Scalar residual_rms_;
  ConditioningReport<Scalar> conditioning_;
};

using RelativeMotiond = RelativeMotion<double>;
using MarkerFramed = MarkerFrame<double>;
using MotionSequenced = MotionSequence<double>;
using ContactEstimated = ContactEstimate<double>;
using ConditioningReportd = ConditioningReport<double>;

}  // namespace extrinsic

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace hairstrand {

/// Position in millimeters.
using Point3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using StrandId = std::int64_t;

/// Segments shorter than this (mm) are degenerate.
inline constexpr double kMinSegmentLength = 1e-6;
inline constexpr double kUnitTolerance = 1e-9;

inline constexpr double kDefaultThickness = 0.05;
/// Strands loaded from files without a mask channel count as hair.
inline constexpr double kDefaultMaskLogit = 10.0;
inline constexpr double kDefaultOpacityLogit = 10.0;

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Unit-length direction. Construction normalizes, so the invariant always holds.
class Dir3 {
 public:
  Dir3() : v_(1.0, 0.0, 0.0) {}

  /// Throws DegenerateSegment when `v` has (near) zero length.
  static Dir3 normalized(const Eigen::Vector3d& v);
  static std::optional<Dir3> try_normalized(const Eigen::Vector3d& v);

  const Eigen::Vector3d& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }
  double dot(const Dir3& o) const noexcept { return v_.dot(o.v_); }
  Dir3 operator-() const noexcept { return Dir3(-v_); }

 private:
  explicit Dir3(const Eigen::Vector3d& unit) : v_(unit) {}
  Eigen::Vector3d v_;
};

/// One anisotropic 3D Gaussian. Opacity and mask are kept as logits.
struct GaussianSegment {
  Point3 mu = Point3::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Ones();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  double opacity_logit = kDefaultOpacityLogit;
  double mask_logit = kDefaultMaskLogit;
  Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);

  double opacity() const { return sigmoid(opacity_logit); }
  double mask() const { return sigmoid(mask_logit); }
};

struct StrandAttributes {
  double mask_logit = kDefaultMaskLogit;
  double opacity_logit = kDefaultOpacityLogit;
  Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
};

/// Polyline hair strand. Immutable once built; the constructor enforces
/// at least two joints, distinct consecutive joints and positive thickness.
class Strand {
 public:
  Strand(StrandId id, std::vector<Point3> joints, std::vector<double> thickness,
         StrandAttributes attributes = {});

  /// Uniform thickness on every segment.
  static Strand with_uniform_thickness(StrandId id, std::vector<Point3> joints,
                                       double thickness = kDefaultThickness,
                                       StrandAttributes attributes = {});

  StrandId id() const noexcept { return id_; }
  std::span<const Point3> joints() const noexcept { return joints_; }
  std::span<const double> thickness() const noexcept { return thickness_; }
  const StrandAttributes& attributes() const noexcept { return attributes_; }
  double mask_logit() const noexcept { return attributes_.mask_logit; }
  double opacity_logit() const noexcept { return attributes_.opacity_logit; }
  const Eigen::Vector3d& color() const noexcept { return attributes_.color; }

  std::size_t joint_count() const noexcept { return joints_.size(); }
  std::size_t segment_count() const noexcept { return joints_.size() - 1; }

  Strand with_id(StrandId id) const;
  /// Same attributes and thickness, new joint positions (same count).
  Strand with_joints(std::vector<Point3> joints) const;
  /// Joint order and thickness order reversed.
  Strand reversed() const;

 private:
  StrandId id_;
  std::vector<Point3> joints_;
  std::vector<double> thickness_;
  StrandAttributes attributes_;
};

/// A collection of strands with unique ids. Coordinates are millimeters;
/// `unit_scale` records mm per unit of the file the set came from.
class StrandSet {
 public:
  StrandSet() = default;
  explicit StrandSet(std::vector<Strand> strands, double unit_scale = 1.0);

  std::span<const Strand> strands() const noexcept { return strands_; }
  std::size_t size() const noexcept { return strands_.size(); }
  bool empty() const noexcept { return strands_.empty(); }
  const Strand& operator[](std::size_t i) const { return strands_[i]; }
  double unit_scale() const noexcept { return unit_scale_; }

  std::size_t total_joints() const;
  /// Moves the strands out; the set is left empty.
  std::vector<Strand> release() &&;

 private:
  std::vector<Strand> strands_;
  double unit_scale_ = 1.0;
};

/// Rotation taking (1,0,0) onto `direction` (Rodrigues form).
Mat3 rodrigues_align(const Dir3& direction);

/// Cylinder-like Gaussian spanning the segment a→b.
GaussianSegment segment_to_gaussian(const Point3& a, const Point3& b, double thickness,
                                    const StrandAttributes& attributes = {});

/// R S Sᵀ Rᵀ.
Mat3 covariance(const GaussianSegment& g);

/// Two-joint strand along the Gaussian's major axis, joints at mu ± s_x/2.
Strand gaussian_to_strand(const GaussianSegment& g, StrandId id = 0);

double strand_length(const Strand& s);
double strand_length(std::span<const Point3> joints);

/// Applies p ↦ rotation·p + translation to every joint.
StrandSet transform(const StrandSet& set, const Mat3& rotation, const Eigen::Vector3d& translation);

}  // namespace hairstrand

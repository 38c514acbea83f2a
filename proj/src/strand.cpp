#include "hairstrand/strand.hpp"

#include "hairstrand/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <unordered_set>

namespace hairstrand {

Dir3 Dir3::normalized(const Eigen::Vector3d& v) {
  auto d = try_normalized(v);
  if (!d) {
    throw DegenerateSegment("cannot normalize a zero-length direction");
  }
  return *d;
}

std::optional<Dir3> Dir3::try_normalized(const Eigen::Vector3d& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    return std::nullopt;
  }
  return Dir3(v / n);
}

Strand::Strand(StrandId id, std::vector<Point3> joints, std::vector<double> thickness,
               StrandAttributes attributes)
    : id_(id), joints_(std::move(joints)), thickness_(std::move(thickness)),
      attributes_(std::move(attributes)) {
  if (joints_.size() < 2) {
    throw InvalidArgument(fmt::format("strand {} needs at least two joints", id_));
  }
  if (thickness_.size() != joints_.size() - 1) {
    throw InvalidArgument(fmt::format("strand {}: {} thickness values for {} segments", id_,
                                      thickness_.size(), joints_.size() - 1));
  }
  for (const auto& p : joints_) {
    if (!p.allFinite()) {
      throw InvalidArgument(fmt::format("strand {} has a non-finite joint", id_));
    }
  }
  for (std::size_t j = 0; j + 1 < joints_.size(); ++j) {
    if ((joints_[j + 1] - joints_[j]).norm() <= kMinSegmentLength) {
      throw DegenerateSegment(fmt::format("strand {}: joints {} and {} coincide", id_, j, j + 1));
    }
    if (!(thickness_[j] > 0.0)) {
      throw InvalidArgument(fmt::format("strand {}: thickness {} is not positive", id_, j));
    }
  }
}

Strand Strand::with_uniform_thickness(StrandId id, std::vector<Point3> joints, double thickness,
                                      StrandAttributes attributes) {
  std::vector<double> t(joints.empty() ? 0 : joints.size() - 1, thickness);
  return Strand(id, std::move(joints), std::move(t), std::move(attributes));
}

Strand Strand::with_id(StrandId id) const {
  Strand s = *this;
  s.id_ = id;
  return s;
}

Strand Strand::with_joints(std::vector<Point3> joints) const {
  return Strand(id_, std::move(joints), thickness_, attributes_);
}

Strand Strand::reversed() const {
  Strand s = *this;
  std::reverse(s.joints_.begin(), s.joints_.end());
  std::reverse(s.thickness_.begin(), s.thickness_.end());
  return s;
}

StrandSet::StrandSet(std::vector<Strand> strands, double unit_scale)
    : strands_(std::move(strands)), unit_scale_(unit_scale) {
  if (!(unit_scale_ > 0.0)) {
    throw InvalidArgument("unit_scale must be positive");
  }
  std::unordered_set<StrandId> seen;
  seen.reserve(strands_.size());
  for (const auto& s : strands_) {
    if (!seen.insert(s.id()).second) {
      throw InvalidArgument(fmt::format("duplicate strand id {}", s.id()));
    }
  }
}

std::size_t StrandSet::total_joints() const {
  std::size_t n = 0;
  for (const auto& s : strands_) n += s.joint_count();
  return n;
}

std::vector<Strand> StrandSet::release() && { return std::move(strands_); }

namespace {

// Rodrigues form R = I + K + K²/(1 + x̂·d) with K = [x̂ × d]ₓ.
Mat3 rodrigues_core(const Eigen::Vector3d& d) {
  const Eigen::Vector3d k = Eigen::Vector3d::UnitX().cross(d);
  Mat3 K;
  K << 0.0, -k.z(), k.y(),
       k.z(), 0.0, -k.x(),
       -k.y(), k.x(), 0.0;
  return Mat3::Identity() + K + K * K / (1.0 + d.x());
}

}  // namespace

Mat3 rodrigues_align(const Dir3& direction) {
  const Eigen::Vector3d& d = direction.vec();
  // The closed form loses precision as 1 + x̂·d → 0. On the far hemisphere
  // we align against the direction mirrored by a half turn about z and
  // apply the half turn afterwards; at d = -x̂ this is exactly diag(-1,-1,1).
  if (d.x() < -0.5) {
    const Mat3 half_turn_z = Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
    return half_turn_z * rodrigues_core(half_turn_z * d);
  }
  return rodrigues_core(d);
}

GaussianSegment segment_to_gaussian(const Point3& a, const Point3& b, double thickness,
                                    const StrandAttributes& attributes) {
  const Eigen::Vector3d delta = b - a;
  const double length = delta.norm();
  if (!(length > kMinSegmentLength)) {
    throw DegenerateSegment("segment endpoints coincide");
  }
  if (!(thickness > 0.0)) {
    throw InvalidArgument("thickness must be positive");
  }
  GaussianSegment g;
  g.mu = 0.5 * (a + b);
  g.scale = Eigen::Vector3d(length, thickness, thickness);
  g.rotation = Eigen::Quaterniond(rodrigues_align(Dir3::normalized(delta))).normalized();
  g.opacity_logit = attributes.opacity_logit;
  g.mask_logit = attributes.mask_logit;
  g.color = attributes.color;
  return g;
}

Mat3 covariance(const GaussianSegment& g) {
  const Mat3 R = g.rotation.normalized().toRotationMatrix();
  const Mat3 S = g.scale.asDiagonal();
  const Mat3 RS = R * S;
  return RS * RS.transpose();
}

Strand gaussian_to_strand(const GaussianSegment& g, StrandId id) {
  const Eigen::Vector3d axis = g.rotation.normalized() * Eigen::Vector3d::UnitX();
  const Eigen::Vector3d half = 0.5 * g.scale.x() * axis;
  StrandAttributes attrs{g.mask_logit, g.opacity_logit, g.color};
  return Strand(id, {g.mu - half, g.mu + half}, {g.scale.y()}, attrs);
}

double strand_length(std::span<const Point3> joints) {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < joints.size(); ++j) {
    total += (joints[j + 1] - joints[j]).norm();
  }
  return total;
}

double strand_length(const Strand& s) { return strand_length(s.joints()); }

StrandSet transform(const StrandSet& set, const Mat3& rotation,
                    const Eigen::Vector3d& translation) {
  std::vector<Strand> out;
  out.reserve(set.size());
  for (const auto& s : set.strands()) {
    std::vector<Point3> joints;
    joints.reserve(s.joint_count());
    for (const auto& p : s.joints()) joints.push_back(rotation * p + translation);
    out.push_back(s.with_joints(std::move(joints)));
  }
  return StrandSet(std::move(out), set.unit_scale());
}

}  // namespace hairstrand

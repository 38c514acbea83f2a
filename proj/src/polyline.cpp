#include "hairstrand/polyline.hpp"

#include "hairstrand/error.hpp"

#include <algorithm>
#include <cmath>

namespace hairstrand {

std::vector<double> cumulative_lengths(std::span<const Point3> joints) {
  std::vector<double> c(joints.size(), 0.0);
  for (std::size_t j = 1; j < joints.size(); ++j) {
    c[j] = c[j - 1] + (joints[j] - joints[j - 1]).norm();
  }
  return c;
}

std::size_t arc_sample_count(double length, double spacing) {
  if (length < spacing) return 1;
  return static_cast<std::size_t>(std::floor(length / spacing + 1e-9)) + 1;
}

namespace {

std::size_t segment_at(std::span<const double> cumulative, double s) {
  // Largest i with C_i <= s, restricted to valid segment indices.
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
  std::size_t i = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
  return std::min(i, cumulative.size() - 2);
}

}  // namespace

Point3 point_at_arc(std::span<const Point3> joints, std::span<const double> cumulative, double s) {
  s = std::clamp(s, 0.0, cumulative.back());
  const std::size_t i = segment_at(cumulative, s);
  const double seg = cumulative[i + 1] - cumulative[i];
  const double w = seg > 0.0 ? (s - cumulative[i]) / seg : 0.0;
  return joints[i] + w * (joints[i + 1] - joints[i]);
}

std::vector<ArcSample> sample_by_arc_length(std::span<const Point3> joints, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("sample spacing must be positive");
  if (joints.size() < 2) return {};
  const auto cumulative = cumulative_lengths(joints);
  const double length = cumulative.back();
  std::vector<ArcSample> out;

  if (length < spacing) {
    ArcSample a;
    a.arc = 0.5 * length;
    a.segment = segment_at(cumulative, a.arc);
    const Eigen::Vector3d u = joints[a.segment + 1] - joints[a.segment];
    a.position = joints[a.segment] + (a.arc - cumulative[a.segment]) / u.norm() * u;
    a.direction = Dir3::normalized(joints.back() - joints.front());
    a.chord = true;
    out.push_back(a);
    return out;
  }

  const std::size_t n = arc_sample_count(length, spacing);
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    ArcSample a;
    a.arc = std::min(static_cast<double>(k) * spacing, length);
    a.segment = segment_at(cumulative, a.arc);
    const Eigen::Vector3d u = joints[a.segment + 1] - joints[a.segment];
    const double seg = u.norm();
    a.position = joints[a.segment] + (a.arc - cumulative[a.segment]) / seg * u;
    a.direction = Dir3::normalized(u);
    out.push_back(a);
  }
  return out;
}

}  // namespace hairstrand

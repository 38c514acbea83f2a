#pragma once

#include "hairstrand/strand.hpp"

#include <span>
#include <vector>

namespace hairstrand {

/// A point placed on a polyline at a given arc length.
struct ArcSample {
  std::size_t segment = 0;  ///< segment containing the sample
  double arc = 0.0;         ///< arc length from the first joint
  Point3 position = Point3::Zero();
  Dir3 direction;
  bool chord = false;  ///< short-polyline midpoint; direction is the first→last chord
};

/// Cumulative arc length at each joint; front() == 0, back() == total length.
std::vector<double> cumulative_lengths(std::span<const Point3> joints);

/// Samples at arc lengths 0, spacing, 2·spacing, … ≤ L with the tangent of the
/// containing segment. A polyline shorter than `spacing` yields one sample at
/// its arc-length midpoint carrying the chord direction.
std::vector<ArcSample> sample_by_arc_length(std::span<const Point3> joints, double spacing);

/// Number of samples `sample_by_arc_length` produces for a polyline of length L.
std::size_t arc_sample_count(double length, double spacing);

/// Position at arc length `s` (clamped to [0, L]).
Point3 point_at_arc(std::span<const Point3> joints, std::span<const double> cumulative, double s);

}  // namespace hairstrand

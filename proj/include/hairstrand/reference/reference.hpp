#pragma once

// Straightforward serial implementations of the accelerated kernels. They
// exist to check the fast paths, not for production use.

#include "hairstrand/merge.hpp"
#include "hairstrand/metrics.hpp"
#include "hairstrand/orientation.hpp"
#include "hairstrand/refine.hpp"

#include <span>
#include <vector>

namespace hairstrand::reference {

/// All-pairs matching.
MatchResult match_brute_force(std::span<const DirectedSample> pred, std::span<const DirectedSample> gt,
                              const MatchThresholds& t);

/// Per gt strand and per pred strand, counts gt samples matched by that pred strand.
double strand_consistency_brute_force(std::span<const DirectedSample> pred,
                                      std::span<const DirectedSample> gt, const MatchThresholds& t);

/// All endpoint pairs, sorted by candidate_before.
std::vector<MergeCandidate> enumerate_candidates_brute_force(std::span<const Endpoint> endpoints,
                                                             const MergeThresholds& t);

/// Linear scan; ties go to the lower index.
std::size_t nearest_brute_force(std::span<const Point3> points, const Point3& q);

Correspondences correspondences_brute_force(const StrandSet& set, const OrientedPointCloud& target,
                                            double sample_spacing);

ImagePlane convolve_serial(const ImagePlane& image, const Kernel& kernel);

}  // namespace hairstrand::reference

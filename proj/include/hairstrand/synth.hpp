#pragma once

#include "hairstrand/refine.hpp"
#include "hairstrand/strand.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hairstrand {

enum class HairStyle { Straight, Wavy, Curly, Helix };

std::string to_string(HairStyle style);
/// Case-insensitive; nullopt for unknown names.
std::optional<HairStyle> parse_hair_style(const std::string& name);

struct HairstyleSpec {
  HairStyle style = HairStyle::Straight;
  int strand_count = 100;
  int joints_per_strand = 100;
  double scalp_radius = 100.0;  ///< mm
  double length_mean = 150.0;   ///< mm, measured along the strand
  double length_std = 15.0;
  double curl_radius = 5.0;  ///< Curly/Helix
  double curl_pitch = 60.0;  ///< Curly/Helix, mm of axis advance per turn
  double wave_amplitude = 3.0;  ///< Wavy
  double wave_length = 40.0;    ///< Wavy
  /// Downward bend of the spine for Straight/Wavy/Curly: gravity blend reached at the tip.
  double droop = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Geometry of one Helix-style strand, exposed so tests can compare against
/// the analytic curve p(σ) = base + σ·axis + r(cos(kσ+φ)e1 + sin(kσ+φ)e2).
struct HelixGeometry {
  Point3 base = Point3::Zero();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d e1 = Eigen::Vector3d::UnitX();
  Eigen::Vector3d e2 = Eigen::Vector3d::UnitY();
  double radius = 1.0;
  double wavenumber = 1.0;  ///< k = 2π / pitch
  double phase = 0.0;
  double axis_length = 1.0;

  Point3 position(double sigma) const;
  Eigen::Vector3d unit_tangent(double sigma) const;
};

/// Deterministic in (spec, seed); strands are rooted on a hemisphere.
StrandSet generate(const HairstyleSpec& spec);

/// Helix geometry used for strand `index` of a Helix-style spec.
HelixGeometry helix_geometry(const HairstyleSpec& spec, int index);

struct FragmentOrigin {
  StrandId source_id = 0;
  double arc_begin = 0.0;
  double arc_end = 0.0;
  bool reversed = false;  ///< stored joint order runs against the source strand
};

struct FragmentGroundTruth {
  StrandSet fragments;
  /// (a, b): a immediately precedes b on the same source strand.
  std::vector<std::pair<StrandId, StrandId>> adjacency;
  std::map<StrandId, FragmentOrigin> origin;
};

struct FragmentOptions {
  double min_length = 5.0;
  double max_length = 15.0;
  double gap = 1.0;
  double jitter_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Cuts every strand into pieces, removes `gap` of arc between consecutive
/// pieces, perturbs joints, flips half the pieces and shuffles the result.
FragmentGroundTruth fragment(const StrandSet& set, const FragmentOptions& options);

/// Arc-length samples with tangents, positions perturbed by isotropic noise.
OrientedPointCloud sample_oriented_cloud(const StrandSet& set, double spacing, double noise_sigma,
                                         std::uint64_t seed);

/// Fraction of ground-truth adjacencies that appear as direct joins in
/// `merged`: an endpoint joint of each fragment sits in the same output
/// strand at most two joints apart. Only meaningful before joints move and
/// while neighbouring fragments share no joint (gap > 0).
double adjacency_recovery(const StrandSet& merged, const StrandSet& fragments,
                          std::span<const std::pair<StrandId, StrandId>> adjacency);

}  // namespace hairstrand

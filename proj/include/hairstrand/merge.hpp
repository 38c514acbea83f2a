#pragma once

#include "hairstrand/strand.hpp"

#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace hairstrand {

enum class EndKind { Root = 0, Tip = 1 };

/// A strand extremity. `out_direction` points away from the strand body.
struct Endpoint {
  StrandId strand_id = 0;
  std::size_t strand_index = 0;  ///< position of the strand in its StrandSet
  EndKind end = EndKind::Root;
  Point3 position = Point3::Zero();
  Dir3 out_direction;
};

/// Merge acceptance limits: distance in mm, angle in radians.
struct MergeThresholds {
  double max_distance = 2.0;
  double max_angle = std::numbers::pi / 9.0;

  /// Throws InvalidArgument unless max_distance > 0 and 0 < max_angle <= π.
  void validate() const;
};

struct MergeCandidate {
  Endpoint a;  ///< lower (strand_id, end) of the pair
  Endpoint b;
  double distance = 0.0;
  double angle = 0.0;
  double cost = 0.0;
};

struct MergeLogEntry {
  int pass = 0;
  StrandId surviving_id = 0;
  StrandId absorbed_id = 0;
  Point3 new_joint = Point3::Zero();
};

using MergeLog = std::vector<MergeLogEntry>;

struct MergeResult {
  StrandSet strands;
  MergeLog log;
  int passes = 0;
};

/// Root and Tip of every strand, in strand order (Root first).
std::vector<Endpoint> collect_endpoints(const StrandSet& set);

/// Continuation angle between two endpoints: 0 when their outward directions
/// are exactly opposite.
double continuation_angle(const Endpoint& a, const Endpoint& b);

/// distance/d_m + angle/θ_m, or nullopt if the pair is infeasible.
std::optional<double> candidate_cost(const Endpoint& a, const Endpoint& b,
                                     const MergeThresholds& t);

/// Every feasible endpoint pair, sorted into greedy acceptance order
/// (ascending cost, ties by strand id pair then Root before Tip).
/// Enumeration uses a k-d tree radius query and runs in parallel.
std::vector<MergeCandidate> enumerate_candidates(std::span<const Endpoint> endpoints,
                                                 const MergeThresholds& t);

/// Strict weak order used for greedy acceptance.
bool candidate_before(const MergeCandidate& x, const MergeCandidate& y);

/// One greedy sweep. Each endpoint is used at most once; a pair that would
/// close a loop is skipped. Joined strands meet at a new midpoint joint.
MergeResult merge_pass(const StrandSet& set, const MergeThresholds& t, int pass_index = 1);

/// Repeats merge_pass until a pass accepts nothing or `max_passes` is reached.
MergeResult merge_until_stable(const StrandSet& set, const MergeThresholds& t, int max_passes);

}  // namespace hairstrand

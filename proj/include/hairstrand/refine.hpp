#pragma once

#include "hairstrand/kdtree.hpp"
#include "hairstrand/merge.hpp"
#include "hairstrand/strand.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace hairstrand {

/// Positions with sign-ambiguous unit line directions.
class OrientedPointCloud {
 public:
  OrientedPointCloud() = default;
  /// Throws InvalidArgument on length mismatch.
  OrientedPointCloud(std::vector<Point3> points, std::vector<Dir3> directions);

  std::span<const Point3> points() const noexcept { return points_; }
  std::span<const Dir3> directions() const noexcept { return directions_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

 private:
  std::vector<Point3> points_;
  std::vector<Dir3> directions_;
};

struct RefineConfig {
  double lambda_smooth = 0.1;
  double theta_s = deg_to_rad(20.0);
  double direction_weight = 0.25;  ///< λ_dir, mm² per radian
  double sample_spacing = 1.0;     ///< data-term sampling, mm
  double learning_rate = 0.01;     ///< mm
  double final_learning_rate = 0.001;  ///< learning rate at the last iteration (geometric decay)
  int iterations = 2000;
  double split_length = 5.0;
  MergeThresholds schedule_start{2.0, deg_to_rad(20.0)};
  MergeThresholds schedule_end{4.0, deg_to_rad(40.0)};
  int merge_every = 1000;
  int max_merge_passes = 100;
  double mask_threshold = 0.5;

  /// Throws InvalidArgument when a field breaks its constraint.
  void validate() const;
};

/// One vector of joint gradients per strand, aligned with StrandSet order.
using JointGradients = std::vector<std::vector<Eigen::Vector3d>>;

struct LossGradient {
  double value = 0.0;
  JointGradients gradient;
};

/// Mean over connected segment pairs of the squared bend angle, counting only
/// bends whose cosine is at most cos(theta_s).
double smoothness_loss(const StrandSet& set, double theta_s);
JointGradients smoothness_grad(const StrandSet& set, double theta_s);

/// For every data-term sample of every strand, the index of the target point
/// it is pulled towards.
using Correspondences = std::vector<std::vector<std::size_t>>;

Correspondences nearest_correspondences(const StrandSet& set, const KdTree& target_tree,
                                        double sample_spacing);

/// Mean over arc-length samples of squared distance to the corresponding
/// target point plus direction_weight times the undirected angle to its
/// direction. Correspondences are recomputed unless `fixed` is given.
/// Throws EmptyInput for an empty target.
LossGradient data_loss(const StrandSet& set, const OrientedPointCloud& target, double sample_spacing,
                       double direction_weight, const Correspondences* fixed = nullptr);

struct RefineLogLine {
  int iteration = 0;
  double total = 0.0;
  double data = 0.0;
  double smooth = 0.0;
};

using RefineObserver = std::function<void(const RefineLogLine&)>;

/// Adam descent on data_loss + lambda_smooth·smoothness_loss. Joint count and
/// connectivity are unchanged. `observer` sees each iteration's losses,
/// evaluated before that iteration's step. The learning rate decays
/// geometrically from learning_rate to final_learning_rate over
/// `total_iterations` (defaults to this call's iterations).
StrandSet refine_joints(const StrandSet& set, const OrientedPointCloud& target,
                        const RefineConfig& cfg, const RefineObserver& observer = {},
                        int first_iteration = 0, int total_iterations = -1);

/// Bisects every segment longer than split_length until none is.
StrandSet split_long_segments(const StrandSet& set, double split_length);

/// Linear interpolation from schedule_start (iter 0) to schedule_end (iter == iterations).
MergeThresholds threshold_schedule(int iter, const RefineConfig& cfg);

/// Strands with sigmoid(mask_logit) >= mask_threshold.
StrandSet filter_by_mask(const StrandSet& set, double mask_threshold);

double average_strand_length(const StrandSet& set);

struct Stage3Result {
  StrandSet strands;
  double initial_merge_average_length = 0.0;
  /// Average strand length after each merge step, starting with the initial one.
  std::vector<double> merge_average_lengths;
  std::vector<RefineLogLine> losses;
};

/// Strict initial merge, then refinement epochs of merge_every iterations, each
/// followed by segment splitting and a merge at the scheduled thresholds;
/// finally the mask filter. Zero iterations return the input unchanged.
Stage3Result run_stage3(const StrandSet& set, const OrientedPointCloud& target,
                        const RefineConfig& cfg, const RefineObserver& observer = {});

}  // namespace hairstrand

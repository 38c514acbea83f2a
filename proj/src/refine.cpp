#include "hairstrand/refine.hpp"

#include "hairstrand/error.hpp"
#include "hairstrand/polyline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace hairstrand {

OrientedPointCloud::OrientedPointCloud(std::vector<Point3> points, std::vector<Dir3> directions)
    : points_(std::move(points)), directions_(std::move(directions)) {
  if (points_.size() != directions_.size()) {
    throw InvalidArgument(fmt::format("oriented cloud has {} points but {} directions",
                                      points_.size(), directions_.size()));
  }
}

void RefineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(fmt::format("invalid refine config: {}", what));
  };
  require(lambda_smooth >= 0.0, "lambda_smooth must be non-negative");
  require(theta_s > 0.0 && theta_s < std::numbers::pi, "theta_s must be in (0, pi)");
  require(direction_weight >= 0.0, "direction_weight must be non-negative");
  require(sample_spacing > 0.0, "sample_spacing must be positive");
  require(learning_rate > 0.0 && final_learning_rate > 0.0, "learning rates must be positive");
  require(iterations >= 0, "iterations must be non-negative");
  require(split_length > 0.0, "split_length must be positive");
  require(merge_every > 0, "merge_every must be positive");
  require(max_merge_passes > 0, "max_merge_passes must be positive");
  require(mask_threshold > 0.0 && mask_threshold < 1.0, "mask_threshold must be in (0, 1)");
  schedule_start.validate();
  schedule_end.validate();
  require(schedule_end.max_distance >= schedule_start.max_distance &&
              schedule_end.max_angle >= schedule_start.max_angle,
          "schedule_end must not be tighter than schedule_start");
}

namespace {

using Polyline = std::vector<Point3>;

std::vector<Polyline> to_polylines(const StrandSet& set) {
  std::vector<Polyline> out;
  out.reserve(set.size());
  for (const auto& s : set.strands()) out.emplace_back(s.joints().begin(), s.joints().end());
  return out;
}

JointGradients zero_gradients(const std::vector<Polyline>& lines) {
  JointGradients g(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) g[i].assign(lines[i].size(), Eigen::Vector3d::Zero());
  return g;
}

struct PartialSum {
  double sum = 0.0;
  std::size_t count = 0;
};

// Sum of squared active bend angles of one polyline; accumulates the
// unnormalized gradient when `grad` is non-null.
PartialSum smooth_polyline(const Polyline& p, double cos_s, std::vector<Eigen::Vector3d>* grad) {
  PartialSum out;
  for (std::size_t j = 1; j + 1 < p.size(); ++j) {
    const Eigen::Vector3d a = p[j] - p[j - 1];
    const Eigen::Vector3d b = p[j + 1] - p[j];
    const double la = a.norm(), lb = b.norm();
    const Eigen::Vector3d u = a / la, v = b / lb;
    const double c = u.dot(v);
    ++out.count;
    if (c > cos_s) continue;
    const double theta = std::acos(std::clamp(c, -1.0, 1.0));
    out.sum += theta * theta;
    if (!grad) continue;
    const double sine = std::sqrt(std::max(0.0, 1.0 - c * c));
    if (sine < 1e-12) continue;  // exactly reversed pair, no defined gradient
    const double dl_dc = -2.0 * theta / sine;
    const Eigen::Vector3d ga = dl_dc * (v - c * u) / la;
    const Eigen::Vector3d gb = dl_dc * (u - c * v) / lb;
    (*grad)[j - 1] -= ga;
    (*grad)[j] += ga - gb;
    (*grad)[j + 1] += gb;
  }
  return out;
}

// Undirected angle between unit vectors and its derivative with respect to d.
double undirected_angle(const Eigen::Vector3d& d, const Eigen::Vector3d& e, Eigen::Vector3d* d_grad) {
  const double c = d.dot(e);
  const double ac = std::min(std::abs(c), 1.0);
  const double angle = std::acos(ac);
  if (d_grad) {
    const double s2 = 1.0 - ac * ac;
    if (s2 < 1e-14) {
      d_grad->setZero();
    } else {
      *d_grad = (-(c >= 0.0 ? 1.0 : -1.0) / std::sqrt(s2)) * e;
    }
  }
  return angle;
}

// Data term for one polyline. Sample positions are x = p_i + (s − C_i)·u_i,
// so the gradient reaches p_i, p_{i+1} and, through the cumulative length
// C_i, every earlier segment.
PartialSum data_polyline(const Polyline& p, std::span<const std::size_t> corr,
                         const OrientedPointCloud& target, double spacing, double direction_weight,
                         std::vector<Eigen::Vector3d>* grad) {
  PartialSum out;
  const auto samples = sample_by_arc_length(p, spacing);
  if (samples.size() != corr.size()) {
    throw InvariantViolation("correspondence count does not match sample count");
  }
  const std::size_t segs = p.size() - 1;
  std::vector<Eigen::Vector3d> u(segs);
  std::vector<double> len(segs);
  for (std::size_t i = 0; i < segs; ++i) {
    const Eigen::Vector3d d = p[i + 1] - p[i];
    len[i] = d.norm();
    u[i] = d / len[i];
  }
  const auto cumulative = cumulative_lengths(p);

  // Derivative of the loss with respect to each C_i (pushed to earlier
  // segments afterwards) and with respect to the total length L.
  std::vector<double> d_cumulative(segs, 0.0);
  double d_total_length = 0.0;

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& a = samples[k];
    const std::size_t i = a.segment;
    const double t = a.arc - cumulative[i];
    const Point3 x = p[i] + t * u[i];
    const Point3& y = target.points()[corr[k]];
    const Eigen::Vector3d& e = target.directions()[corr[k]].vec();
    const Eigen::Vector3d r = x - y;

    const Eigen::Vector3d d = a.chord ? Eigen::Vector3d((p.back() - p.front()).normalized()) : u[i];
    Eigen::Vector3d dd;
    const double angle = undirected_angle(d, e, grad ? &dd : nullptr);
    out.sum += r.squaredNorm() + direction_weight * angle;
    ++out.count;
    if (!grad) continue;

    const Eigen::Vector3d gx = 2.0 * r;
    (*grad)[i] += gx;
    // x depends on u_i through t·u_i.
    const Eigen::Vector3d gu_pos = t * gx;
    const Eigen::Vector3d gv_pos = (gu_pos - u[i] * u[i].dot(gu_pos)) / len[i];
    (*grad)[i + 1] += gv_pos;
    (*grad)[i] -= gv_pos;
    // x depends on t = s − C_i; for the chord sample s = L/2.
    const double q = gx.dot(u[i]);
    d_cumulative[i] -= q;
    if (a.chord) d_total_length += 0.5 * q;

    if (direction_weight > 0.0) {
      const Eigen::Vector3d gd = direction_weight * dd;
      if (a.chord) {
        const Eigen::Vector3d chord = p.back() - p.front();
        const double cl = chord.norm();
        const Eigen::Vector3d gv = (gd - d * d.dot(gd)) / cl;
        (*grad)[segs] += gv;
        (*grad)[0] -= gv;
      } else {
        const Eigen::Vector3d gv = (gd - d * d.dot(gd)) / len[i];
        (*grad)[i + 1] += gv;
        (*grad)[i] -= gv;
      }
    }
  }

  if (grad) {
    // C_i = Σ_{j<i} ℓ_j, L = Σ_j ℓ_j and dℓ_j = u_j·(dp_{j+1} − dp_j).
    double suffix = 0.0;
    for (std::size_t jj = segs; jj-- > 0;) {
      const double coef = suffix + d_total_length;
      (*grad)[jj + 1] += coef * u[jj];
      (*grad)[jj] -= coef * u[jj];
      suffix += d_cumulative[jj];
    }
  }
  return out;
}

Correspondences correspondences_for(const std::vector<Polyline>& lines, const KdTree& tree,
                                    double spacing) {
  Correspondences corr(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const auto samples = sample_by_arc_length(lines[s], spacing);
    corr[s].resize(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
      corr[s][k] = tree.nearest(samples[k].position).index;
    }
  }
  return corr;
}

struct Evaluation {
  double data = 0.0;
  double smooth = 0.0;
  JointGradients data_grad;
  JointGradients smooth_grad;
};

double finish_mean(std::span<const PartialSum> parts, JointGradients* grad) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : parts) {
    sum += p.sum;
    count += p.count;
  }
  if (count == 0) return 0.0;
  if (grad) {
    const double inv = 1.0 / static_cast<double>(count);
    for (auto& strand : *grad)
      for (auto& g : strand) g *= inv;
  }
  return sum / static_cast<double>(count);
}

double smooth_all(const std::vector<Polyline>& lines, double theta_s, JointGradients* grad) {
  const double cos_s = std::cos(theta_s);
  std::vector<PartialSum> parts(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    parts[s] = smooth_polyline(lines[s], cos_s, grad ? &(*grad)[s] : nullptr);
  }
  return finish_mean(parts, grad);
}

double data_all(const std::vector<Polyline>& lines, const Correspondences& corr,
                const OrientedPointCloud& target, double spacing, double direction_weight,
                JointGradients* grad) {
  std::vector<PartialSum> parts(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    parts[s] = data_polyline(lines[s], corr[s], target, spacing, direction_weight,
                             grad ? &(*grad)[s] : nullptr);
  }
  return finish_mean(parts, grad);
}

// Drops joints that collapsed onto their predecessor during optimization.
std::optional<Strand> rebuild(const Strand& original, const Polyline& joints) {
  std::vector<Point3> kept{joints.front()};
  std::vector<double> thickness;
  const auto t = original.thickness();
  for (std::size_t j = 1; j < joints.size(); ++j) {
    if ((joints[j] - kept.back()).norm() > kMinSegmentLength) {
      kept.push_back(joints[j]);
      thickness.push_back(t[j - 1]);
    }
  }
  if (kept.size() < 2) return std::nullopt;
  return Strand(original.id(), std::move(kept), std::move(thickness), original.attributes());
}

}  // namespace

double smoothness_loss(const StrandSet& set, double theta_s) {
  return smooth_all(to_polylines(set), theta_s, nullptr);
}

JointGradients smoothness_grad(const StrandSet& set, double theta_s) {
  const auto lines = to_polylines(set);
  auto grad = zero_gradients(lines);
  smooth_all(lines, theta_s, &grad);
  return grad;
}

Correspondences nearest_correspondences(const StrandSet& set, const KdTree& target_tree,
                                        double sample_spacing) {
  if (target_tree.empty()) throw EmptyInput("refinement target is empty");
  return correspondences_for(to_polylines(set), target_tree, sample_spacing);
}

LossGradient data_loss(const StrandSet& set, const OrientedPointCloud& target, double sample_spacing,
                       double direction_weight, const Correspondences* fixed) {
  if (target.empty()) throw EmptyInput("refinement target is empty");
  const auto lines = to_polylines(set);
  Correspondences own;
  if (!fixed) {
    const KdTree tree(target.points());
    own = correspondences_for(lines, tree, sample_spacing);
    fixed = &own;
  }
  LossGradient out;
  out.gradient = zero_gradients(lines);
  out.value = data_all(lines, *fixed, target, sample_spacing, direction_weight, &out.gradient);
  return out;
}

StrandSet refine_joints(const StrandSet& set, const OrientedPointCloud& target,
                        const RefineConfig& cfg, const RefineObserver& observer,
                        int first_iteration, int total_iterations) {
  cfg.validate();
  if (cfg.iterations == 0 || set.empty()) return set;
  if (target.empty()) throw EmptyInput("refinement target is empty");
  if (total_iterations < 0) total_iterations = first_iteration + cfg.iterations;

  auto lines = to_polylines(set);
  const KdTree tree(target.points());
  auto m = zero_gradients(lines);
  auto v = zero_gradients(lines);
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  const double decay = std::log(cfg.final_learning_rate / cfg.learning_rate);

  for (int it = 0; it < cfg.iterations; ++it) {
    const Correspondences corr = correspondences_for(lines, tree, cfg.sample_spacing);
    auto data_grad = zero_gradients(lines);
    auto smooth_grad = zero_gradients(lines);
    const double data = data_all(lines, corr, target, cfg.sample_spacing, cfg.direction_weight, &data_grad);
    const double smooth = smooth_all(lines, cfg.theta_s, &smooth_grad);
    const int global_it = first_iteration + it;
    if (observer) observer({global_it, data + cfg.lambda_smooth * smooth, data, smooth});

    const double progress = total_iterations > 1
                                ? static_cast<double>(global_it) / static_cast<double>(total_iterations - 1)
                                : 0.0;
    const double lr = cfg.learning_rate * std::exp(decay * std::min(progress, 1.0));
    const double step = it + 1;
    const double c1 = 1.0 - std::pow(beta1, step);
    const double c2 = 1.0 - std::pow(beta2, step);
    for (std::size_t s = 0; s < lines.size(); ++s) {
      for (std::size_t j = 0; j < lines[s].size(); ++j) {
        const Eigen::Vector3d g = data_grad[s][j] + cfg.lambda_smooth * smooth_grad[s][j];
        m[s][j] = beta1 * m[s][j] + (1.0 - beta1) * g;
        v[s][j] = beta2 * v[s][j] + (1.0 - beta2) * g.cwiseProduct(g);
        const Eigen::Vector3d mhat = m[s][j] / c1;
        const Eigen::Vector3d vhat = v[s][j] / c2;
        lines[s][j] -= lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
      }
    }
  }

  std::vector<Strand> out;
  out.reserve(set.size());
  for (std::size_t s = 0; s < set.size(); ++s) {
    if (auto strand = rebuild(set[s], lines[s])) out.push_back(std::move(*strand));
  }
  return StrandSet(std::move(out), set.unit_scale());
}

StrandSet split_long_segments(const StrandSet& set, double split_length) {
  if (!(split_length > 0.0)) throw InvalidArgument("split_length must be positive");
  std::vector<Strand> out;
  out.reserve(set.size());
  for (const auto& s : set.strands()) {
    const auto joints = s.joints();
    const auto thick = s.thickness();
    std::vector<Point3> nj{joints.front()};
    std::vector<double> nt;
    bool changed = false;
    for (std::size_t j = 0; j + 1 < joints.size(); ++j) {
      // Repeated bisection of a segment yields 2^k equal pieces.
      std::size_t pieces = 1;
      const double len = (joints[j + 1] - joints[j]).norm();
      while (len / static_cast<double>(pieces) > split_length) pieces *= 2;
      changed |= pieces > 1;
      for (std::size_t k = 1; k < pieces; ++k) {
        const double w = static_cast<double>(k) / static_cast<double>(pieces);
        nj.push_back(joints[j] + w * (joints[j + 1] - joints[j]));
        nt.push_back(thick[j]);
      }
      nj.push_back(joints[j + 1]);
      nt.push_back(thick[j]);
    }
    if (changed) {
      out.emplace_back(s.id(), std::move(nj), std::move(nt), s.attributes());
    } else {
      out.push_back(s);
    }
  }
  return StrandSet(std::move(out), set.unit_scale());
}

MergeThresholds threshold_schedule(int iter, const RefineConfig& cfg) {
  if (iter < 0 || iter > cfg.iterations) {
    throw InvalidArgument(fmt::format("schedule iteration {} outside [0, {}]", iter, cfg.iterations));
  }
  const double w = cfg.iterations == 0 ? 0.0 : static_cast<double>(iter) / cfg.iterations;
  return {cfg.schedule_start.max_distance + w * (cfg.schedule_end.max_distance - cfg.schedule_start.max_distance),
          cfg.schedule_start.max_angle + w * (cfg.schedule_end.max_angle - cfg.schedule_start.max_angle)};
}

StrandSet filter_by_mask(const StrandSet& set, double mask_threshold) {
  if (!(mask_threshold > 0.0 && mask_threshold < 1.0)) {
    throw InvalidArgument("mask_threshold must be in (0, 1)");
  }
  std::vector<Strand> out;
  for (const auto& s : set.strands()) {
    if (sigmoid(s.mask_logit()) >= mask_threshold) out.push_back(s);
  }
  return StrandSet(std::move(out), set.unit_scale());
}

double average_strand_length(const StrandSet& set) {
  if (set.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : set.strands()) total += strand_length(s);
  return total / static_cast<double>(set.size());
}

Stage3Result run_stage3(const StrandSet& set, const OrientedPointCloud& target,
                        const RefineConfig& cfg, const RefineObserver& observer) {
  cfg.validate();
  Stage3Result result;
  if (set.empty() || cfg.iterations == 0) {
    result.strands = set;
    return result;
  }
  if (target.empty()) throw EmptyInput("refinement target is empty");

  StrandSet current = merge_until_stable(set, threshold_schedule(0, cfg), cfg.max_merge_passes).strands;
  result.initial_merge_average_length = average_strand_length(current);
  result.merge_average_lengths.push_back(result.initial_merge_average_length);

  auto record = [&](const RefineLogLine& line) {
    result.losses.push_back(line);
    if (observer) observer(line);
  };

  int iter = 0;
  while (iter < cfg.iterations) {
    const int epoch = std::min(cfg.merge_every, cfg.iterations - iter);
    RefineConfig epoch_cfg = cfg;
    epoch_cfg.iterations = epoch;
    current = refine_joints(current, target, epoch_cfg, record, iter, cfg.iterations);
    iter += epoch;
    current = split_long_segments(current, cfg.split_length);
    current = merge_until_stable(current, threshold_schedule(iter, cfg), cfg.max_merge_passes).strands;
    result.merge_average_lengths.push_back(average_strand_length(current));
  }

  result.strands = filter_by_mask(current, cfg.mask_threshold);
  return result;
}

}  // namespace hairstrand

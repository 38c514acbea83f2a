#include "hairstrand/reference/reference.hpp"

#include "hairstrand/error.hpp"
#include "hairstrand/polyline.hpp"

#include <algorithm>
#include <limits>

namespace hairstrand::reference {

MatchResult match_brute_force(std::span<const DirectedSample> pred, std::span<const DirectedSample> gt,
                              const MatchThresholds& t) {
  MatchResult r;
  r.pred_matched.assign(pred.size(), 0);
  r.gt_matched.assign(gt.size(), 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      if (samples_match(pred[i], gt[j], t)) {
        r.pred_matched[i] = 1;
        r.gt_matched[j] = 1;
      }
    }
  }
  return r;
}

double strand_consistency_brute_force(std::span<const DirectedSample> pred,
                                      std::span<const DirectedSample> gt, const MatchThresholds& t) {
  if (gt.empty()) throw EmptyInput("ground truth has no samples");
  std::size_t gt_strands = 0, pred_strands = 0;
  for (const auto& g : gt) gt_strands = std::max(gt_strands, g.strand_index + 1);
  for (const auto& p : pred) pred_strands = std::max(pred_strands, p.strand_index + 1);

  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t a = 0; a < gt_strands; ++a) {
    std::size_t n = 0, best = 0;
    for (const auto& g : gt) n += g.strand_index == a;
    if (n == 0) continue;
    ++present;
    for (std::size_t b = 0; b < pred_strands; ++b) {
      std::size_t hits = 0;
      for (const auto& g : gt) {
        if (g.strand_index != a) continue;
        hits += std::any_of(pred.begin(), pred.end(),
                            [&](const DirectedSample& p) { return p.strand_index == b && samples_match(g, p, t); });
      }
      best = std::max(best, hits);
    }
    sum += static_cast<double>(best) / static_cast<double>(n);
  }
  return sum / static_cast<double>(present);
}

std::vector<MergeCandidate> enumerate_candidates_brute_force(std::span<const Endpoint> endpoints,
                                                             const MergeThresholds& t) {
  std::vector<MergeCandidate> out;
  for (std::size_t i = 0; i < endpoints.size(); ++i) {
    for (std::size_t j = i + 1; j < endpoints.size(); ++j) {
      const auto cost = candidate_cost(endpoints[i], endpoints[j], t);
      if (!cost) continue;
      auto a = endpoints[i], b = endpoints[j];
      if (std::pair(b.strand_id, b.end) < std::pair(a.strand_id, a.end)) std::swap(a, b);
      out.push_back({a, b, (a.position - b.position).norm(), continuation_angle(a, b), *cost});
    }
  }
  std::sort(out.begin(), out.end(), candidate_before);
  return out;
}

std::size_t nearest_brute_force(std::span<const Point3> points, const Point3& q) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i] - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Correspondences correspondences_brute_force(const StrandSet& set, const OrientedPointCloud& target,
                                            double sample_spacing) {
  Correspondences out;
  for (const auto& s : set.strands()) {
    auto& c = out.emplace_back();
    for (const auto& a : sample_by_arc_length(s.joints(), sample_spacing)) {
      c.push_back(nearest_brute_force(target.points(), a.position));
    }
  }
  return out;
}

ImagePlane convolve_serial(const ImagePlane& image, const Kernel& kernel) {
  const int w = image.width(), h = image.height(), half = kernel.size / 2;
  ImagePlane out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < kernel.size; ++ky) {
        for (int kx = 0; kx < kernel.size; ++kx) {
          const int sx = std::clamp(x + kx - half, 0, w - 1);
          const int sy = std::clamp(y + ky - half, 0, h - 1);
          acc += kernel.at(kx, ky) * image.at(sx, sy);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace hairstrand::reference

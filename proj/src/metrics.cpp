#include "hairstrand/metrics.hpp"

#include "hairstrand/error.hpp"
#include "hairstrand/kdtree.hpp"
#include "hairstrand/polyline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace hairstrand {

void MatchThresholds::validate() const {
  if (!(max_distance > 0.0) || !(max_angle > 0.0)) {
    throw InvalidArgument("match thresholds must be positive");
  }
}

std::vector<MatchThresholds> default_match_thresholds() {
  return {{2.0, deg_to_rad(20.0)}, {4.0, deg_to_rad(40.0)}};
}

std::vector<DirectedSample> resample(const StrandSet& set, double spacing) {
  if (!(spacing > 0.0)) throw InvalidArgument("resample spacing must be positive");
  std::vector<DirectedSample> out;
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto samples = sample_by_arc_length(set[s].joints(), spacing);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      out.push_back({samples[k].position, samples[k].direction, set[s].id(), s, k});
    }
  }
  return out;
}

double undirected_angle(const Dir3& a, const Dir3& b) {
  return std::acos(std::min(1.0, std::abs(a.dot(b))));
}

bool samples_match(const DirectedSample& a, const DirectedSample& b, const MatchThresholds& t) {
  return (a.position - b.position).squaredNorm() <= t.max_distance * t.max_distance &&
         undirected_angle(a.direction, b.direction) <= t.max_angle;
}

namespace {

KdTree tree_of(std::span<const DirectedSample> samples) {
  std::vector<Point3> pts;
  pts.reserve(samples.size());
  for (const auto& s : samples) pts.push_back(s.position);
  return KdTree(pts);
}

std::vector<char> matched_flags(std::span<const DirectedSample> queries,
                                std::span<const DirectedSample> others, const KdTree& tree,
                                const MatchThresholds& t) {
  std::vector<char> flags(queries.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel
  {
    std::vector<std::size_t> hits;
#pragma omp for schedule(dynamic, 512)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      hits.clear();
      tree.radius_search(queries[i].position, t.max_distance, hits);
      for (const auto j : hits) {
        if (samples_match(queries[i], others[j], t)) {
          flags[i] = 1;
          break;
        }
      }
    }
  }
  return flags;
}

double fraction(const std::vector<char>& flags) {
  if (flags.empty()) return 0.0;
  const auto c = std::count(flags.begin(), flags.end(), char{1});
  return static_cast<double>(c) / static_cast<double>(flags.size());
}

}  // namespace

MatchResult match(std::span<const DirectedSample> pred, std::span<const DirectedSample> gt,
                  const MatchThresholds& t) {
  t.validate();
  MatchResult r;
  r.pred_matched = matched_flags(pred, gt, tree_of(gt), t);
  r.gt_matched = matched_flags(gt, pred, tree_of(pred), t);
  return r;
}

double f1_score(double precision, double recall) {
  const double s = precision + recall;
  return s > 0.0 ? 2.0 * precision * recall / s : 0.0;
}

PrecisionRecall precision_recall_from(const MatchResult& m) {
  PrecisionRecall pr;
  pr.precision = fraction(m.pred_matched);
  pr.recall = fraction(m.gt_matched);
  pr.f1 = f1_score(pr.precision, pr.recall);
  return pr;
}

PrecisionRecall precision_recall_f1(const StrandSet& pred, const StrandSet& gt,
                                    const MatchThresholds& t, double spacing) {
  if (gt.empty()) throw EmptyInput("ground truth has no strands");
  const auto ps = resample(pred, spacing);
  const auto gs = resample(gt, spacing);
  return precision_recall_from(match(ps, gs, t));
}

double strand_consistency(std::span<const DirectedSample> pred, std::span<const DirectedSample> gt,
                          const MatchThresholds& t) {
  t.validate();
  if (gt.empty()) throw EmptyInput("ground truth has no samples");

  // Samples of one strand are contiguous; find each gt strand's range.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (i == 0 || gt[i].strand_index != gt[i - 1].strand_index) ranges.emplace_back(i, i);
    ranges.back().second = i + 1;
  }

  const KdTree tree = tree_of(pred);
  std::vector<double> best(ranges.size(), 0.0);
  const auto n = static_cast<std::ptrdiff_t>(ranges.size());
#pragma omp parallel
  {
    std::vector<std::size_t> hits;
    std::vector<std::size_t> strands_hit;
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t r = 0; r < n; ++r) {
      std::vector<std::size_t> all;
      for (auto g = ranges[r].first; g < ranges[r].second; ++g) {
        hits.clear();
        tree.radius_search(gt[g].position, t.max_distance, hits);
        strands_hit.clear();
        for (const auto j : hits) {
          if (samples_match(gt[g], pred[j], t)) strands_hit.push_back(pred[j].strand_index);
        }
        std::sort(strands_hit.begin(), strands_hit.end());
        strands_hit.erase(std::unique(strands_hit.begin(), strands_hit.end()), strands_hit.end());
        all.insert(all.end(), strands_hit.begin(), strands_hit.end());
      }
      std::sort(all.begin(), all.end());
      std::size_t top = 0;
      for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        while (j < all.size() && all[j] == all[i]) ++j;
        top = std::max(top, j - i);
        i = j;
      }
      best[r] = static_cast<double>(top) / static_cast<double>(ranges[r].second - ranges[r].first);
    }
  }
  double sum = 0.0;
  for (const double b : best) sum += b;
  return sum / static_cast<double>(best.size());
}

double strand_consistency(const StrandSet& pred, const StrandSet& gt, const MatchThresholds& t,
                          double spacing) {
  if (gt.empty()) throw EmptyInput("ground truth has no strands");
  return strand_consistency(resample(pred, spacing), resample(gt, spacing), t);
}

std::vector<MetricsReport> evaluate(const StrandSet& pred, const StrandSet& gt,
                                    std::span<const MatchThresholds> thresholds, double spacing,
                                    bool with_sc) {
  if (gt.empty()) throw EmptyInput("ground truth has no strands");
  const auto ps = resample(pred, spacing);
  const auto gs = resample(gt, spacing);
  std::vector<MetricsReport> out;
  for (const auto& t : thresholds) {
    const auto pr = precision_recall_from(match(ps, gs, t));
    MetricsReport r;
    r.precision = pr.precision;
    r.recall = pr.recall;
    r.f1 = pr.f1;
    if (with_sc) r.strand_consistency = strand_consistency(ps, gs, t);
    r.thresholds = t;
    r.sample_spacing = spacing;
    out.push_back(r);
  }
  return out;
}

bool has_connectivity(const StrandSet& set) {
  return std::any_of(set.strands().begin(), set.strands().end(),
                     [](const Strand& s) { return s.segment_count() > 1; });
}

namespace {

std::string threshold_tag(const MatchThresholds& t) {
  return fmt::format("{:g}mm_{:g}deg", t.max_distance, std::round(rad_to_deg(t.max_angle) * 1e6) / 1e6);
}

}  // namespace

std::string to_key_value(std::span<const MetricsReport> reports) {
  std::string out;
  for (const auto& r : reports) {
    const auto tag = threshold_tag(r.thresholds);
    out += fmt::format("precision_{} {:.9g}\n", tag, r.precision);
    out += fmt::format("recall_{} {:.9g}\n", tag, r.recall);
    out += fmt::format("f1_{} {:.9g}\n", tag, r.f1);
    if (r.strand_consistency) out += fmt::format("sc_{} {:.9g}\n", tag, *r.strand_consistency);
    out += fmt::format("spacing_{} {:.9g}\n", tag, r.sample_spacing);
  }
  return out;
}

nlohmann::json to_json(std::span<const MetricsReport> reports) {
  auto arr = nlohmann::json::array();
  for (const auto& r : reports) {
    nlohmann::json j;
    j["distance_mm"] = r.thresholds.max_distance;
    j["angle_deg"] = rad_to_deg(r.thresholds.max_angle);
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["strand_consistency"] = r.strand_consistency ? nlohmann::json(*r.strand_consistency) : nlohmann::json();
    j["sample_spacing_mm"] = r.sample_spacing;
    arr.push_back(j);
  }
  return arr;
}

std::string to_table(std::span<const MetricsReport> reports) {
  std::string out = fmt::format("{:>12} {:>10} {:>10} {:>10} {:>10}\n", "mm/deg", "Precision",
                                "Recall", "F-score", "SC");
  for (const auto& r : reports) {
    const auto label = fmt::format("{:g}/{:g}", r.thresholds.max_distance,
                                   std::round(rad_to_deg(r.thresholds.max_angle) * 1e6) / 1e6);
    const auto sc = r.strand_consistency ? fmt::format("{:.4f}", *r.strand_consistency) : std::string("--");
    out += fmt::format("{:>12} {:>10.4f} {:>10.4f} {:>10.4f} {:>10}\n", label, r.precision, r.recall, r.f1, sc);
  }
  return out;
}

}  // namespace hairstrand

#pragma once

#include "hairstrand/strand.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hairstrand {

/// Point-matching limits: distance in mm, undirected angle in radians.
struct MatchThresholds {
  double max_distance = 2.0;
  double max_angle = deg_to_rad(20.0);

  void validate() const;
};

/// The two threshold pairs reported by default: 2 mm / 20° and 4 mm / 40°.
std::vector<MatchThresholds> default_match_thresholds();

struct DirectedSample {
  Point3 position = Point3::Zero();
  Dir3 direction;  ///< line direction, sign carries no meaning
  StrandId strand_id = 0;
  std::size_t strand_index = 0;
  std::size_t index_on_strand = 0;
};

/// Uniform arc-length resampling of every strand (see sample_by_arc_length).
std::vector<DirectedSample> resample(const StrandSet& set, double spacing);

/// min(θ, π − θ) for the angle θ between two directions.
double undirected_angle(const Dir3& a, const Dir3& b);

/// The single match predicate shared by every matching routine.
bool samples_match(const DirectedSample& a, const DirectedSample& b, const MatchThresholds& t);

struct MatchResult {
  std::vector<char> pred_matched;  ///< per pred sample: some gt sample matches it
  std::vector<char> gt_matched;    ///< per gt sample: some pred sample matches it
};

/// K-d tree accelerated, parallel over samples.
MatchResult match(std::span<const DirectedSample> pred, std::span<const DirectedSample> gt,
                  const MatchThresholds& t);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// f1 = 2pr/(p+r), or 0 when p + r = 0.
double f1_score(double precision, double recall);

PrecisionRecall precision_recall_from(const MatchResult& m);

/// Throws EmptyInput when gt is empty. An empty prediction scores 0 precision.
PrecisionRecall precision_recall_f1(const StrandSet& pred, const StrandSet& gt,
                                    const MatchThresholds& t, double spacing);

/// For each gt strand, the largest fraction of its samples matched by one
/// single predicted strand; averaged over gt strands.
double strand_consistency(std::span<const DirectedSample> pred, std::span<const DirectedSample> gt,
                          const MatchThresholds& t);
double strand_consistency(const StrandSet& pred, const StrandSet& gt, const MatchThresholds& t,
                          double spacing);

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> strand_consistency;  ///< empty when not computed
  MatchThresholds thresholds;
  double sample_spacing = 1.0;
};

/// One report per threshold pair. SC is skipped when `with_sc` is false.
std::vector<MetricsReport> evaluate(const StrandSet& pred, const StrandSet& gt,
                                    std::span<const MatchThresholds> thresholds, double spacing,
                                    bool with_sc = true);

/// True when some strand has more than one segment, i.e. the set carries
/// connectivity beyond isolated segments.
bool has_connectivity(const StrandSet& set);

/// Flat `key value` lines, keys suffixed by the threshold pair, e.g.
/// `precision_2mm_20deg 0.5`.
std::string to_key_value(std::span<const MetricsReport> reports);
nlohmann::json to_json(std::span<const MetricsReport> reports);
/// Human-readable table in the layout of the usual P/R/F/SC comparison.
std::string to_table(std::span<const MetricsReport> reports);

}  // namespace hairstrand

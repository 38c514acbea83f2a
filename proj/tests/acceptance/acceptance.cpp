// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. Tolerances are fixed below.

#include "hairstrand/error.hpp"
#include "hairstrand/io.hpp"
#include "hairstrand/merge.hpp"
#include "hairstrand/metrics.hpp"
#include "hairstrand/orientation.hpp"
#include "hairstrand/polyline.hpp"
#include "hairstrand/reference/reference.hpp"
#include "hairstrand/refine.hpp"
#include "hairstrand/rng.hpp"
#include "hairstrand/synth.hpp"

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

using namespace hairstrand;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr int kStrands = 500;
constexpr int kJoints = 50;
constexpr double kCurlRadius = 5.0;
constexpr double kCurlPitch = 40.0;
constexpr double kCloudSpacing = 1.0;
constexpr double kCloudNoise = 0.5;
constexpr double kMetricSpacing = 1.0;

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  failures += !pass;
  fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

HairstyleSpec fixture_spec(HairStyle style, int strands = kStrands) {
  HairstyleSpec spec;
  spec.style = style;
  spec.strand_count = strands;
  spec.joints_per_strand = kJoints;
  spec.curl_radius = kCurlRadius;
  spec.curl_pitch = kCurlPitch;
  spec.seed = kSeed;
  return spec;
}

FragmentOptions fixture_fragments() {
  FragmentOptions o;
  o.min_length = 5.0;
  o.max_length = 15.0;
  o.gap = 1.0;
  o.jitter_sigma = 0.1;
  o.seed = kSeed;
  return o;
}

const MergeThresholds kStrict{2.0, deg_to_rad(20.0)};

// ---------------------------------------------------------------------------

void merge_oracle() {
  std::string detail;
  bool pass = true;
  const std::pair<HairStyle, double> cases[] = {
      {HairStyle::Straight, 0.95}, {HairStyle::Wavy, 0.95}, {HairStyle::Curly, 0.85}};
  for (const auto& [style, floor] : cases) {
    const auto gt = fragment(generate(fixture_spec(style)), fixture_fragments());
    const auto merged = merge_until_stable(gt.fragments, kStrict, 100);
    const double r = adjacency_recovery(merged.strands, gt.fragments, gt.adjacency);
    pass &= r >= floor;
    detail += fmt::format("{} {:.4f} (>= {:.2f}), ", to_string(style), r, floor);
  }
  // Runtime on a fixture with at least 1e5 endpoints.
  const auto big = fragment(generate(fixture_spec(HairStyle::Curly, 4000)), fixture_fragments());
  const auto endpoints = 2 * big.fragments.size();
  const auto t0 = std::chrono::steady_clock::now();
  const auto merged = merge_until_stable(big.fragments, kStrict, 100);
  const double t = seconds_since(t0);
  pass &= endpoints >= 100000 && t < 30.0;
  detail += fmt::format("{} endpoints merged in {:.2f} s (< 30 s, {} passes)", endpoints, t, merged.passes);
  report(pass, "merge-oracle", detail);
}

// ---------------------------------------------------------------------------

struct PipelineRun {
  double f_4_40 = 0.0;
  double growth = 0.0;
  std::vector<double> merge_lengths;
  double seconds = 0.0;
};

// synth -> fragment -> merge -> refine -> evaluate on the Curly fixture.
PipelineRun curly_pipeline(const MergeThresholds& start, const MergeThresholds& end) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto gt = generate(fixture_spec(HairStyle::Curly));
  const auto frags = fragment(gt, fixture_fragments());
  const auto target = sample_oriented_cloud(gt, kCloudSpacing, kCloudNoise, kSeed);
  RefineConfig cfg;
  cfg.schedule_start = start;
  cfg.schedule_end = end;
  const auto result = run_stage3(frags.fragments, target, cfg);
  const std::vector<MatchThresholds> t{{4.0, deg_to_rad(40.0)}};
  const auto metrics = evaluate(result.strands, gt, t, kMetricSpacing);
  PipelineRun run;
  run.seconds = seconds_since(t0);
  run.f_4_40 = metrics[0].f1;
  run.merge_lengths = result.merge_average_lengths;
  run.growth = result.merge_average_lengths.back() / result.initial_merge_average_length;
  return run;
}

std::string lengths(const std::vector<double>& v) {
  std::string s;
  for (const double x : v) s += fmt::format("{}{:.2f}", s.empty() ? "" : " -> ", x);
  return s;
}

void stage3_criteria() {
  struct Schedule {
    const char* name;
    MergeThresholds start, end;
  };
  const Schedule schedules[] = {
      {"1/10->2/20", {1.0, deg_to_rad(10.0)}, {2.0, deg_to_rad(20.0)}},
      {"2/20->4/40", {2.0, deg_to_rad(20.0)}, {4.0, deg_to_rad(40.0)}},
      {"4/40->6/60", {4.0, deg_to_rad(40.0)}, {6.0, deg_to_rad(60.0)}},
      {"6/60->8/80", {6.0, deg_to_rad(60.0)}, {8.0, deg_to_rad(80.0)}},
  };
  std::vector<PipelineRun> runs;
  for (const auto& s : schedules) {
    runs.push_back(curly_pipeline(s.start, s.end));
    fmt::print("  schedule {}: F(4mm/40deg) {:.4f}, average length {}, {:.1f} s\n", s.name, runs.back().f_4_40,
               lengths(runs.back().merge_lengths), runs.back().seconds);
    std::fflush(stdout);
  }
  const auto& relaxed = runs[1];

  report(relaxed.growth >= 1.5, "growth",
         fmt::format("average strand length {} mm, x{:.2f} over the strict merge (>= 1.5)",
                     lengths(relaxed.merge_lengths), relaxed.growth));

  const double f1 = runs[0].f_4_40, f2 = runs[1].f_4_40, f3 = runs[2].f_4_40, f4 = runs[3].f_4_40;
  const double spread = std::abs(f2 - f3) / std::max(f2, f3);
  const bool stable = spread <= 0.05;
  const bool low_lower = f1 < std::min(f2, f3);
  const bool high_lower = f4 < std::min(f2, f3);
  report(stable && low_lower && high_lower, "threshold-ablation",
         fmt::format("F = {:.4f} / {:.4f} / {:.4f} / {:.4f}; middle spread {:.2f}% (<= 5%), low extreme lower: {}, "
                     "high extreme lower: {}",
                     f1, f2, f3, f4, 100 * spread, low_lower ? "yes" : "no", high_lower ? "yes" : "no"));

  report(relaxed.seconds < 300.0, "end-to-end-runtime",
         fmt::format("500-strand Curly pipeline with 2000 refinement iterations in {:.1f} s (< 300 s)",
                     relaxed.seconds));
}

// ---------------------------------------------------------------------------

std::vector<DirectedSample> random_samples(Rng& rng, std::size_t n, std::size_t strands, double box) {
  std::vector<DirectedSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    DirectedSample s;
    s.position = Point3(rng.uniform(0, box), rng.uniform(0, box), rng.uniform(0, box));
    s.direction = Dir3::normalized({rng.normal(), rng.normal(), rng.normal()});
    s.strand_index = std::min<std::size_t>(strands - 1, i * strands / n);
    s.strand_id = static_cast<StrandId>(s.strand_index);
    s.index_on_strand = i;
    out.push_back(s);
  }
  return out;
}

void metrics_oracle() {
  Rng rng(2024);
  int agree = 0;
  std::size_t largest = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto pred = random_samples(rng, 1 + rng.below(200), 1 + rng.below(10), 8.0);
    const auto gt = random_samples(rng, 1 + rng.below(200), 1 + rng.below(10), 8.0);
    largest = std::max({largest, pred.size(), gt.size()});
    const MatchThresholds t{rng.uniform(0.5, 4.0), deg_to_rad(rng.uniform(10.0, 60.0))};
    const auto fast = match(pred, gt, t);
    const auto slow = reference::match_brute_force(pred, gt, t);
    const auto pf = precision_recall_from(fast), ps = precision_recall_from(slow);
    const bool same = fast.pred_matched == slow.pred_matched && fast.gt_matched == slow.gt_matched &&
                      pf.precision == ps.precision && pf.recall == ps.recall && pf.f1 == ps.f1 &&
                      strand_consistency(pred, gt, t) == reference::strand_consistency_brute_force(pred, gt, t);
    agree += same;
  }
  report(agree == 50, "metrics-oracle",
         fmt::format("{}/50 random instances (up to {} samples) identical to brute force", agree, largest));
}

Strand line(StrandId id, Point3 a, Point3 b, int joints) {
  std::vector<Point3> p;
  for (int i = 0; i < joints; ++i) p.push_back(a + (b - a) * (double(i) / (joints - 1)));
  return Strand::with_uniform_thickness(id, std::move(p));
}

void sc_cases() {
  const MatchThresholds t{2.0, deg_to_rad(20.0)};
  const auto curly = generate(fixture_spec(HairStyle::Curly, 50));
  const double identity = strand_consistency(curly, curly, t, kMetricSpacing);

  std::vector<Strand> whole, halves;
  for (int i = 0; i < 10; ++i) {
    whole.push_back(line(i, {0, 10.0 * i, 0}, {40, 10.0 * i, 0}, 41));
    halves.push_back(line(2 * i, {0, 10.0 * i, 0}, {19.5, 10.0 * i, 0}, 21));
    halves.push_back(line(2 * i + 1, {20.5, 10.0 * i, 0}, {40, 10.0 * i, 0}, 21));
  }
  const double split = strand_consistency(StrandSet(halves), StrandSet(whole), {0.5, deg_to_rad(20.0)}, 1.0);

  FragmentOptions o;
  o.gap = 0.0;
  o.seed = kSeed;
  const auto shuffled = fragment(curly, o).fragments;
  const double sc_shuffled = strand_consistency(shuffled, curly, t, kMetricSpacing);
  const double precision = precision_recall_f1(shuffled, curly, t, kMetricSpacing).precision;

  report(identity == 1.0 && std::abs(split - 0.5) <= 0.02 && sc_shuffled < precision, "sc-analytic",
         fmt::format("SC(X,X) = {:.17g}; split halves SC = {:.4f} (0.5 +- 0.02); shuffled connectivity SC = {:.4f} "
                     "< precision {:.4f}",
                     identity, split, sc_shuffled, precision));
}

// ---------------------------------------------------------------------------

using Loss = std::function<double(const StrandSet&)>;

JointGradients finite_difference(const StrandSet& set, const Loss& f, double h) {
  JointGradients g(set.size());
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto joints = set[s].joints();
    g[s].assign(joints.size(), Eigen::Vector3d::Zero());
    for (std::size_t j = 0; j < joints.size(); ++j) {
      for (int c = 0; c < 3; ++c) {
        auto with = [&](double delta) {
          std::vector<Strand> copy(set.strands().begin(), set.strands().end());
          std::vector<Point3> p(joints.begin(), joints.end());
          p[j][c] += delta;
          copy[s] = set[s].with_joints(std::move(p));
          return f(StrandSet(std::move(copy)));
        };
        g[s][j][c] = (with(h) - with(-h)) / (2 * h);
      }
    }
  }
  return g;
}

double relative_error(const JointGradients& a, const JointGradients& b) {
  double diff = 0, norm = 0;
  for (std::size_t s = 0; s < a.size(); ++s)
    for (std::size_t j = 0; j < a[s].size(); ++j) {
      diff += (a[s][j] - b[s][j]).squaredNorm();
      norm += b[s][j].squaredNorm();
    }
  return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

Strand random_walk(Rng& rng, StrandId id, int joints, double step, double wiggle) {
  std::vector<Point3> p{Point3(rng.normal(), rng.normal(), rng.normal())};
  Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
  d.normalize();
  for (int j = 1; j < joints; ++j) {
    d = (d + wiggle * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal())).normalized();
    p.push_back(p.back() + step * rng.uniform(0.5, 1.5) * d);
  }
  return Strand::with_uniform_thickness(id, std::move(p));
}

bool away_from_smooth_branch(const StrandSet& set, double theta_s) {
  for (const auto& s : set.strands()) {
    const auto p = s.joints();
    for (std::size_t j = 1; j + 1 < p.size(); ++j) {
      const double a =
          std::acos(std::clamp((p[j] - p[j - 1]).normalized().dot((p[j + 1] - p[j]).normalized()), -1.0, 1.0));
      if (std::abs(a - theta_s) < 1e-3 || a > std::numbers::pi - 1e-3) return false;
    }
  }
  return true;
}

bool data_term_regular(const StrandSet& set, const OrientedPointCloud& target, const Correspondences& corr,
                       double spacing) {
  for (std::size_t s = 0; s < set.size(); ++s) {
    const auto p = set[s].joints();
    const auto c = cumulative_lengths(p);
    const double ratio = c.back() / spacing;
    if (std::abs(ratio - std::round(ratio)) < 1e-3) return false;
    const auto samples = sample_by_arc_length(p, spacing);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      for (const double cj : c)
        if (std::abs(samples[k].arc - cj) < 1e-3 && !samples[k].chord && cj > 0) return false;
      const double dot = std::abs(samples[k].direction.dot(target.directions()[corr[s][k]]));
      if (dot > 1 - 1e-6 || dot < 1e-3) return false;
    }
  }
  return true;
}

void gradient_checks() {
  constexpr double h = 1e-4, tol = 1e-4;
  Rng rng(31);
  int smooth_ok = 0, checked = 0;
  double worst_smooth = 0;
  while (checked < 100) {
    std::vector<Strand> strands;
    for (int s = 0; s < 3; ++s) strands.push_back(random_walk(rng, s, 3 + int(rng.below(6)), 1.0, 0.5));
    const StrandSet set(strands);
    const double ts = deg_to_rad(rng.uniform(5, 40));
    if (!away_from_smooth_branch(set, ts)) continue;
    const auto fd = finite_difference(set, [&](const StrandSet& x) { return smoothness_loss(x, ts); }, h);
    const double e = relative_error(smoothness_grad(set, ts), fd);
    worst_smooth = std::max(worst_smooth, e);
    smooth_ok += e < tol;
    ++checked;
  }

  int data_ok = 0;
  double worst_data = 0;
  checked = 0;
  while (checked < 100) {
    std::vector<Point3> pts;
    std::vector<Dir3> dirs;
    for (int i = 0; i < 300; ++i) {
      pts.emplace_back(rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(-4, 4));
      dirs.push_back(Dir3::normalized({rng.normal(), rng.normal(), rng.normal()}));
    }
    const OrientedPointCloud target(pts, dirs);
    std::vector<Strand> strands;
    for (int s = 0; s < 2; ++s)
      strands.push_back(random_walk(rng, s, 2 + int(rng.below(6)), rng.uniform(0.3, 1.5), 0.6));
    const StrandSet set(strands);
    const double spacing = rng.uniform(0.3, 1.2);
    const double w = checked % 4 == 0 ? 0.0 : rng.uniform(0.1, 1.0);
    const auto corr = nearest_correspondences(set, KdTree(target.points()), spacing);
    if (!data_term_regular(set, target, corr, spacing)) continue;
    const auto analytic = data_loss(set, target, spacing, w, &corr);
    const auto fd = finite_difference(
        set, [&](const StrandSet& x) { return data_loss(x, target, spacing, w, &corr).value; }, h);
    const double e = relative_error(analytic.gradient, fd);
    worst_data = std::max(worst_data, e);
    data_ok += e < tol;
    ++checked;
  }
  report(smooth_ok == 100 && data_ok == 100, "gradient-checks",
         fmt::format("smoothness {}/100 (worst rel. error {:.2e}), data {}/100 (worst {:.2e}); h = 1e-4, tol 1e-4",
                     smooth_ok, worst_smooth, data_ok, worst_data));
}

void geometry_invariants() {
  Rng rng(41);
  int rot_ok = 0;
  double worst_rot = 0;
  for (int i = 0; i < 1000; ++i) {
    Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
    if (i % 10 == 0) v = Eigen::Vector3d(-1.0, 1e-9 * rng.normal(), 1e-9 * rng.normal());
    if (i == 0) v = Eigen::Vector3d(-1.0, 0.0, 0.0);
    const auto d = Dir3::normalized(v);
    const Mat3 R = rodrigues_align(d);
    const double e = std::max({(R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff(),
                               std::abs(R.determinant() - 1.0), (R * Eigen::Vector3d::UnitX() - d.vec()).norm()});
    worst_rot = std::max(worst_rot, e);
    rot_ok += e < 1e-9;
  }
  int cov_ok = 0;
  double worst_cov = 0;
  for (int i = 0; i < 1000; ++i) {
    GaussianSegment g;
    g.rotation = Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
    g.scale = Eigen::Vector3d(rng.uniform(0.01, 10), rng.uniform(0.01, 10), rng.uniform(0.01, 10));
    Eigen::SelfAdjointEigenSolver<Mat3> es(covariance(g));
    Eigen::Vector3d want = g.scale.cwiseProduct(g.scale);
    std::sort(want.data(), want.data() + 3);
    double e = 0;
    for (int k = 0; k < 3; ++k) e = std::max(e, std::abs(es.eigenvalues()[k] - want[k]) / want[k]);
    worst_cov = std::max(worst_cov, e);
    cov_ok += e <= 1e-9;
  }
  report(rot_ok == 1000 && cov_ok == 1000, "geometry-invariants",
         fmt::format("rotations {}/1000 (worst {:.1e}, antiparallel included), covariance eigenvalues {}/1000 "
                     "(worst rel. {:.1e}); tol 1e-9",
                     rot_ok, worst_rot, cov_ok, worst_cov));
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
}

void format_conformance() {
  const fs::path fixtures = HAIRSTRAND_FIXTURES;
  const auto tmp = fs::temp_directory_path() / fmt::format("hairstrand_acceptance_{}", Rng(std::random_device{}()).next());
  fs::create_directories(tmp);

  const auto hair = fixtures / "hair" / "canonical.hair";
  const auto native = fixtures / "native" / "canonical.strands";
  write_hair(tmp / "a.hair", read_hair(hair).strands);
  write_native(tmp / "a.strands", read_native(native));
  const bool hair_same = slurp(hair) == slurp(tmp / "a.hair");
  const bool native_same = slurp(native) == slurp(tmp / "a.strands");

  struct Fixture {
    fs::path path;
    std::function<void(const fs::path&)> read;
  };
  const Fixture files[] = {
      {hair, [](const fs::path& p) { read_hair(p); }},
      {fixtures / "hair" / "segments_thickness.hair", [](const fs::path& p) { read_hair(p); }},
      {fixtures / "usc" / "two_by_three.data", [](const fs::path& p) { read_usc(p, 1.0); }},
      {native, [](const fs::path& p) { read_native(p); }},
  };
  Rng rng(51);
  int positioned = 0, trials = 0, other = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& f = files[i % 4];
    const auto bytes = slurp(f.path);
    const auto cut = rng.below(bytes.size());
    spit(tmp / "cut", bytes.substr(0, cut));
    ++trials;
    try {
      f.read(tmp / "cut");
    } catch (const FormatError& e) {
      const bool in_range = e.unit() == FormatError::Unit::Byte ? e.position() <= cut : e.position() >= 1;
      positioned += in_range;
      continue;
    } catch (...) {
      ++other;
    }
  }
  fs::remove_all(tmp);
  report(hair_same && native_same && positioned == 1000, "format-conformance",
         fmt::format("HAIR round trip byte-identical: {}, native: {}; {}/{} truncations rejected with a positioned "
                     "error ({} other outcomes)",
                     hair_same ? "yes" : "no", native_same ? "yes" : "no", positioned, trials, other));
}

void orientation_fixture() {
  const int n = 64;
  GrayImage img(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double a = std::numbers::pi / 4;
      img.at(x, y) = 0.5 + 0.5 * std::cos(2 * std::numbers::pi * (-x * std::sin(a) + y * std::cos(a)) / 4.0);
    }
  const auto map = orient_map(img);
  double sum = 0;
  int count = 0;
  for (std::size_t i = 0; i < map.theta.size(); ++i) {
    if (map.confidence.values()[i] > 0.5) {
      sum += map.theta.values()[i];
      ++count;
    }
  }
  const double mean_err = count ? rad_to_deg(std::abs(sum / count - std::numbers::pi / 4)) : 180.0;

  Rng rng(61);
  int metric_ok = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(0, std::numbers::pi), b = rng.uniform(0, std::numbers::pi),
                 c = rng.uniform(0, std::numbers::pi);
    const double ab = delta_theta(a, b);
    metric_ok += ab >= 0 && ab <= std::numbers::pi / 2 && ab == delta_theta(b, a) && delta_theta(a, a) == 0 &&
                 delta_theta(a, c) <= ab + delta_theta(b, c) + 1e-12 && delta_theta(a, a + std::numbers::pi) < 1e-12;
  }
  const MaskImage half(16, 16, 0.5);
  const double bce_err = std::abs(mask_loss(half, half) - std::log(2.0));
  report(count > 0 && mean_err < 2.0 && metric_ok == 10000 && bce_err <= 1e-9, "orientation-fixture",
         fmt::format("mean theta off by {:.3f} deg over {} confident pixels (< 2); pseudometric {}/10000 triples; "
                     "|BCE - ln 2| = {:.1e} (<= 1e-9)",
                     mean_err, count, metric_ok, bce_err));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::pair<const char*, void (*)()> criteria[] = {
      {"merge-oracle", merge_oracle},
      {"metrics-oracle", metrics_oracle},
      {"sc-analytic", sc_cases},
      {"gradient-checks", gradient_checks},
      {"geometry-invariants", geometry_invariants},
      {"format-conformance", format_conformance},
      {"orientation-fixture", orientation_fixture},
      {"growth, threshold-ablation, end-to-end-runtime", stage3_criteria},
  };
  for (const auto& [name, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(false, name, fmt::format("exception: {}", e.what()));
    }
  }
  fmt::print("{} criteria failed; total {:.1f} s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}

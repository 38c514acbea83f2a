#include "hairstrand/synth.hpp"

#include "hairstrand/error.hpp"
#include "hairstrand/polyline.hpp"
#include "hairstrand/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <numbers>

namespace hairstrand {

std::string to_string(HairStyle style) {
  switch (style) {
    case HairStyle::Straight: return "straight";
    case HairStyle::Wavy: return "wavy";
    case HairStyle::Curly: return "curly";
    case HairStyle::Helix: return "helix";
  }
  return "unknown";
}

std::optional<HairStyle> parse_hair_style(const std::string& name) {
  std::string lower;
  for (const char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (const auto s : {HairStyle::Straight, HairStyle::Wavy, HairStyle::Curly, HairStyle::Helix}) {
    if (to_string(s) == lower) return s;
  }
  return std::nullopt;
}

void HairstyleSpec::validate() const {
  if (strand_count < 1 || joints_per_strand < 2) {
    throw InvalidArgument("hairstyle needs at least one strand and two joints per strand");
  }
  if (!(scalp_radius > 0.0) || !(length_mean > 0.0) || length_std < 0.0) {
    throw InvalidArgument("scalp radius and mean length must be positive");
  }
  if (!(curl_radius > 0.0) || !(curl_pitch > 0.0) || wave_amplitude < 0.0 || !(wave_length > 0.0)) {
    throw InvalidArgument("curl radius, curl pitch and wave length must be positive");
  }
  if (droop < 0.0 || droop >= 1.0) throw InvalidArgument("droop must be in [0, 1)");
}

Point3 HelixGeometry::position(double sigma) const {
  const double a = wavenumber * sigma + phase;
  return base + sigma * axis + radius * (std::cos(a) * e1 + std::sin(a) * e2);
}

Eigen::Vector3d HelixGeometry::unit_tangent(double sigma) const {
  const double a = wavenumber * sigma + phase;
  const Eigen::Vector3d t = axis + radius * wavenumber * (-std::sin(a) * e1 + std::cos(a) * e2);
  return t.normalized();
}

namespace {

struct StrandDraw {
  Eigen::Vector3d normal;
  Point3 root;
  double length;
  double phase;
};

StrandDraw draw_strand(const HairstyleSpec& spec, int index) {
  Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(index));
  const double z = rng.uniform(0.2, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double rho = std::sqrt(1.0 - z * z);
  StrandDraw d;
  d.normal = Eigen::Vector3d(rho * std::cos(phi), rho * std::sin(phi), z);
  d.root = spec.scalp_radius * d.normal;
  d.length = std::max(0.3 * spec.length_mean, spec.length_mean + spec.length_std * rng.normal());
  d.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return d;
}

Eigen::Vector3d perpendicular(const Eigen::Vector3d& n) {
  const Eigen::Vector3d ref = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  return n.cross(ref).normalized();
}

std::vector<Point3> resample_uniform(std::span<const Point3> dense, double length, int joints) {
  const auto cumulative = cumulative_lengths(dense);
  std::vector<Point3> out;
  out.reserve(joints);
  for (int j = 0; j < joints; ++j) {
    out.push_back(point_at_arc(dense, cumulative, length * j / (joints - 1)));
  }
  return out;
}

// Dense trace of a strand around a drooping spine; cut at arc `length`.
std::vector<Point3> spine_strand(const HairstyleSpec& spec, const StrandDraw& d) {
  constexpr double step = 0.05;  // mm of spine per dense point
  const Eigen::Vector3d down(0.0, 0.0, -1.0);
  Eigen::Vector3d tangent = d.normal;
  Eigen::Vector3d e1 = perpendicular(tangent);

  const double k_curl = 2.0 * std::numbers::pi / spec.curl_pitch;
  const double k_wave = 2.0 * std::numbers::pi / spec.wave_length;
  auto offset = [&](double sigma, const Eigen::Vector3d& t, const Eigen::Vector3d& u) -> Eigen::Vector3d {
    switch (spec.style) {
      case HairStyle::Wavy:
        return spec.wave_amplitude * std::sin(k_wave * sigma + d.phase) * u;
      case HairStyle::Curly: {
        const double a = k_curl * sigma + d.phase;
        return spec.curl_radius * (std::cos(a) * u + std::sin(a) * t.cross(u));
      }
      default:
        return Eigen::Vector3d::Zero();
    }
  };

  Point3 spine = d.root - offset(0.0, tangent, e1);
  std::vector<Point3> dense{spine + offset(0.0, tangent, e1)};
  double arc = 0.0, sigma = 0.0;
  while (arc < d.length) {
    const double w = spec.droop * std::min(1.0, sigma / d.length);
    const Eigen::Vector3d next_tangent = ((1.0 - w) * d.normal + w * down).normalized();
    // Parallel transport of the normal frame along the spine.
    e1 = (e1 - e1.dot(next_tangent) * next_tangent).normalized();
    tangent = next_tangent;
    spine += step * tangent;
    sigma += step;
    const Point3 p = spine + offset(sigma, tangent, e1);
    arc += (p - dense.back()).norm();
    dense.push_back(p);
  }
  return dense;
}

}  // namespace

HelixGeometry helix_geometry(const HairstyleSpec& spec, int index) {
  const auto d = draw_strand(spec, index);
  HelixGeometry h;
  h.axis = d.normal;
  h.e1 = perpendicular(d.normal);
  h.e2 = d.normal.cross(h.e1);
  h.radius = spec.curl_radius;
  h.wavenumber = 2.0 * std::numbers::pi / spec.curl_pitch;
  h.phase = d.phase;
  h.axis_length = d.length / std::sqrt(1.0 + std::pow(h.radius * h.wavenumber, 2));
  h.base = d.root - h.radius * (std::cos(h.phase) * h.e1 + std::sin(h.phase) * h.e2);
  return h;
}

StrandSet generate(const HairstyleSpec& spec) {
  spec.validate();
  std::vector<std::optional<Strand>> strands(spec.strand_count);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < spec.strand_count; ++i) {
    std::vector<Point3> joints;
    if (spec.style == HairStyle::Helix) {
      const auto h = helix_geometry(spec, i);
      for (int j = 0; j < spec.joints_per_strand; ++j) {
        joints.push_back(h.position(h.axis_length * j / (spec.joints_per_strand - 1)));
      }
    } else {
      const auto d = draw_strand(spec, i);
      const auto dense = spine_strand(spec, d);
      joints = resample_uniform(dense, d.length, spec.joints_per_strand);
    }
    strands[i].emplace(Strand::with_uniform_thickness(i, std::move(joints)));
  }
  std::vector<Strand> out;
  out.reserve(strands.size());
  for (auto& s : strands) out.push_back(std::move(*s));
  return StrandSet(std::move(out));
}

namespace {

struct Piece {
  std::vector<Point3> joints;
  StrandAttributes attributes;
  double thickness = kDefaultThickness;
  FragmentOrigin origin;
};

constexpr double kArcEps = 1e-12;

// Index of a joint sitting exactly at arc `s`, if any.
std::optional<std::size_t> joint_at(std::span<const double> cumulative, double s) {
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), s - kArcEps);
  if (it != cumulative.end() && std::abs(*it - s) <= kArcEps) {
    return static_cast<std::size_t>(it - cumulative.begin());
  }
  return std::nullopt;
}

std::vector<Point3> extract(std::span<const Point3> joints, std::span<const double> cumulative,
                            double a, double b, bool keep_ends_clear) {
  const auto ja = joint_at(cumulative, a);
  const auto jb = joint_at(cumulative, b);
  std::vector<Point3> pts{ja ? joints[*ja] : point_at_arc(joints, cumulative, a)};
  const Point3 end = jb ? joints[*jb] : point_at_arc(joints, cumulative, b);

  std::vector<std::size_t> interior;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    if (cumulative[j] > a + kArcEps && cumulative[j] < b - kArcEps) interior.push_back(j);
  }
  // With jitter, a cut landing just before a joint leaves a stub end segment
  // whose direction is mostly noise; drop such joints.
  if (keep_ends_clear && !interior.empty()) {
    const auto first = interior.front();
    if (!ja && cumulative[first] - a < 0.5 * (cumulative[first] - cumulative[first - 1])) {
      interior.erase(interior.begin());
    }
  }
  if (keep_ends_clear && !interior.empty()) {
    const auto last = interior.back();
    if (!jb && last + 1 < joints.size() &&
        b - cumulative[last] < 0.5 * (cumulative[last + 1] - cumulative[last])) {
      interior.pop_back();
    }
  }
  for (const auto j : interior) {
    if ((joints[j] - pts.back()).norm() > kMinSegmentLength) pts.push_back(joints[j]);
  }
  if ((end - pts.back()).norm() > kMinSegmentLength) {
    pts.push_back(end);
  } else if (pts.size() > 1) {
    pts.back() = end;
  }
  return pts;
}

// Arc position of the joint nearest to `target` inside (lo, hi); `target` itself otherwise.
double snap_to_joint(std::span<const double> cumulative, double target, double lo, double hi) {
  const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), target);
  double best = target, best_d = std::numeric_limits<double>::infinity();
  for (auto c : {it, it == cumulative.begin() ? it : it - 1}) {
    if (c == cumulative.end()) continue;
    if (*c > lo && *c < hi && std::abs(*c - target) < best_d) {
      best = *c;
      best_d = std::abs(*c - target);
    }
  }
  return best;
}

}  // namespace

FragmentGroundTruth fragment(const StrandSet& set, const FragmentOptions& o) {
  if (!(o.min_length > 0.0) || o.max_length < o.min_length) {
    throw InvalidArgument("fragment lengths need 0 < min_length <= max_length");
  }
  if (o.gap < 0.0 || o.jitter_sigma < 0.0) throw InvalidArgument("gap and jitter must be non-negative");

  std::vector<std::vector<Piece>> per_strand(set.size());
  const auto n = static_cast<std::ptrdiff_t>(set.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const Strand& strand = set[s];
    Rng rng = Rng::stream(o.seed, static_cast<std::uint64_t>(s));
    const auto joints = strand.joints();
    const auto cumulative = cumulative_lengths(joints);
    const double length = cumulative.back();

    std::vector<std::pair<double, double>> intervals;
    double a = 0.0;
    while (a < length - kMinSegmentLength) {
      const double rest = length - a;
      if (rest <= o.max_length) {
        intervals.emplace_back(a, length);
        break;
      }
      const double hi = std::min(o.max_length, rest - o.gap - o.min_length);
      const double piece = hi >= o.min_length ? rng.uniform(o.min_length, hi) : 0.5 * (rest - o.gap);
      double b = a + piece;
      b = snap_to_joint(cumulative, b, std::max(a + o.min_length, a + 0.5 * piece),
                        std::min({a + o.max_length, length - o.gap - kMinSegmentLength}));
      intervals.emplace_back(a, b);
      a = b + o.gap;
    }

    for (const auto& [pa, pb] : intervals) {
      auto pts = extract(joints, cumulative, pa, pb, o.jitter_sigma > 0.0);
      if (pts.size() < 2) continue;
      for (auto& p : pts) {
        p += o.jitter_sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      }
      bool degenerate = false;
      for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
        degenerate |= (pts[j + 1] - pts[j]).norm() <= kMinSegmentLength;
      }
      if (degenerate) continue;
      const bool reversed = rng.uniform() < 0.5;
      if (reversed) std::reverse(pts.begin(), pts.end());
      per_strand[s].push_back(
          {std::move(pts), strand.attributes(), strand.thickness()[0], {strand.id(), pa, pb, reversed}});
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> handles;  // (strand, piece)
  for (std::size_t s = 0; s < per_strand.size(); ++s)
    for (std::size_t k = 0; k < per_strand[s].size(); ++k) handles.emplace_back(s, k);
  std::vector<std::size_t> order(handles.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffler = Rng::stream(o.seed, 0xffffffffULL + set.size());
  shuffler.shuffle(order.begin(), order.end());

  // Fragment id = position after shuffling.
  std::vector<std::vector<StrandId>> ids(per_strand.size());
  for (std::size_t s = 0; s < per_strand.size(); ++s) ids[s].resize(per_strand[s].size());
  std::vector<Strand> fragments;
  FragmentGroundTruth gt;
  fragments.reserve(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto [s, k] = handles[order[pos]];
    Piece& piece = per_strand[s][k];
    const auto id = static_cast<StrandId>(pos);
    ids[s][k] = id;
    gt.origin[id] = piece.origin;
    fragments.push_back(Strand::with_uniform_thickness(id, std::move(piece.joints), piece.thickness,
                                                       piece.attributes));
  }
  for (std::size_t s = 0; s < per_strand.size(); ++s) {
    for (std::size_t k = 0; k + 1 < per_strand[s].size(); ++k) {
      gt.adjacency.emplace_back(ids[s][k], ids[s][k + 1]);
    }
  }
  gt.fragments = StrandSet(std::move(fragments), set.unit_scale());
  return gt;
}

OrientedPointCloud sample_oriented_cloud(const StrandSet& set, double spacing, double noise_sigma,
                                         std::uint64_t seed) {
  if (!(spacing > 0.0)) throw InvalidArgument("cloud spacing must be positive");
  if (noise_sigma < 0.0) throw InvalidArgument("noise sigma must be non-negative");
  std::vector<Point3> points;
  std::vector<Dir3> directions;
  Rng rng(Rng::mix(seed));
  for (const auto& s : set.strands()) {
    for (const auto& a : sample_by_arc_length(s.joints(), spacing)) {
      Point3 p = a.position;
      if (noise_sigma > 0.0) p += noise_sigma * Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      points.push_back(p);
      directions.push_back(a.direction);
    }
  }
  return OrientedPointCloud(std::move(points), std::move(directions));
}

double adjacency_recovery(const StrandSet& merged, const StrandSet& fragments,
                          std::span<const std::pair<StrandId, StrandId>> adjacency) {
  if (adjacency.empty()) return 1.0;
  using Key = std::array<std::uint64_t, 3>;
  auto key = [](const Point3& p) {
    return Key{std::bit_cast<std::uint64_t>(p.x()), std::bit_cast<std::uint64_t>(p.y()),
               std::bit_cast<std::uint64_t>(p.z())};
  };
  std::map<Key, std::vector<std::pair<std::size_t, std::size_t>>> where;
  for (std::size_t s = 0; s < merged.size(); ++s) {
    const auto joints = merged[s].joints();
    for (std::size_t j = 0; j < joints.size(); ++j) where[key(joints[j])].emplace_back(s, j);
  }
  std::map<StrandId, std::size_t> index_of;
  for (std::size_t i = 0; i < fragments.size(); ++i) index_of[fragments[i].id()] = i;

  auto ends = [&](StrandId id) {
    const auto joints = fragments[index_of.at(id)].joints();
    return std::array<Point3, 2>{joints.front(), joints.back()};
  };
  std::size_t recovered = 0;
  for (const auto& [fa, fb] : adjacency) {
    bool found = false;
    for (const auto& pa : ends(fa)) {
      for (const auto& pb : ends(fb)) {
        const auto ia = where.find(key(pa));
        const auto ib = where.find(key(pb));
        if (ia == where.end() || ib == where.end()) continue;
        for (const auto& [sa, ja] : ia->second)
          for (const auto& [sb, jb] : ib->second)
            found |= sa == sb && (ja > jb ? ja - jb : jb - ja) <= 2;
      }
    }
    recovered += found;
  }
  return static_cast<double>(recovered) / static_cast<double>(adjacency.size());
}

}  // namespace hairstrand

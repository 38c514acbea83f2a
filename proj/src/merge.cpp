#include "hairstrand/merge.hpp"

#include "hairstrand/error.hpp"
#include "hairstrand/kdtree.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <tuple>

namespace hairstrand {

void MergeThresholds::validate() const {
  if (!(max_distance > 0.0) || !std::isfinite(max_distance)) {
    throw InvalidArgument(fmt::format("merge distance threshold must be positive, got {}", max_distance));
  }
  if (!(max_angle > 0.0) || max_angle > std::numbers::pi) {
    throw InvalidArgument(fmt::format("merge angle threshold must be in (0, pi], got {}", max_angle));
  }
}

std::vector<Endpoint> collect_endpoints(const StrandSet& set) {
  std::vector<Endpoint> out;
  out.reserve(2 * set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto joints = set[i].joints();
    const auto m = joints.size();
    out.push_back({set[i].id(), i, EndKind::Root, joints[0], Dir3::normalized(joints[0] - joints[1])});
    out.push_back({set[i].id(), i, EndKind::Tip, joints[m - 1],
                   Dir3::normalized(joints[m - 1] - joints[m - 2])});
  }
  return out;
}

double continuation_angle(const Endpoint& a, const Endpoint& b) {
  const double c = std::clamp(a.out_direction.dot(b.out_direction), -1.0, 1.0);
  return std::numbers::pi - std::acos(c);
}

std::optional<double> candidate_cost(const Endpoint& a, const Endpoint& b, const MergeThresholds& t) {
  if (a.strand_id == b.strand_id) return std::nullopt;
  const double distance = (a.position - b.position).norm();
  if (distance > t.max_distance) return std::nullopt;
  const double angle = continuation_angle(a, b);
  if (angle > t.max_angle) return std::nullopt;
  return distance / t.max_distance + angle / t.max_angle;
}

namespace {

auto order_key(const MergeCandidate& c) {
  return std::make_tuple(c.cost, c.a.strand_id, c.b.strand_id, static_cast<int>(c.a.end),
                         static_cast<int>(c.b.end));
}

MergeCandidate make_candidate(const Endpoint& x, const Endpoint& y, double cost) {
  const bool x_first = std::make_pair(x.strand_id, static_cast<int>(x.end)) <
                       std::make_pair(y.strand_id, static_cast<int>(y.end));
  MergeCandidate c{x_first ? x : y, x_first ? y : x, 0.0, 0.0, cost};
  c.distance = (x.position - y.position).norm();
  c.angle = continuation_angle(x, y);
  return c;
}

}  // namespace

bool candidate_before(const MergeCandidate& x, const MergeCandidate& y) {
  return order_key(x) < order_key(y);
}

std::vector<MergeCandidate> enumerate_candidates(std::span<const Endpoint> endpoints,
                                                 const MergeThresholds& t) {
  t.validate();
  std::vector<Point3> positions;
  positions.reserve(endpoints.size());
  for (const auto& e : endpoints) positions.push_back(e.position);
  const KdTree tree(positions);

  const auto n = static_cast<std::ptrdiff_t>(endpoints.size());
  std::vector<std::vector<MergeCandidate>> per_endpoint(endpoints.size());
#pragma omp parallel
  {
    std::vector<std::size_t> hits;
#pragma omp for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      hits.clear();
      tree.radius_search(endpoints[i].position, t.max_distance, hits);
      for (const auto j : hits) {
        if (static_cast<std::ptrdiff_t>(j) <= i) continue;
        if (auto cost = candidate_cost(endpoints[i], endpoints[j], t)) {
          per_endpoint[i].push_back(make_candidate(endpoints[i], endpoints[j], *cost));
        }
      }
    }
  }

  std::vector<MergeCandidate> out;
  for (auto& v : per_endpoint) {
    out.insert(out.end(), v.begin(), v.end());
  }
  std::sort(out.begin(), out.end(), candidate_before);
  return out;
}

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Link {
  bool present = false;
  std::size_t other = 0;
  EndKind other_end = EndKind::Root;
  Point3 midpoint = Point3::Zero();
  bool fused = false;
};

struct Piece {
  std::size_t strand = 0;
  bool forward = true;
};

// Endpoints closer than this are fused into one joint; a midpoint joint
// would produce a degenerate segment.
constexpr double kFuseDistance = 2.0 * kMinSegmentLength;

}  // namespace

MergeResult merge_pass(const StrandSet& set, const MergeThresholds& t, int pass_index) {
  t.validate();
  const auto endpoints = collect_endpoints(set);
  const auto candidates = enumerate_candidates(endpoints, t);

  const std::size_t n = set.size();
  std::vector<std::array<Link, 2>> links(n);
  std::vector<std::pair<std::size_t, std::size_t>> accepted;  // strand index pairs, acceptance order
  DisjointSets components(n);

  for (const auto& c : candidates) {
    Link& la = links[c.a.strand_index][static_cast<int>(c.a.end)];
    Link& lb = links[c.b.strand_index][static_cast<int>(c.b.end)];
    if (la.present || lb.present) continue;
    // A pair inside one component would close a ring.
    if (!components.unite(c.a.strand_index, c.b.strand_index)) continue;
    const Point3 mid = 0.5 * (c.a.position + c.b.position);
    const bool fused = c.distance <= kFuseDistance;
    la = {true, c.b.strand_index, c.b.end, mid, fused};
    lb = {true, c.a.strand_index, c.a.end, mid, fused};
    accepted.emplace_back(c.a.strand_index, c.b.strand_index);
  }

  MergeResult result;
  result.passes = 1;
  if (accepted.empty()) {
    result.strands = set;
    return result;
  }

  std::vector<char> visited(n, 0);
  std::vector<std::size_t> chain_position(n, 0);
  std::vector<std::size_t> component_leader(n, 0);
  std::vector<Strand> out;
  out.reserve(n - accepted.size());

  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;

    // The chain is oriented like its lowest-id member.
    std::size_t leader = start;
    {
      std::vector<std::size_t> stack{start};
      std::vector<std::size_t> members;
      visited[start] = 1;
      while (!stack.empty()) {
        const auto s = stack.back();
        stack.pop_back();
        members.push_back(s);
        for (const auto& l : links[s]) {
          if (l.present && !visited[l.other]) {
            visited[l.other] = 1;
            stack.push_back(l.other);
          }
        }
      }
      for (const auto s : members) {
        if (set[s].id() < set[leader].id()) leader = s;
      }
      for (const auto s : members) component_leader[s] = leader;
    }

    std::vector<Piece> before;  // walked outward from the leader's root
    std::vector<const Link*> before_links;
    {
      std::size_t cur = leader;
      EndKind exit = EndKind::Root;
      while (links[cur][static_cast<int>(exit)].present) {
        const Link& l = links[cur][static_cast<int>(exit)];
        const bool forward = l.other_end == EndKind::Tip;
        before.push_back({l.other, forward});
        before_links.push_back(&l);
        exit = forward ? EndKind::Root : EndKind::Tip;
        cur = l.other;
      }
    }
    std::vector<Piece> pieces(before.rbegin(), before.rend());
    std::vector<const Link*> joins(before_links.rbegin(), before_links.rend());
    pieces.push_back({leader, true});
    {
      std::size_t cur = leader;
      EndKind exit = EndKind::Tip;
      while (links[cur][static_cast<int>(exit)].present) {
        const Link& l = links[cur][static_cast<int>(exit)];
        const bool forward = l.other_end == EndKind::Root;
        pieces.push_back({l.other, forward});
        joins.push_back(&l);
        exit = forward ? EndKind::Tip : EndKind::Root;
        cur = l.other;
      }
    }

    if (pieces.size() == 1) {
      out.push_back(set[leader]);
      continue;
    }

    std::vector<Point3> joints;
    std::vector<double> thickness;
    double weight = 0.0, mask = 0.0, opacity = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      chain_position[pieces[k].strand] = k;
      const Strand oriented = pieces[k].forward ? set[pieces[k].strand] : set[pieces[k].strand].reversed();
      const auto pj = oriented.joints();
      const auto pt = oriented.thickness();
      if (k == 0) {
        joints.assign(pj.begin(), pj.end());
        thickness.assign(pt.begin(), pt.end());
      } else {
        const Link& l = *joins[k - 1];
        if (l.fused) {
          joints.back() = l.midpoint;
          joints.insert(joints.end(), pj.begin() + 1, pj.end());
        } else {
          const double t_prev = thickness.back();
          joints.push_back(l.midpoint);
          thickness.push_back(t_prev);
          thickness.push_back(pt.front());
          joints.insert(joints.end(), pj.begin(), pj.end());
        }
        thickness.insert(thickness.end(), pt.begin(), pt.end());
      }
      const double len = strand_length(oriented);
      weight += len;
      mask += len * oriented.mask_logit();
      opacity += len * oriented.opacity_logit();
      color += len * oriented.color();
    }
    StrandAttributes attrs{mask / weight, opacity / weight, color / weight};
    out.emplace_back(set[leader].id(), std::move(joints), std::move(thickness), attrs);
  }

  for (const auto& [a, b] : accepted) {
    const auto leader = component_leader[a];
    // Of the two joined strands, the one farther along the chain from the
    // leader is the one absorbed by this join.
    const auto pa = chain_position[a], pb = chain_position[b], pl = chain_position[leader];
    const auto dist = [&](std::size_t p) { return p > pl ? p - pl : pl - p; };
    const auto absorbed = dist(pa) > dist(pb) ? a : b;
    const Link& l = links[a][links[a][0].present && links[a][0].other == b ? 0 : 1];
    result.log.push_back({pass_index, set[leader].id(), set[absorbed].id(), l.midpoint});
  }

  result.strands = StrandSet(std::move(out), set.unit_scale());
  return result;
}

MergeResult merge_until_stable(const StrandSet& set, const MergeThresholds& t, int max_passes) {
  if (max_passes < 1) throw InvalidArgument("max_passes must be at least 1");
  t.validate();
  MergeResult total;
  total.strands = set;
  for (int pass = 1; pass <= max_passes; ++pass) {
    auto r = merge_pass(total.strands, t, pass);
    total.passes = pass;
    const bool changed = !r.log.empty();
    total.log.insert(total.log.end(), r.log.begin(), r.log.end());
    total.strands = std::move(r.strands);
    if (!changed) break;
  }
  return total;
}

}  // namespace hairstrand

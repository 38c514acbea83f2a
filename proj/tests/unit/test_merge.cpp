#include "hairstrand/error.hpp"
#include "hairstrand/merge.hpp"
#include "hairstrand/reference/reference.hpp"
#include "hairstrand/rng.hpp"
#include "hairstrand/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <set>

using namespace hairstrand;

namespace {

Strand line(StrandId id, Point3 a, Point3 b, int joints = 2) {
  std::vector<Point3> p;
  for (int i = 0; i < joints; ++i) p.push_back(a + (b - a) * (double(i) / (joints - 1)));
  return Strand::with_uniform_thickness(id, std::move(p));
}

const MergeThresholds strict{2.0, deg_to_rad(20.0)};

// Random short strands in a small box: many feasible candidates.
StrandSet random_fragments(Rng& rng, int n, double box) {
  std::vector<Strand> s;
  for (int i = 0; i < n; ++i) {
    const Point3 a(rng.uniform(0, box), rng.uniform(0, box), rng.uniform(0, box));
    Eigen::Vector3d d(rng.normal(), rng.normal(), rng.normal());
    d.normalize();
    s.push_back(Strand::with_uniform_thickness(i * 3 + 1, {a, a + 2.0 * d, a + 3.5 * d + 0.3 * Eigen::Vector3d::UnitZ()}));
  }
  return StrandSet(std::move(s));
}

}  // namespace

TEST_CASE("collect_endpoints") {
  const StrandSet one({line(0, {0, 0, 0}, {1, 0, 0})});
  const auto e = collect_endpoints(one);
  REQUIRE(e.size() == 2);
  CHECK(e[0].end == EndKind::Root);
  CHECK((e[0].out_direction.vec() - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-12);
  CHECK(e[1].end == EndKind::Tip);
  CHECK((e[1].position - Point3(1, 0, 0)).norm() == 0.0);
  CHECK((e[1].out_direction.vec() - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);

  const StrandSet bent({Strand::with_uniform_thickness(5, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}})});
  const auto b = collect_endpoints(bent);
  CHECK((b[1].out_direction.vec() - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);
  CHECK((b[0].out_direction.vec() - Eigen::Vector3d(-1, 0, 0)).norm() < 1e-12);

  Rng rng(1);
  CHECK(collect_endpoints(random_fragments(rng, 17, 10)).size() == 34);
}

TEST_CASE("candidate_cost") {
  const StrandSet s({line(0, {0, 0, 0}, {10, 0, 0}), line(1, {11, 0, 0}, {20, 0, 0}),
                     line(2, {15, 0, 0}, {25, 0, 0}), line(3, {10, 1, 0}, {10, 5, 0})});
  const auto e = collect_endpoints(s);
  const auto cost = candidate_cost(e[1], e[2], strict);
  REQUIRE(cost);
  CHECK(*cost == doctest::Approx(0.5));
  CHECK(continuation_angle(e[1], e[2]) == doctest::Approx(0.0));
  CHECK_FALSE(candidate_cost(e[1], e[4], strict));  // 5 mm apart
  CHECK_FALSE(candidate_cost(e[1], e[6], strict));  // 90° turn
  CHECK_FALSE(candidate_cost(e[0], e[1], MergeThresholds{100.0, std::numbers::pi}));  // same strand
}

TEST_CASE("merge_pass joins two collinear strands through the midpoint") {
  const StrandSet s({line(7, {0, 0, 0}, {10, 0, 0}), line(3, {10.5, 0, 0}, {20, 0, 0})});
  const auto r = merge_pass(s, strict);
  REQUIRE(r.strands.size() == 1);
  const auto& m = r.strands[0];
  CHECK(m.id() == 3);
  REQUIRE(m.joint_count() == 5);
  // Two 2-joint strands plus the midpoint joint.
  CHECK(s.total_joints() + 1 == r.strands.total_joints());
  bool found = false;
  for (const auto& p : m.joints()) found |= (p - Point3(10.25, 0, 0)).norm() < 1e-12;
  CHECK(found);
  CHECK(strand_length(m) == doctest::Approx(20.0));
  REQUIRE(r.log.size() == 1);
  CHECK(r.log[0].surviving_id == 3);
  CHECK(r.log[0].absorbed_id == 7);
}

TEST_CASE("root-to-root join reverses one strand") {
  const StrandSet s({line(0, {10, 0, 0}, {0, 0, 0}), line(1, {11, 0, 0}, {20, 0, 0})});
  const auto r = merge_pass(s, strict);
  REQUIRE(r.strands.size() == 1);
  const auto j = r.strands[0].joints();
  for (std::size_t k = 0; k + 1 < j.size(); ++k) CHECK(j[k + 1].x() < j[k].x());
}

TEST_CASE("distant strands are untouched") {
  const StrandSet s({line(0, {0, 0, 0}, {10, 0, 0}), line(1, {15, 0, 0}, {20, 0, 0})});
  const auto r = merge_pass(s, strict);
  REQUIRE(r.strands.size() == 2);
  CHECK(r.log.empty());
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.strands[i].id() == s[i].id());
    CHECK(std::equal(r.strands[i].joints().begin(), r.strands[i].joints().end(), s[i].joints().begin()));
  }
}

TEST_CASE("three mutually close endpoints: only the cheapest pair merges") {
  // Tips of 0 and 1 compete for the root of 2.
  const StrandSet s({line(0, {0, 0, 0}, {10, 0, 0}), line(1, {0, 0.6, 0}, {10, 0.6, 0}),
                     line(2, {10.8, 0.1, 0}, {20, 0.1, 0})});
  const auto e = collect_endpoints(s);
  const auto c0 = candidate_cost(e[1], e[4], strict);
  const auto c1 = candidate_cost(e[3], e[4], strict);
  REQUIRE(c0);
  REQUIRE(c1);
  const auto r = merge_pass(s, strict);
  CHECK(r.strands.size() == 2);
  REQUIRE(r.log.size() == 1);
  const StrandId partner = *c0 < *c1 ? 0 : 1;
  CHECK(r.log[0].surviving_id == partner);
  CHECK(r.log[0].absorbed_id == 2);
}

TEST_CASE("candidate enumeration equals the brute-force oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const auto set = random_fragments(rng, 20 + trial * 5, 12.0);
    const auto e = collect_endpoints(set);
    const MergeThresholds t{rng.uniform(0.5, 3.0), deg_to_rad(rng.uniform(10, 90))};
    const auto fast = enumerate_candidates(e, t);
    const auto slow = reference::enumerate_candidates_brute_force(e, t);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      CHECK(fast[i].a.strand_id == slow[i].a.strand_id);
      CHECK(fast[i].a.end == slow[i].a.end);
      CHECK(fast[i].b.strand_id == slow[i].b.strand_id);
      CHECK(fast[i].b.end == slow[i].b.end);
      CHECK(fast[i].cost == slow[i].cost);
    }
  }
}

TEST_CASE("greedy acceptance matches a hand-written greedy scan") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto set = random_fragments(rng, 40, 10.0);
    const MergeThresholds t{2.0, deg_to_rad(60)};
    const auto cands = reference::enumerate_candidates_brute_force(collect_endpoints(set), t);
    // Greedy scan over (strand, end) slots with ring rejection by repeated relabelling.
    std::set<std::pair<StrandId, int>> used;
    std::map<StrandId, StrandId> label;
    for (const auto& s : set.strands()) label[s.id()] = s.id();
    std::size_t accepted = 0;
    for (const auto& c : cands) {
      const auto ka = std::pair(c.a.strand_id, int(c.a.end));
      const auto kb = std::pair(c.b.strand_id, int(c.b.end));
      if (used.count(ka) || used.count(kb)) continue;
      const auto la = label[c.a.strand_id], lb = label[c.b.strand_id];
      if (la == lb) continue;
      used.insert(ka);
      used.insert(kb);
      for (auto& [id, l] : label)
        if (l == lb) l = la;
      ++accepted;
    }
    const auto r = merge_pass(set, t);
    CHECK(r.log.size() == accepted);
    CHECK(r.strands.size() == set.size() - accepted);
    CHECK(r.strands.total_joints() == set.total_joints() + accepted);
    std::set<StrandId> absorbed;
    for (const auto& entry : r.log) CHECK(absorbed.insert(entry.absorbed_id).second);
  }
}

TEST_CASE("merge_until_stable on a fragmented line") {
  std::vector<Strand> pieces;
  for (int i = 0; i < 10; ++i) {
    // Alternate orientation so root/root and tip/tip joins occur.
    const Point3 a(11.0 * i, 0, 0), b(11.0 * i + 10.0, 0, 0);
    pieces.push_back(i % 3 == 0 ? line(9 - i, b, a, 3) : line(9 - i, a, b, 3));
  }
  const StrandSet set(pieces);
  const auto r = merge_until_stable(set, strict, 100);
  REQUIRE(r.strands.size() == 1);
  CHECK(r.strands[0].id() == 0);
  CHECK(strand_length(r.strands[0]) == doctest::Approx(109.0));

  const auto again = merge_until_stable(r.strands, strict, 100);
  CHECK(again.passes == 1);
  CHECK(again.log.empty());
}

TEST_CASE("arcs of a circle never close into a ring") {
  const int n = 12;
  const double radius = 30.0, gap = 0.02;  // radians between arcs
  std::vector<Strand> arcs;
  for (int i = 0; i < n; ++i) {
    std::vector<Point3> p;
    const double a0 = 2 * std::numbers::pi * i / n + gap / 2;
    const double a1 = 2 * std::numbers::pi * (i + 1) / n - gap / 2;
    for (int k = 0; k <= 8; ++k) {
      const double a = a0 + (a1 - a0) * k / 8;
      p.emplace_back(radius * std::cos(a), radius * std::sin(a), 0);
    }
    arcs.push_back(Strand::with_uniform_thickness(i, std::move(p)));
  }
  const auto r = merge_until_stable(StrandSet(arcs), strict, 100);
  REQUIRE(r.strands.size() == 1);
  const auto j = r.strands[0].joints();
  CHECK((j.front() - j.back()).norm() > 0.1);
  CHECK(r.log.size() == n - 1);
}

TEST_CASE("merging commutes with rigid motion") {
  Rng rng(99);
  const auto set = random_fragments(rng, 60, 10.0);
  const Mat3 R = Eigen::AngleAxisd(1.1, Eigen::Vector3d(0.3, -1, 2).normalized()).toRotationMatrix();
  const Eigen::Vector3d t(5, -7, 3);
  const MergeThresholds th{2.0, deg_to_rad(45)};
  const auto a = merge_until_stable(set, th, 10);
  const auto b = merge_until_stable(transform(set, R, t), th, 10);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].surviving_id == b.log[i].surviving_id);
    CHECK(a.log[i].absorbed_id == b.log[i].absorbed_id);
    CHECK((R * a.log[i].new_joint + t - b.log[i].new_joint).norm() < 1e-9);
  }
}

TEST_CASE("tighter thresholds give a subset of candidates") {
  Rng rng(5);
  const auto e = collect_endpoints(random_fragments(rng, 80, 10.0));
  const MergeThresholds tight{1.0, deg_to_rad(30)}, loose{2.5, deg_to_rad(70)};
  std::set<std::tuple<StrandId, int, StrandId, int>> big;
  for (const auto& c : enumerate_candidates(e, loose)) big.insert({c.a.strand_id, int(c.a.end), c.b.strand_id, int(c.b.end)});
  const auto small = enumerate_candidates(e, tight);
  CHECK(small.size() < big.size());
  for (const auto& c : small) CHECK(big.count({c.a.strand_id, int(c.a.end), c.b.strand_id, int(c.b.end)}) == 1);
}

TEST_CASE("threshold validation") {
  CHECK_THROWS_AS(merge_pass(StrandSet{}, MergeThresholds{0.0, 0.3}), InvalidArgument);
  CHECK_THROWS_AS(merge_pass(StrandSet{}, MergeThresholds{1.0, 4.0}), InvalidArgument);
  CHECK_THROWS_AS(merge_until_stable(StrandSet{}, strict, 0), InvalidArgument);
  CHECK(merge_pass(StrandSet{}, strict).strands.empty());
}

TEST_CASE("fragmenter oracle: bends well under the threshold are all recovered") {
  HairstyleSpec spec;
  spec.strand_count = 60;
  spec.joints_per_strand = 60;
  spec.seed = 3;
  const auto gt = fragment(generate(spec), {5.0, 15.0, 1.0, 0.0, 4});
  const auto r = merge_until_stable(gt.fragments, strict, 100);
  CHECK(adjacency_recovery(r.strands, gt.fragments, gt.adjacency) >= 0.95);
}

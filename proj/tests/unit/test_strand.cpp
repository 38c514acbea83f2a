#include "hairstrand/error.hpp"
#include "hairstrand/rng.hpp"
#include "hairstrand/strand.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <numbers>

using namespace hairstrand;

namespace {

Eigen::Vector3d random_unit(Rng& rng) {
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-6);
  return v.normalized();
}

Eigen::Quaterniond random_rotation(Rng& rng) {
  return Eigen::Quaterniond(rng.normal(), rng.normal(), rng.normal(), rng.normal()).normalized();
}

}  // namespace

TEST_CASE("rodrigues_align on the axes") {
  CHECK(rodrigues_align(Dir3::normalized({1, 0, 0})).isApprox(Mat3::Identity(), 1e-12));

  const Mat3 y = rodrigues_align(Dir3::normalized({0, 1, 0}));
  CHECK((y * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm() < 1e-12);

  const Mat3 flip = rodrigues_align(Dir3::normalized({-1, 0, 0}));
  Mat3 expected = Mat3::Zero();
  expected.diagonal() << -1, -1, 1;
  CHECK((flip - expected).norm() < 1e-12);
}

TEST_CASE("rodrigues_align is a proper rotation onto d") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    Eigen::Vector3d v = random_unit(rng);
    if (i % 10 == 0) v = Eigen::Vector3d(-1.0, 1e-9 * rng.normal(), 1e-9 * rng.normal()).normalized();
    const auto d = Dir3::normalized(v);
    const Mat3 R = rodrigues_align(d);
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(R.determinant() - 1.0) < 1e-9);
    CHECK((R * Eigen::Vector3d::UnitX() - d.vec()).norm() < 1e-9);
  }
}

TEST_CASE("segment_to_gaussian") {
  const auto g = segment_to_gaussian({0, 0, 0}, {10, 0, 0}, 0.1);
  CHECK((g.mu - Point3(5, 0, 0)).norm() < 1e-12);
  CHECK((g.scale - Eigen::Vector3d(10, 0.1, 0.1)).norm() < 1e-12);
  CHECK(g.rotation.angularDistance(Eigen::Quaterniond::Identity()) < 1e-12);

  const auto h = segment_to_gaussian({0, 0, 0}, {0, 4, 0}, 0.2);
  CHECK((h.mu - Point3(0, 2, 0)).norm() < 1e-12);
  CHECK((h.scale - Eigen::Vector3d(4, 0.2, 0.2)).norm() < 1e-12);
  CHECK((h.rotation * Eigen::Vector3d::UnitX() - Eigen::Vector3d::UnitY()).norm() < 1e-12);

  CHECK_THROWS_AS(segment_to_gaussian({1, 1, 1}, {1, 1, 1}, 0.1), DegenerateSegment);
}

TEST_CASE("covariance") {
  GaussianSegment g;
  CHECK(covariance(g).isApprox(Mat3::Identity(), 1e-15));
  g.scale = {2, 1, 1};
  Mat3 d = Mat3::Zero();
  d.diagonal() << 4, 1, 1;
  CHECK((covariance(g) - d).norm() < 1e-14);

  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    g.rotation = random_rotation(rng);
    g.scale = Eigen::Vector3d(rng.uniform(0.01, 10), rng.uniform(0.01, 10), rng.uniform(0.01, 10));
    if (i == 0) g.scale = {3, 1, 0.5};
    const Mat3 c = covariance(g);
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> es(c);
    Eigen::Vector3d want = g.scale.cwiseProduct(g.scale);
    std::sort(want.data(), want.data() + 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(es.eigenvalues()[k] - want[k]) <= 1e-9 * want[k]);
    }
  }
}

TEST_CASE("gaussian_to_strand") {
  GaussianSegment g;
  g.scale = {10, 0.1, 0.1};
  const auto s = gaussian_to_strand(g);
  CHECK((s.joints()[0] - Point3(-5, 0, 0)).norm() < 1e-12);
  CHECK((s.joints()[1] - Point3(5, 0, 0)).norm() < 1e-12);
  CHECK(s.thickness()[0] == doctest::Approx(0.1));

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Point3 a(rng.normal(), rng.normal(), rng.normal());
    const Point3 b = a + rng.uniform(0.1, 5) * random_unit(rng);
    const auto back = gaussian_to_strand(segment_to_gaussian(a, b, 0.05), 4);
    const auto j = back.joints();
    CHECK((0.5 * (j[0] + j[1]) - 0.5 * (a + b)).norm() < 1e-9);
    CHECK(std::abs((j[1] - j[0]).norm() - (b - a).norm()) < 1e-9);
    CHECK(std::abs(std::abs((j[1] - j[0]).normalized().dot((b - a).normalized())) - 1.0) < 1e-9);
    CHECK(back.id() == 4);
  }
}

TEST_CASE("gaussian_to_strand keeps attributes") {
  GaussianSegment g;
  g.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()));
  g.scale = {3, 0.2, 0.2};
  g.mask_logit = -2;
  g.opacity_logit = 1.5;
  g.color = {0.1, 0.2, 0.3};
  const auto s = gaussian_to_strand(g);
  const Eigen::Vector3d diff = s.joints()[1] - s.joints()[0];
  CHECK(diff.normalized().cross(g.rotation * Eigen::Vector3d::UnitX()).norm() < 1e-9);
  CHECK(s.mask_logit() == -2);
  CHECK(s.opacity_logit() == 1.5);
  CHECK(s.color() == g.color);
}

TEST_CASE("strand_length") {
  const auto s = Strand::with_uniform_thickness(0, {{0, 0, 0}, {3, 0, 0}, {3, 4, 0}});
  CHECK(strand_length(s) == doctest::Approx(7.0));

  // Unit-radius helix with pitch parameter c: |p'(t)| = sqrt(1 + c²).
  const double c = 0.3, t_end = 4 * std::numbers::pi;
  std::vector<Point3> joints;
  for (int i = 0; i < 100; ++i) {
    const double t = t_end * i / 99;
    joints.emplace_back(std::cos(t), std::sin(t), c * t);
  }
  const double analytic = std::sqrt(1 + c * c) * t_end;
  CHECK(std::abs(strand_length(joints) - analytic) < 0.01 * analytic);
}

TEST_CASE("strand validation") {
  CHECK_THROWS_AS(Strand::with_uniform_thickness(0, {{0, 0, 0}}), InvalidArgument);
  CHECK_THROWS_AS(Strand::with_uniform_thickness(0, {{0, 0, 0}, {0, 0, 5e-7}}), DegenerateSegment);
  CHECK_THROWS_AS(Strand(0, {{0, 0, 0}, {1, 0, 0}}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(Strand(0, {{0, 0, 0}, {1, 0, 0}}, {0.1, 0.1}), InvalidArgument);
  const auto a = Strand::with_uniform_thickness(1, {{0, 0, 0}, {1, 0, 0}});
  CHECK_THROWS_AS(StrandSet({a, a}), InvalidArgument);
  CHECK_THROWS_AS(Dir3::normalized(Eigen::Vector3d::Zero()), DegenerateSegment);
}

TEST_CASE("reversed strand") {
  const auto s = Strand(2, {{0, 0, 0}, {1, 0, 0}, {1, 2, 0}}, {0.1, 0.3});
  const auto r = s.reversed();
  CHECK(r.joints()[0] == s.joints()[2]);
  CHECK(r.thickness()[0] == 0.3);
  CHECK(r.id() == 2);
}

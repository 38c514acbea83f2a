// Parallel kernels against their serial reference implementations.
// Arguments select the problem size; "threads" is the OpenMP team size.

#include "hairstrand/merge.hpp"
#include "hairstrand/metrics.hpp"
#include "hairstrand/orientation.hpp"
#include "hairstrand/reference/reference.hpp"
#include "hairstrand/refine.hpp"
#include "hairstrand/rng.hpp"
#include "hairstrand/synth.hpp"

#include <benchmark/benchmark.h>
#include <omp.h>

using namespace hairstrand;

namespace {

StrandSet curly(int strands) {
  HairstyleSpec spec;
  spec.style = HairStyle::Curly;
  spec.strand_count = strands;
  spec.joints_per_strand = 50;
  spec.seed = 7;
  return generate(spec);
}

StrandSet fragments(int strands) {
  FragmentOptions o;
  o.jitter_sigma = 0.1;
  o.seed = 7;
  return fragment(curly(strands), o).fragments;
}

void set_threads(const benchmark::State& state, int arg) {
  omp_set_num_threads(static_cast<int>(state.range(arg)));
}

void BM_EnumerateCandidates(benchmark::State& state) {
  set_threads(state, 1);
  const auto endpoints = collect_endpoints(fragments(static_cast<int>(state.range(0))));
  const MergeThresholds t{2.0, deg_to_rad(20.0)};
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_candidates(endpoints, t));
  state.counters["endpoints"] = static_cast<double>(endpoints.size());
}
BENCHMARK(BM_EnumerateCandidates)->Args({100, 1})->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

void BM_EnumerateCandidatesSerial(benchmark::State& state) {
  const auto endpoints = collect_endpoints(fragments(static_cast<int>(state.range(0))));
  const MergeThresholds t{2.0, deg_to_rad(20.0)};
  for (auto _ : state) benchmark::DoNotOptimize(reference::enumerate_candidates_brute_force(endpoints, t));
}
BENCHMARK(BM_EnumerateCandidatesSerial)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_MergeUntilStable(benchmark::State& state) {
  set_threads(state, 1);
  const auto set = fragments(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(merge_until_stable(set, {2.0, deg_to_rad(20.0)}, 100));
}
BENCHMARK(BM_MergeUntilStable)->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

void BM_Match(benchmark::State& state) {
  set_threads(state, 1);
  const auto gt = resample(curly(static_cast<int>(state.range(0))), 1.0);
  auto pred = gt;
  for (auto& s : pred) s.position += Eigen::Vector3d(0.3, 0.0, 0.0);
  const MatchThresholds t{2.0, deg_to_rad(20.0)};
  for (auto _ : state) benchmark::DoNotOptimize(match(pred, gt, t));
  state.counters["samples"] = static_cast<double>(gt.size());
}
BENCHMARK(BM_Match)->Args({20, 1})->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

void BM_MatchSerial(benchmark::State& state) {
  const auto gt = resample(curly(static_cast<int>(state.range(0))), 1.0);
  const MatchThresholds t{2.0, deg_to_rad(20.0)};
  for (auto _ : state) benchmark::DoNotOptimize(reference::match_brute_force(gt, gt, t));
}
BENCHMARK(BM_MatchSerial)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_StrandConsistency(benchmark::State& state) {
  set_threads(state, 1);
  const auto gt = resample(curly(static_cast<int>(state.range(0))), 1.0);
  const MatchThresholds t{2.0, deg_to_rad(20.0)};
  for (auto _ : state) benchmark::DoNotOptimize(strand_consistency(gt, gt, t));
}
BENCHMARK(BM_StrandConsistency)->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

void BM_DataLoss(benchmark::State& state) {
  set_threads(state, 1);
  const auto set = curly(static_cast<int>(state.range(0)));
  const auto cloud = sample_oriented_cloud(set, 1.0, 0.5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(data_loss(set, cloud, 1.0, 0.25));
}
BENCHMARK(BM_DataLoss)->Args({100, 1})->Args({500, 1})->Args({500, 4})->Unit(benchmark::kMillisecond);

void BM_Correspondences(benchmark::State& state) {
  set_threads(state, 1);
  const auto set = curly(static_cast<int>(state.range(0)));
  const auto cloud = sample_oriented_cloud(set, 1.0, 0.5, 1);
  const KdTree tree(cloud.points());
  for (auto _ : state) benchmark::DoNotOptimize(nearest_correspondences(set, tree, 1.0));
}
BENCHMARK(BM_Correspondences)->Args({20, 1})->Unit(benchmark::kMillisecond);

void BM_CorrespondencesSerial(benchmark::State& state) {
  const auto set = curly(static_cast<int>(state.range(0)));
  const auto cloud = sample_oriented_cloud(set, 1.0, 0.5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(reference::correspondences_brute_force(set, cloud, 1.0));
}
BENCHMARK(BM_CorrespondencesSerial)->Arg(20)->Unit(benchmark::kMillisecond);

GrayImage noise_image(int side) {
  Rng rng(3);
  GrayImage img(side, side);
  for (auto& v : img.values()) v = rng.uniform();
  return img;
}

void BM_Convolve(benchmark::State& state) {
  set_threads(state, 1);
  const auto img = noise_image(static_cast<int>(state.range(0)));
  const auto k = gabor_kernel(0.5, 2.0, 4.0, 0.5, 9);
  for (auto _ : state) benchmark::DoNotOptimize(convolve(img, k));
}
BENCHMARK(BM_Convolve)->Args({512, 1})->Args({512, 4})->Unit(benchmark::kMillisecond);

void BM_ConvolveSerial(benchmark::State& state) {
  const auto img = noise_image(static_cast<int>(state.range(0)));
  const auto k = gabor_kernel(0.5, 2.0, 4.0, 0.5, 9);
  for (auto _ : state) benchmark::DoNotOptimize(reference::convolve_serial(img, k));
}
BENCHMARK(BM_ConvolveSerial)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_OrientMap(benchmark::State& state) {
  set_threads(state, 1);
  const auto img = noise_image(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(orient_map(img));
}
BENCHMARK(BM_OrientMap)->Args({256, 1})->Args({256, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

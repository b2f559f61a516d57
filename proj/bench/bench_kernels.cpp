// Serial reference kernels against the OpenMP library kernels.
// The Arg is the library thread count.

#include <benchmark/benchmark.h>

#include <numeric>

#include "agibench/features.hpp"
#include "agibench/neighbors.hpp"
#include "agibench/rocket.hpp"
#include "agibench/windowing.hpp"
#include "reference.hpp"

using namespace agibench;

namespace {

struct Fixture {
  CohortStore cohort;
  WindowSet windows;
  std::vector<std::size_t> all;
  KernelBank bank;
  std::vector<Matrix> series;
  Matrix points;

  Fixture() {
    SyntheticSpec spec;
    spec.participants = 10;
    spec.days = 60;
    cohort = generate_synthetic(spec).cohort;
    windows = build_windows(cohort, 6);
    all.resize(windows.windows.size());
    std::iota(all.begin(), all.end(), std::size_t{0});

    bank = KernelBank::generate(1, 500, 4, 48);
    Rng r(2);
    for (int i = 0; i < 200; ++i) {
      Matrix m(4, 48);
      for (auto& v : m.data()) v = r.normal();
      series.push_back(std::move(m));
    }
    points = Matrix(2000, 48);
    for (auto& v : points.data()) v = r.normal();
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_features_reference(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    for (const auto& w : f.windows.windows) {
      benchmark::DoNotOptimize(ref::activity_features(f.cohort.participants.at(*w.participant), w.start, 6));
    }
  }
}

void BM_features_library(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(f.windows, f.all, {}, static_cast<int>(state.range(0))));
}

void BM_rocket_reference(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(ref::rocket_batch(f.bank, f.series));
}

void BM_rocket_library(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(rocket_transform_batch(f.bank, f.series, static_cast<int>(state.range(0))));
  }
}

void BM_knn_reference(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(ref::knn(f.points, f.points, 20, true));
}

void BM_knn_library(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(knn_self(f.points, 20, static_cast<int>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_features_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_features_library)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_rocket_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rocket_library)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_knn_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_knn_library)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

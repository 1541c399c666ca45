#include <benchmark/benchmark.h>

#include "netdiag/constant.hpp"
#include "netdiag/directions.hpp"
#include "netdiag/linalg.hpp"
#include "netdiag/rng.hpp"
#include "netdiag/time_varying.hpp"

namespace {

using namespace netdiag;

std::vector<Eigen::MatrixXd> draw_rows(int k, std::size_t count,
                                       std::uint64_t seed) {
  Rng rng(seed);
  const GainDistribution dist = default_gain_distribution();
  std::vector<Eigen::MatrixXd> rows(count);
  for (auto& g : rows) {
    g.resize(k, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < k; ++i) g(j, i) = dist.sample(rng);
  }
  return rows;
}

void BM_DirectionMatrix(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int n1 = static_cast<int>(state.range(1));
  const DirectionSet set = DirectionSet::delta(k, n1);
  const auto rows = draw_rows(k, set.size(), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_direction_matrix(set, rows));
  }
}
BENCHMARK(BM_DirectionMatrix)->Args({2, 3})->Args({3, 2});

void BM_LogAbsDet(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const int n1 = static_cast<int>(state.range(1));
  const DirectionSet set = DirectionSet::delta(k, n1);
  const Eigen::MatrixXd t =
      build_direction_matrix(set, draw_rows(k, set.size(), 2));
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_abs_det(t));
  }
}
BENCHMARK(BM_LogAbsDet)->Args({2, 3})->Args({3, 2});

void BM_RelayProcess(benchmark::State& state) {
  const TvScheme inst = calibrate(2, 2, 0.05, default_gain_distribution(),
                                  1000, 3, 1e4, 1e-6);
  const int d = static_cast<int>(inst.block_len);
  const auto real = sample_time_varying(2, 2 * d, inst.dist, 17);
  const auto g1 = real.block_matrices(Hop::first, 0, d);
  const auto g2 = real.block_matrices(Hop::second, 1, d);
  Rng rng(5);
  Eigen::MatrixXd c(2, inst.num_streams);
  for (int i = 0; i < 2; ++i)
    for (std::size_t s = 0; s < inst.num_streams; ++s)
      c(i, s) = 100.0 * rng.normal();
  Eigen::MatrixXd y(2, d);
  const Eigen::MatrixXd x = encode_sources(inst, c, g1);
  for (int t = 0; t < d; ++t) y.col(t) = g1[t] * x.col(t);
  for (auto _ : state) {
    benchmark::DoNotOptimize(relay_process(inst, y, g1, g2));
  }
}
BENCHMARK(BM_RelayProcess);

void BM_MinDistanceOracle(benchmark::State& state) {
  Rng rng(8);
  Eigen::VectorXd dirs(3);
  dirs << 1.0, rng.uniform(0.3, 1.9), rng.uniform(0.3, 1.9);
  for (auto _ : state) {
    benchmark::DoNotOptimize(min_distance_oracle(dirs, 4, 1.0));
  }
}
BENCHMARK(BM_MinDistanceOracle);

}  // namespace

BENCHMARK_MAIN();

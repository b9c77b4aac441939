#include <benchmark/benchmark.h>

#include "mvjl/distributions.hpp"
#include "mvjl/model.hpp"
#include "mvjl/sampler.hpp"
#include "mvjl/simulate.hpp"

namespace {

using namespace mvjl;

// One Gibbs sweep on a desk-small sized problem (K = range(0), n = 150, M = 2, R = 5).
void BM_Sweep(benchmark::State& state) {
  Scenario s = *find_scenario("desk-small");
  s.num_nodes = static_cast<int>(state.range(0));
  Rng rng(1);
  const auto truth = generate_truth(s, rng);
  const auto data = generate_dataset(truth, s, rng);
  GibbsSampler sampler(data, s.model_config());
  sampler.initialize(rng);
  for (int i = 0; i < 20; ++i) sampler.sweep(rng);
  for (auto _ : state) {
    sampler.sweep(rng);
    benchmark::DoNotOptimize(sampler.state().intercept.data());
  }
  state.counters["edges"] = num_pairs(s.num_nodes);
}
BENCHMARK(BM_Sweep)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// Woodbury log density: d = range(0) observations, rank-q = 10 update.
void BM_LogMvnLowRank(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  const Eigen::Index q = 10;
  Rng rng(2);
  Eigen::VectorXd z(d), a(d);
  Eigen::MatrixXd u(d, q);
  for (Eigen::Index i = 0; i < d; ++i) {
    z[i] = rng.normal();
    a[i] = 1.0 + rng.uniform();
    for (Eigen::Index j = 0; j < q; ++j) u(i, j) = rng.normal();
  }
  const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(q, q);
  for (auto _ : state) benchmark::DoNotOptimize(log_mvn_lowrank(z, a, u, j));
}
BENCHMARK(BM_LogMvnLowRank)->RangeMultiplier(4)->Range(64, 4096);

void BM_BuildCoefficientMatrix(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  Rng rng(3);
  Eigen::MatrixXd b(k, 5);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  const Eigen::VectorXi signs = (Eigen::VectorXi(5) << 1, -1, 1, 0, 1).finished();
  for (auto _ : state) benchmark::DoNotOptimize(build_coefficient_matrix(b, signs).data());
}
BENCHMARK(BM_BuildCoefficientMatrix)->Arg(20)->Arg(40)->Arg(200);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include <filesystem>
#include <numeric>
#include <vector>

#include "diffatd/bench.hpp"
#include "diffatd/belief.hpp"
#include "diffatd/config.hpp"
#include "diffatd/diffusion.hpp"
#include "diffatd/rng.hpp"

using namespace diffatd;

namespace {

ExperimentConfig benchmark_config() {
  return ExperimentConfig::load(std::filesystem::path(DIFFATD_CONFIG_DIR) / "benchmark.json");
}

void BM_GmmScore(benchmark::State& state) {
  const Experiment exp(benchmark_config());
  const auto& prior = exp.prior();
  RandomStream rng(1);
  std::vector<double> x(prior.dimension());
  for (double& v : x) v = rng.normal();
  const int tau = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gmm_score(x, tau, prior, exp.schedule()));
}
BENCHMARK(BM_GmmScore)->Arg(1)->Arg(100)->Arg(200);

void BM_ScoreField(benchmark::State& state) {
  const std::size_t side = 16;
  const auto n_b = static_cast<std::size_t>(state.range(0));
  RandomStream rng(2);
  std::vector<std::vector<double>> xh(n_b, std::vector<double>(side * side));
  for (auto& p : xh) {
    for (double& v : p) v = rng.normal();
  }
  const ParticleBatch batch(xh, xh, 1);
  const LocationGrid grid(side, side);
  std::vector<std::size_t> cands(side * side);
  std::iota(cands.begin(), cands.end(), std::size_t{0});
  const BeliefConfig cfg;
  const RewardFn reward = [](std::span<const double> patch) { return 0.5 + 0.1 * patch[0]; };
  for (auto _ : state) benchmark::DoNotOptimize(compute_score_field(batch, grid, cands, cfg, reward));
}
BENCHMARK(BM_ScoreField)->Arg(4)->Arg(8)->Arg(16);

void BM_Episode(benchmark::State& state) {
  auto cfg = benchmark_config();
  cfg.policy.kind = static_cast<PolicyKind>(state.range(0));
  const Experiment exp(cfg);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(exp.run(seed++));
  state.SetLabel(to_string(cfg.policy.kind));
}
BENCHMARK(BM_Episode)
    ->Arg(static_cast<int>(PolicyKind::diffatd))
    ->Arg(static_cast<int>(PolicyKind::random))
    ->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "diffatd/bench.hpp"
#include "diffatd/errors.hpp"
#include "diffatd/rng.hpp"
#include "support.hpp"

using namespace diffatd;

namespace {

EpisodeResult result_of(int budget, std::size_t u, std::vector<double> ys) {
  EpisodeResult r;
  r.budget = budget;
  r.target_locations = u;
  for (double y : ys) {
    StepRecord s;
    s.y = y;
    r.steps.push_back(s);
    r.total_reward += y;
  }
  return r;
}

ExperimentConfig tiny() { return ExperimentConfig::load(data_path("tiny.json")); }

std::string trace_text(const EpisodeResult& r) {
  std::ostringstream os;
  write_trace_csv(r, os);
  return os.str();
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("success rate worked examples") {
  const std::vector<EpisodeResult> one{result_of(2, 3, {0.5, 1.0})};
  CHECK(success_rate(one) == 0.75);
  const std::vector<EpisodeResult> full{result_of(3, 2, {1.0, 1.0, 0.0})};
  CHECK(success_rate(full) == 1.0);
  const std::vector<EpisodeResult> two{result_of(5, 5, {1.0, 1.0}), result_of(5, 5, {1.0, 1.0, 1.0, 1.0})};
  CHECK(success_rate(two) == 0.6);
  CHECK(result_of(4, 0, {}).sr_term() == 0.0);
  CHECK_THROWS_AS(success_rate({}), InvalidArgument);
}

TEST_CASE("success rate is the mean of per-task terms") {
  RandomStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EpisodeResult> results;
    double mean = 0.0;
    const std::size_t n = 1 + rng.index(12);
    for (std::size_t k = 0; k < n; ++k) {
      const int budget = 1 + static_cast<int>(rng.index(8));
      std::vector<double> ys(static_cast<std::size_t>(budget));
      for (double& y : ys) y = rng.index(3) ? static_cast<double>(rng.index(2)) : rng.uniform();
      results.push_back(result_of(budget, rng.index(10), ys));
      mean += results.back().sr_term();
    }
    mean /= static_cast<double>(n);
    CHECK(success_rate(results) == doctest::Approx(mean).epsilon(1e-14));
  }
}

TEST_CASE("episodes are reproducible and complete") {
  const Experiment exp(tiny());
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    const auto a = exp.run(seed);
    const auto b = exp.run(seed);
    CHECK(trace_text(a) == trace_text(b));
    CHECK(a.total_reward == b.total_reward);
    const Scene scene = exp.scene(seed);
    REQUIRE(a.steps.size() == 6);
    double sum = 0.0;
    std::set<std::size_t> seen;
    for (const auto& s : a.steps) {
      CHECK(s.y == scene.location_target(s.location));
      CHECK(seen.insert(s.location).second);
      sum += s.y;
    }
    CHECK(sum == a.total_reward);
    CHECK(a.total_reward <= scene.total_target());
    CHECK(a.target_locations == scene.target_location_count());
    CHECK(a.sr_term() >= 0.0);
    CHECK(a.sr_term() <= 1.0);
  }
}

TEST_CASE("measuring everything collects every target") {
  auto cfg = tiny();
  cfg.budget = 64;
  cfg.diffusion.steps = 64;
  for (auto kind : {PolicyKind::diffatd, PolicyKind::random, PolicyKind::ucb}) {
    cfg.policy.kind = kind;
    const Experiment exp(cfg);
    const auto r = exp.run(3);
    CHECK(r.steps.size() == 64);
    CHECK(r.total_reward == doctest::Approx(exp.scene(3).total_target()).epsilon(1e-12));
    if (r.target_locations > 0) CHECK(r.sr_term() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("budget is capped at the location count") {
  auto cfg = tiny();
  cfg.scene.block = 2;
  cfg.budget = 20;
  cfg.policy.kind = PolicyKind::eps_greedy;
  const auto r = Experiment(cfg).run(1);
  CHECK(r.budget == 16);
  CHECK(r.steps.size() == 16);
}

TEST_CASE("random policy collects the target density") {
  // Half the locations of a fixed scene are targets.
  auto cfg = tiny();
  cfg.policy.kind = PolicyKind::random;
  cfg.budget = 10;
  const Experiment exp(cfg);
  std::vector<double> grid(64), y(64);
  for (std::size_t k = 0; k < 64; ++k) {
    y[k] = (k * 7) % 3 == 0 ? 1.0 : 0.0;
    grid[k] = y[k] > 0 ? 0.9 : 0.1;
  }
  const double p = std::accumulate(y.begin(), y.end(), 0.0) / 64.0;
  const Scene scene(grid, y, 8, 8);
  std::vector<double> per_step, sr;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = exp.run(scene, seed);
    per_step.push_back(r.total_reward / 10.0);
    sr.push_back(r.sr_term());
  }
  auto mean_se = [](const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::make_pair(mean, std::sqrt(var / (n - 1.0) / n));
  };
  const auto [mean_y, se_y] = mean_se(per_step);
  CHECK(std::abs(mean_y - p) < 3.0 * se_y);
  const double u = static_cast<double>(scene.target_location_count());
  const auto [mean_sr, se_sr] = mean_se(sr);
  CHECK(std::abs(mean_sr - std::min(1.0, 10.0 * p / std::min(10.0, u))) < 3.0 * se_sr);
}

TEST_CASE("extreme kappa reduces DiffATD to its baselines") {
  auto cfg = tiny();
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    cfg.policy = PolicyConfig{};
    cfg.policy.kappa_override = 1.0;
    const auto explore = trace_text(Experiment(cfg).run(seed));
    cfg.policy = PolicyConfig{};
    cfg.policy.kind = PolicyKind::max_ent;
    CHECK(explore == trace_text(Experiment(cfg).run(seed)));

    cfg.policy = PolicyConfig{};
    cfg.policy.kappa_override = 0.0;
    const auto exploit = trace_text(Experiment(cfg).run(seed));
    cfg.policy = PolicyConfig{};
    cfg.policy.kind = PolicyKind::greedy_adaptive;
    CHECK(exploit == trace_text(Experiment(cfg).run(seed)));
  }
}

TEST_CASE("trace csv layout") {
  const auto r = Experiment(tiny()).run(2);
  const auto text = trace_text(r);
  CHECK(text.rfind("t,tau,location,expl,likeli,reward,exploit,combined,y,entropy\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 7);
  // taus follow the measurement schedule for T = 40, B = 6
  const std::vector<int> taus{34, 27, 21, 14, 7, 1};
  for (std::size_t k = 0; k < 6; ++k) CHECK(r.steps[k].tau == taus[k]);
}

TEST_CASE("suite aggregates policies by budget") {
  const auto entries = load_suite(data_path("tiny_suite.json"));
  REQUIRE(entries.size() == 8);
  const auto report = run_suite(entries, 1);
  CHECK(report.failures.empty());
  REQUIRE(report.rows.size() == 8);
  for (const auto& row : report.rows) {
    CHECK(row.n_seeds == 5);
    CHECK(row.sr_terms.size() == 5);
    CHECK(row.mean_sr >= 0.0);
    CHECK(row.mean_sr <= 1.0);
  }
  CHECK(report.rows.front().policy == "diffatd");
  CHECK(report.rows.front().budget == 4);
  CHECK(report.rows[1].budget == 8);

  const auto parallel = run_suite(entries, 4);
  REQUIRE(parallel.rows.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(parallel.rows[k].policy == report.rows[k].policy);
    CHECK(parallel.rows[k].sr_terms == report.rows[k].sr_terms);
    CHECK(parallel.rows[k].mean_sr == report.rows[k].mean_sr);
    CHECK(parallel.rows[k].std_sr == report.rows[k].std_sr);
  }
  std::ostringstream os;
  write_suite_csv(report, os);
  const auto text = os.str();
  CHECK(text.rfind("policy,B,mean_SR,std_SR,n_seeds,mean_runtime\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);
}

TEST_CASE("single seed suite has zero spread") {
  auto cfg = tiny();
  cfg.seeds = {9};
  const std::vector<SuiteEntry> entries{{"only", cfg}};
  const auto report = run_suite(entries);
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].std_sr == 0.0);
  CHECK(report.rows[0].n_seeds == 1);
  CHECK_THROWS_AS(run_suite({}), InvalidArgument);
}

TEST_CASE("duplicate seeds are rejected") {
  auto cfg = tiny();
  cfg.seeds = {4, 4};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  const std::vector<SuiteEntry> entries{{"dup", cfg}};
  CHECK_THROWS_AS(run_suite(entries), ConfigError);
}

TEST_CASE("file scenes with block queries and an empirical prior") {
  const auto cfg = ExperimentConfig::load(data_path("species_scene.json"));
  const Experiment exp(cfg);
  CHECK(exp.prior().size() == 3);
  const auto r = exp.run(0);
  CHECK(r.steps.size() == 3);
  CHECK(r.target_locations == 4);
  for (const auto& s : r.steps) CHECK(s.y == exp.scene(0).location_target(s.location));
}

TEST_CASE("noisy episodes keep exact rewards") {
  auto cfg = tiny();
  cfg.scene.noise = {0.0, 0.1};
  const Experiment exp(cfg);
  const auto r = exp.run(2);
  for (const auto& s : r.steps) CHECK(s.y == exp.scene(2).location_target(s.location));
}

}

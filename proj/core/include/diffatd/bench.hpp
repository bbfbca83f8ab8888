#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diffatd/belief.hpp"
#include "diffatd/config.hpp"
#include "diffatd/env.hpp"
#include "diffatd/gmm_prior.hpp"
#include "diffatd/noise_schedule.hpp"

namespace diffatd {

/// One measurement of an episode. Score columns are zero for policies that
/// do not consult the particle belief.
struct StepRecord {
  int t = 0;  ///< 1-based measurement index
  int tau = 0;
  std::size_t location = 0;
  double expl = 0.0;
  double likeli = 0.0;
  double reward = 0.0;
  double exploit = 0.0;
  double combined = 0.0;
  double y = 0.0;
  double entropy = 0.0;
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  int budget = 0;                    ///< effective budget (capped at the location count)
  std::size_t target_locations = 0;  ///< U
  std::vector<StepRecord> steps;
  double total_reward = 0.0;         ///< R
  double wall_seconds = 0.0;

  /// R / min{B, U}; zero for a scene without targets.
  double sr_term() const;
};

/// Called after every measurement with the record and, for belief policies,
/// the score field the choice was made from.
using EpisodeObserver = std::function<void(const StepRecord&, const ScoreField*)>;

/// Everything derived from a config that does not depend on the seed.
class Experiment {
 public:
  /// Validates the config and loads referenced files. Throws ConfigError or
  /// other InvalidArgument subclasses.
  explicit Experiment(ExperimentConfig cfg);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const GaussianMixturePrior& prior() const noexcept { return prior_; }
  const NoiseSchedule& schedule() const noexcept { return schedule_; }

  /// Scene used for `seed`: drawn from the prior for synthetic sources.
  Scene scene(std::uint64_t seed) const;

  EpisodeResult run(std::uint64_t seed, const EpisodeObserver& observer = {}) const;
  /// Runs on a caller-supplied scene (must match the prior's dimension).
  EpisodeResult run(const Scene& scene, std::uint64_t seed,
                    const EpisodeObserver& observer = {}) const;

 private:
  ExperimentConfig cfg_;
  GaussianMixturePrior prior_;
  GaussianMixturePrior model_prior_;
  NoiseSchedule schedule_;
  std::optional<Scene> file_scene_;
};

EpisodeResult run_episode(const ExperimentConfig& cfg, std::uint64_t seed,
                          const EpisodeObserver& observer = {});

/// Mean of the per-task terms R_i / min{B, U_i}. Throws InvalidArgument on an
/// empty list.
double success_rate(std::span<const EpisodeResult> results);

/// Trace CSV: t,tau,location,expl,likeli,reward,exploit,combined,y,entropy.
/// Contains no timing, so identical seeds give identical bytes.
void write_trace_csv(const EpisodeResult& result, std::ostream& out);

struct SuiteRow {
  std::string policy;
  int budget = 0;
  double mean_sr = 0.0;
  double std_sr = 0.0;  ///< sample standard deviation; 0 for one seed
  std::size_t n_seeds = 0;
  double mean_runtime = 0.0;
  std::vector<double> sr_terms;  ///< per seed, in seed-list order
};

struct SuiteFailure {
  std::string policy;
  int budget = 0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SuiteReport {
  std::vector<SuiteRow> rows;  ///< sorted by (policy, budget)
  std::vector<SuiteFailure> failures;
};

/// Runs every (entry, seed) pair on up to `jobs` threads. A failing episode is
/// reported and skipped; the rest of the suite still runs. Aggregates do not
/// depend on `jobs`.
SuiteReport run_suite(std::span<const SuiteEntry> entries, unsigned jobs = 1);

/// policy,B,mean_SR,std_SR,n_seeds,mean_runtime
void write_suite_csv(const SuiteReport& report, std::ostream& out);

}  // namespace diffatd

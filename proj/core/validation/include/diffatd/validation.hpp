#pragma once

// Independent reference implementations used by the tests and by
// `diffatd validate`. Nothing here is called by the engine.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "diffatd/belief.hpp"
#include "diffatd/gmm_prior.hpp"
#include "diffatd/noise_schedule.hpp"
#include "diffatd/reward_model.hpp"

namespace diffatd::oracle {

/// prod_{s <= tau} (1 - beta_s), accumulated from scratch.
double alpha_bar_product(std::span<const double> betas, int tau);

/// log p_tau(x) of a mixture prior pushed through the forward process,
/// evaluated directly from the Gaussian densities.
double gmm_log_density(std::span<const double> x, int tau, const GaussianMixturePrior& prior,
                       const NoiseSchedule& schedule);

/// Central-difference gradient of f at x.
std::vector<double> central_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h);

/// E[x0 | x_tau] for the prior N(mean, var I): Gaussian conditioning.
std::vector<double> gaussian_posterior_mean(std::span<const double> x, double alpha_bar,
                                            std::span<const double> mean, double var);

/// Candidate locations maximizing the equal-weight marginal entropy
/// sum_{i,j} log prod_{a in Q} exp((xh_i[a] - xh_j[a])^2 / (2 s^2)) where
/// Q = measured + {q}. Every factor is evaluated separately, so the constant
/// contribution of the already-measured cells is part of the objective.
/// Limited to batches of at most 4 particles and 16 candidates; throws
/// InvalidArgument beyond that.
std::vector<std::size_t> entropy_rank_tied_set(const ParticleBatch& batch,
                                               std::span<const std::size_t> candidates,
                                               std::span<const std::size_t> measured,
                                               const BeliefConfig& cfg);

/// First member of the tied set.
std::size_t entropy_rank_oracle(const ParticleBatch& batch,
                                std::span<const std::size_t> candidates,
                                std::span<const std::size_t> measured, const BeliefConfig& cfg);

/// Straight-line forward pass of a reward net, written without the library's
/// layer loop.
double reward_forward(const RewardNet& net, std::span<const double> patch);

/// Textbook MT19937-64.
class Mt64 {
 public:
  explicit Mt64(std::uint64_t seed);
  std::uint64_t next();

 private:
  std::uint64_t mt_[312];
  int index_;
};

/// Sub-stream seed: two chained splitmix64 steps mixing in the stream id.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

/// Uniform index in [0, n) by rejection on raw 64-bit draws.
std::size_t uniform_index(Mt64& gen, std::size_t n);

/// Standard normal matching the GNU implementation of
/// std::normal_distribution (Marsaglia polar method, caching the second
/// value). Only meaningful with libstdc++.
class PolarNormal {
 public:
  double operator()(Mt64& gen);

 private:
  bool saved_available_ = false;
  double saved_ = 0.0;
};

}  // namespace diffatd::oracle

namespace diffatd {

struct ValidationResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs every oracle suite with fixed seeds.
std::vector<ValidationResult> run_validation_suites();

}  // namespace diffatd

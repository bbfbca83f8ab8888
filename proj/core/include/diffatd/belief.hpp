#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "diffatd/grid.hpp"

namespace diffatd {

/// Snapshot of the particle batch: states x_tau^(i) and their Tweedie means.
/// The belief over the hidden scene is the equal-variance Gaussian mixture
/// centred on the denoised vectors.
class ParticleBatch {
 public:
  /// Throws InvalidArgument for fewer than two particles and
  /// DimensionMismatch when vectors disagree in size.
  ParticleBatch(std::vector<std::vector<double>> particles,
                std::vector<std::vector<double>> denoised, int tau);

  std::size_t size() const noexcept { return particles_.size(); }
  std::size_t dimension() const noexcept { return denoised_.front().size(); }
  int tau() const noexcept { return tau_; }
  const std::vector<std::vector<double>>& particles() const noexcept { return particles_; }
  const std::vector<std::vector<double>>& denoised() const noexcept { return denoised_; }

 private:
  std::vector<std::vector<double>> particles_;
  std::vector<std::vector<double>> denoised_;
  int tau_ = 0;
};

struct BeliefConfig {
  double sigma_x2 = 1.0;
  /// Mixture weights; empty means uniform. Only the marginal entropy uses them.
  std::vector<double> weights;

  void validate(std::size_t batch_size) const;
};

/// Reward model applied to one particle's predicted patch; must return [0, 1].
using RewardFn = std::function<double(std::span<const double>)>;

/// sum_i a_i log sum_j a_j exp(||xh_i - xh_j||^2 / (2 s^2)), log-domain.
/// The exponent is positive: this is the ranking surrogate used for
/// measurement selection, not a normalized entropy.
double marginal_entropy(const ParticleBatch& batch, const BeliefConfig& cfg);

/// sum_{i,j} sum_{c in cells} (xh_i[c] - xh_j[c])^2 / (2 s^2), over ordered pairs.
double exploration_score(const ParticleBatch& batch, std::span<const std::size_t> cells,
                         const BeliefConfig& cfg);

/// sum_{i,j} exp(-sum_{c in cells} (xh_i[c] - xh_j[c])^2 / (2 s^2)). In (0, N^2].
double likelihood_score(const ParticleBatch& batch, std::span<const std::size_t> cells,
                        const BeliefConfig& cfg);

/// sum_i reward(xh_i restricted to cells).
double reward_sum(const ParticleBatch& batch, std::span<const std::size_t> cells,
                  const RewardFn& reward);

/// likelihood_score * reward_sum.
double exploitation_score(const ParticleBatch& batch, std::span<const std::size_t> cells,
                          const BeliefConfig& cfg, const RewardFn& reward);

/// Per-candidate score columns. `combined` is filled by the policy.
struct ScoreField {
  std::vector<std::size_t> locations;
  std::vector<double> exploration;
  std::vector<double> likelihood;
  std::vector<double> reward;
  std::vector<double> exploitation;
  std::vector<double> combined;

  std::size_t size() const noexcept { return locations.size(); }
  /// CSV with header location,expl,likeli,reward,exploit,combined.
  void write_csv(std::ostream& out) const;
};

/// Scores every candidate location. With a null reward function the reward
/// and exploitation columns are zero.
ScoreField compute_score_field(const ParticleBatch& batch, const LocationGrid& grid,
                               std::span<const std::size_t> candidates,
                               const BeliefConfig& cfg, const RewardFn& reward);

}  // namespace diffatd

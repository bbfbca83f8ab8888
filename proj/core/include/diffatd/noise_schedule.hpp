#pragma once

#include <cstddef>
#include <vector>

namespace diffatd {

enum class BetaCurve { linear, cosine };

/// How the per-step posterior noise scale is chosen.
enum class PosteriorNoise {
  posterior,  ///< sqrt(beta_t (1 - abar_{t-1}) / (1 - abar_t)); zero at t = 1
  zero,       ///< deterministic sampler
};

/// Discretized variance-preserving diffusion constants for steps tau = 1..T.
///
/// Storage is 0-based (index tau - 1); use the accessors, which also define
/// the boundary value abar_0 = 1 needed by the reverse step at tau = 1.
class NoiseSchedule {
 public:
  NoiseSchedule() = default;

  int steps() const noexcept { return static_cast<int>(beta_.size()); }

  double beta(int tau) const { return beta_.at(index(tau)); }
  double alpha(int tau) const { return alpha_.at(index(tau)); }
  double alpha_bar(int tau) const { return tau == 0 ? 1.0 : alpha_bar_.at(index(tau)); }
  double sigma_tilde(int tau) const { return sigma_tilde_.at(index(tau)); }

  const std::vector<double>& betas() const noexcept { return beta_; }
  const std::vector<double>& alphas() const noexcept { return alpha_; }
  const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }
  const std::vector<double>& sigma_tildes() const noexcept { return sigma_tilde_; }

  friend NoiseSchedule schedule_from_betas(std::vector<double> betas, PosteriorNoise noise);

 private:
  std::size_t index(int tau) const;

  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> sigma_tilde_;
};

/// Builds a schedule with `steps` entries. Linear interpolates beta from
/// beta_min to beta_max; cosine follows the squared-cosine alpha-bar curve
/// with betas clipped into [beta_min, beta_max].
/// Throws InvalidRange unless steps >= 1 and 0 < beta_min <= beta_max < 1.
NoiseSchedule make_schedule(int steps, double beta_min, double beta_max, BetaCurve curve,
                            PosteriorNoise noise = PosteriorNoise::posterior);

/// Schedule from explicit betas, each in (0, 1).
NoiseSchedule schedule_from_betas(std::vector<double> betas,
                                  PosteriorNoise noise = PosteriorNoise::posterior);

}  // namespace diffatd

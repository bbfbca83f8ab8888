#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "diffatd/gmm_prior.hpp"
#include "diffatd/noise_schedule.hpp"

namespace diffatd {

/// Score of the noised marginal p_tau, plus its Jacobian-vector product
/// (the Hessian of log p_tau, which is symmetric).
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual std::size_t dimension() const = 0;
  virtual void score(std::span<const double> x, int tau, std::span<double> out) const = 0;
  virtual void hessian_vector(std::span<const double> x, int tau, std::span<const double> v,
                              std::span<double> out) const = 0;
};

/// Exact score of a Gaussian-mixture prior pushed through the forward process:
/// at step tau component k becomes N(sqrt(abar) mu_k, (abar v_k + 1 - abar) I).
/// Responsibilities are computed with log-sum-exp.
class GmmScore final : public ScoreModel {
 public:
  GmmScore(GaussianMixturePrior prior, NoiseSchedule schedule);

  std::size_t dimension() const override { return prior_.dimension(); }
  void score(std::span<const double> x, int tau, std::span<double> out) const override;
  void hessian_vector(std::span<const double> x, int tau, std::span<const double> v,
                      std::span<double> out) const override;

  const GaussianMixturePrior& prior() const noexcept { return prior_; }
  const NoiseSchedule& schedule() const noexcept { return schedule_; }

 private:
  /// Fills responsibilities and returns per-component variance c_k.
  void responsibilities(std::span<const double> x, int tau, std::vector<double>& resp,
                        std::vector<double>& var) const;

  GaussianMixturePrior prior_;
  NoiseSchedule schedule_;
};

/// Convenience wrapper: grad_x log p_tau(x) for a mixture prior.
std::vector<double> gmm_score(std::span<const double> x, int tau,
                              const GaussianMixturePrior& prior, const NoiseSchedule& schedule);

/// One-step denoising x0_hat = (x + (1 - abar) s(x, tau)) / sqrt(abar).
std::vector<double> tweedie_denoise(std::span<const double> x_tau, int tau,
                                    const ScoreModel& score, const NoiseSchedule& schedule);

/// Reverse ancestral update (before guidance):
///   sqrt(a_t)(1 - abar_{t-1})/(1 - abar_t) x_t
///     + sqrt(abar_{t-1}) b_t/(1 - abar_t) x0_hat + sigma_t z
std::vector<double> ancestral_step(std::span<const double> x_tau, std::span<const double> x_hat,
                                   int tau, std::span<const double> z,
                                   const NoiseSchedule& schedule);

/// Observed coordinates and their revealed values, in model units.
class MeasurementLog {
 public:
  void add(std::size_t coordinate, double value);
  bool empty() const noexcept { return coords_.empty(); }
  std::size_t size() const noexcept { return coords_.size(); }
  bool contains(std::size_t coordinate) const;
  const std::vector<std::size_t>& coordinates() const noexcept { return coords_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<std::size_t> coords_;
  std::vector<double> values_;
};

enum class JacobianMode {
  scaled_identity,  ///< d x0_hat / d x_tau ~ I / sqrt(abar)
  exact,            ///< chain rule through the score Jacobian
};

struct GuidanceConfig {
  double zeta = 1.0;
  JacobianMode jacobian = JacobianMode::scaled_identity;
};

/// Gradient w.r.t. x_tau of || [x]_Q - [x0_hat(x_tau)]_Q ||^2.
std::vector<double> guidance_gradient(std::span<const double> x_tau,
                                      std::span<const double> x_hat,
                                      const MeasurementLog& observed, int tau,
                                      JacobianMode mode, const ScoreModel& score,
                                      const NoiseSchedule& schedule);

/// x_{tau-1} = x' - zeta * guidance_gradient(...). Returns x' unchanged when
/// nothing is observed or zeta is zero.
std::vector<double> guidance_step(std::span<const double> x_prime,
                                  std::span<const double> x_tau,
                                  std::span<const double> x_hat,
                                  const MeasurementLog& observed, int tau,
                                  const GuidanceConfig& cfg, const ScoreModel& score,
                                  const NoiseSchedule& schedule);

/// Same, recomputing x0_hat from x_tau.
std::vector<double> guidance_step(std::span<const double> x_prime,
                                  std::span<const double> x_tau,
                                  const MeasurementLog& observed, int tau,
                                  const GuidanceConfig& cfg, const ScoreModel& score,
                                  const NoiseSchedule& schedule);

}  // namespace diffatd

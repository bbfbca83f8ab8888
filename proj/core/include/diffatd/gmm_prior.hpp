#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace diffatd {

/// One isotropic Gaussian component: weight, mean and per-coordinate variance.
struct GaussianComponent {
  double weight = 1.0;
  std::vector<double> mean;
  double variance = 0.0;
};

/// Gaussian-mixture data prior with isotropic components.
///
/// Stands in for a learned score network: the forward-noised marginal of a
/// Gaussian mixture is again a Gaussian mixture, so its score is available in
/// closed form at every diffusion step.
class GaussianMixturePrior {
 public:
  GaussianMixturePrior() = default;
  /// Validates: at least one component, equal dimensions, positive weights
  /// summing to 1 within 1e-12, non-negative variances.
  explicit GaussianMixturePrior(std::vector<GaussianComponent> components);

  /// Equal-weight mixture with one component per example.
  static GaussianMixturePrior empirical(const std::vector<std::vector<double>>& examples,
                                        double variance);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }
  const GaussianComponent& component(std::size_t k) const { return components_.at(k); }

  /// Prior of scale * x + shift when x follows this prior.
  GaussianMixturePrior affine(double scale, double shift) const;

  std::string to_json() const;
  static GaussianMixturePrior from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static GaussianMixturePrior load(const std::filesystem::path& path);

 private:
  std::vector<GaussianComponent> components_;
  std::size_t dimension_ = 0;
};

}  // namespace diffatd

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace diffatd {

/// Dense stack input -> hidden... -> 1 with leaky-rectifier hidden units and a
/// logistic output.
struct RewardNetConfig {
  std::size_t input = 1;
  std::vector<std::size_t> hidden{16, 8};
  double slope = 0.01;

  /// Widths 4-32-16-8 taken from the reference architecture's dense head
  /// (its convolution is dropped; the two-way softmax becomes one logit).
  static RewardNetConfig deep_preset(std::size_t input);
};

/// out x in weights stored row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

struct LabeledPatch {
  std::vector<double> patch;
  double label = 0.0;  ///< target ratio in [0, 1]
};

class RewardNet {
 public:
  RewardNet() = default;
  /// Weights and biases uniform in +-1/sqrt(fan_in), drawn from `seed`.
  RewardNet(RewardNetConfig cfg, std::uint64_t seed);

  const RewardNetConfig& config() const noexcept { return cfg_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t input_size() const noexcept { return cfg_.input; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  /// Pre-sigmoid output.
  double logit(std::span<const double> patch) const;
  /// Probability in the open interval (0, 1).
  double predict(std::span<const double> patch) const;

  /// Summed binary cross-entropy and its gradient w.r.t. parameters().
  double loss_and_gradient(std::span<const LabeledPatch> data, std::vector<double>& grad) const;

  std::string to_json() const;
  static RewardNet from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static RewardNet load(const std::filesystem::path& path);

 private:
  RewardNetConfig cfg_;
  std::uint64_t seed_ = 0;
  std::vector<DenseLayer> layers_;
};

/// -(y log p + (1 - y) log(1 - p)) for one prediction.
double bce(double prediction, double label);

/// Summed cross-entropy over the dataset. Throws EmptyDataset.
double bce_loss(const RewardNet& net, std::span<const LabeledPatch> data);

/// Full-batch gradient descent on the summed loss.
void train(RewardNet& net, std::span<const LabeledPatch> data, int epochs, double lr);

/// Max relative error between backprop and central differences (step h).
/// Each component is divided by max(|analytic|, |numeric|, 1e-4 * largest
/// analytic component).
double grad_check(const RewardNet& net, std::span<const LabeledPatch> data, double h = 1e-5);

}  // namespace diffatd

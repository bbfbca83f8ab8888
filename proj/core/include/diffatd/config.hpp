#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "diffatd/belief.hpp"
#include "diffatd/diffusion.hpp"
#include "diffatd/env.hpp"
#include "diffatd/noise_schedule.hpp"
#include "diffatd/policy.hpp"
#include "diffatd/reward_model.hpp"

namespace diffatd {

struct SceneSource {
  enum class Kind { synthetic, file };
  Kind kind = Kind::synthetic;
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t block = 1;
  TargetRule rule;  ///< synthetic scenes
  std::filesystem::path path;  ///< file scenes
  GridFormat format = GridFormat::csv;
  TargetSpec target;
  ObservationNoise noise;
};

struct PriorSource {
  enum class Kind { blobs, json, empirical };
  Kind kind = Kind::blobs;
  BlobPriorSpec blobs;
  std::filesystem::path path;  ///< JSON file or corpus directory
  double variance = 0.005;     ///< empirical priors
};

struct DiffusionParams {
  int steps = 1000;
  double beta_min = 1e-4;
  double beta_max = 0.02;
  BetaCurve curve = BetaCurve::linear;
  PosteriorNoise posterior_noise = PosteriorNoise::posterior;
  GuidanceConfig guidance;
};

struct RewardTraining {
  bool deep_preset = false;
  std::vector<std::size_t> hidden{16, 8};
  double slope = 0.01;
  int epochs = 3;
  double lr = 0.01;

  RewardNetConfig net_config(std::size_t input) const;
};

/// Full input tuple of one experiment. Contents live in [0, 1]; the diffusion
/// runs on the affine image 2c - 1 in [-1, 1].
struct ExperimentConfig {
  SceneSource scene;
  PriorSource prior;
  DiffusionParams diffusion;
  std::size_t n_particles = 8;
  BeliefConfig belief;
  int budget = 32;
  PolicyConfig policy;
  RewardTraining reward;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path output_dir;

  /// Throws ConfigError naming the offending key.
  void validate() const;

  /// Parses a config document. Unknown keys are rejected. Relative paths are
  /// resolved against `base_dir`.
  static ExperimentConfig from_json(const std::string& text,
                                    const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  std::string to_json() const;
};

/// A labeled point of a suite matrix.
struct SuiteEntry {
  std::string label;
  ExperimentConfig config;
};

/// Expands a config document's optional "suite" section
///   {"policies": [{"label": ..., <policy keys>}...], "budgets": [...]}
/// into policies x budgets entries. Without it the document is one entry
/// labeled by its policy kind.
std::vector<SuiteEntry> load_suite(const std::filesystem::path& path);
std::vector<SuiteEntry> suite_from_json(const std::string& text,
                                        const std::filesystem::path& base_dir = {});

}  // namespace diffatd

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "diffatd/gmm_prior.hpp"
#include "diffatd/grid.hpp"
#include "diffatd/rng.hpp"

namespace diffatd {

/// Additive Gaussian noise on revealed content. Target ratios stay exact.
struct ObservationNoise {
  double mu = 0.0;
  double sigma = 0.0;
  bool enabled() const noexcept { return sigma > 0.0 || mu != 0.0; }
};

/// Ground-truth search space: cell contents in [0, 1] and per-cell target
/// ratios y in [0, 1]. Immutable once built.
class Scene {
 public:
  Scene() = default;
  Scene(std::vector<double> grid, std::vector<double> target, std::size_t rows, std::size_t cols,
        std::size_t block = 1, ObservationNoise noise = {});

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<double>& target() const noexcept { return target_; }
  const LocationGrid& layout() const noexcept { return layout_; }
  const ObservationNoise& noise() const noexcept { return noise_; }
  std::size_t rows() const noexcept { return layout_.rows(); }
  std::size_t cols() const noexcept { return layout_.cols(); }
  std::size_t location_count() const noexcept { return layout_.location_count(); }

  /// Mean target ratio over the location's cells.
  double location_target(std::size_t location) const;
  /// U: number of locations with a positive target ratio.
  std::size_t target_location_count() const;
  /// Sum of location_target over all locations.
  double total_target() const;

  Scene with_noise(ObservationNoise noise) const;
  Scene with_block(std::size_t block) const;

 private:
  std::vector<double> grid_;
  std::vector<double> target_;
  LocationGrid layout_;
  ObservationNoise noise_;
};

struct Measurement {
  std::size_t location = 0;
  std::vector<double> content;  ///< revealed cells, noisy if the scene has noise
  double y = 0.0;               ///< exact target ratio
  int step = 0;
};

/// Which locations an episode has already revealed.
class MeasuredSet {
 public:
  explicit MeasuredSet(std::size_t locations = 0) : seen_(locations, false) {}
  bool contains(std::size_t location) const { return seen_.at(location); }
  void insert(std::size_t location) { seen_.at(location) = true; }
  std::size_t capacity() const noexcept { return seen_.size(); }

 private:
  std::vector<bool> seen_;
};

/// Reveals a location. Throws UnknownLocation or RepeatMeasurement. Noise is
/// drawn from `rng` one value per cell, in tile order.
Measurement measure(const Scene& scene, std::size_t location, MeasuredSet& measured,
                    RandomStream& rng, int step = 0);

/// Targets are cells whose content exceeds `threshold`. When component labels
/// are given, only scenes drawn from a labeled component contain targets.
struct TargetRule {
  double threshold = 0.5;
  std::vector<bool> component_labels;
};

/// Draws a component, then a grid from it (clamped to [0, 1]); applies the rule.
Scene gen_gmm_scene(const GaussianMixturePrior& prior, std::size_t rows, std::size_t cols,
                    const TargetRule& rule, RandomStream& rng, std::size_t block = 1,
                    ObservationNoise noise = {});

/// Synthetic mixture whose components share a dim background and differ in
/// where their bright blobs sit.
struct BlobPriorSpec {
  std::size_t rows = 16;
  std::size_t cols = 16;
  std::size_t components = 8;
  std::size_t blobs_per_component = 3;
  double radius_min = 1.5;
  double radius_max = 2.5;
  double background = 0.15;
  double peak = 0.9;
  double variance = 0.005;
  std::uint64_t seed = 17;
};

GaussianMixturePrior make_blob_prior(const BlobPriorSpec& spec);

enum class GridFormat { csv, pgm };

/// How target ratios are derived for a loaded grid.
struct TargetSpec {
  enum class Kind {
    threshold,  ///< y = 1 where normalized value > threshold
    value,      ///< y = normalized value (counts / max count)
    sidecar,    ///< y read from <stem>.target.csv
  };
  Kind kind = Kind::threshold;
  double threshold = 0.5;
};

/// Reads a row-major grid. Values already in [0, 1] are kept; otherwise
/// non-negative values are divided by their maximum (PGM: by maxval).
std::vector<double> load_grid(const std::filesystem::path& path, GridFormat format,
                              std::size_t& rows, std::size_t& cols);

Scene load_scene(const std::filesystem::path& path, GridFormat format, const TargetSpec& target,
                 std::size_t block = 1);

/// Writes `path` and `<stem>.target.csv` with round-trip exact decimals.
void save_scene_csv(const Scene& scene, const std::filesystem::path& path);

/// Equal-weight prior with one component per grid file (*.csv, *.pgm;
/// sidecar target files skipped) in `dir`, sorted by file name.
GaussianMixturePrior load_empirical_prior(const std::filesystem::path& dir, double variance);

GridFormat grid_format_from_path(const std::filesystem::path& path);

}  // namespace diffatd

#include "diffatd/belief.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "diffatd/errors.hpp"
#include "diffatd/format.hpp"

namespace diffatd {

ParticleBatch::ParticleBatch(std::vector<std::vector<double>> particles,
                             std::vector<std::vector<double>> denoised, int tau)
    : particles_(std::move(particles)), denoised_(std::move(denoised)), tau_(tau) {
  if (denoised_.size() < 2) throw InvalidArgument("particle batch needs at least 2 particles");
  if (particles_.size() != denoised_.size()) {
    throw DimensionMismatch("particle batch size", denoised_.size(), particles_.size());
  }
  const std::size_t dim = denoised_.front().size();
  for (std::size_t i = 0; i < denoised_.size(); ++i) {
    if (denoised_[i].size() != dim) throw DimensionMismatch("denoised particle", dim, denoised_[i].size());
    if (particles_[i].size() != dim) throw DimensionMismatch("particle state", dim, particles_[i].size());
  }
}

void BeliefConfig::validate(std::size_t batch_size) const {
  if (!(sigma_x2 > 0.0) || !std::isfinite(sigma_x2)) {
    throw InvalidRange("belief variance sigma_x2 must be positive");
  }
  if (weights.empty()) return;
  if (weights.size() != batch_size) throw DimensionMismatch("belief weights", batch_size, weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidRange("belief weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidRange("belief weights must sum to 1");
}

namespace {

void check_cells(const ParticleBatch& batch, std::span<const std::size_t> cells) {
  for (std::size_t c : cells) {
    if (c >= batch.dimension()) throw UnknownLocation(c, batch.dimension());
  }
}

double pair_distance(const std::vector<double>& a, const std::vector<double>& b,
                     std::span<const std::size_t> cells) {
  double s = 0.0;
  for (std::size_t c : cells) {
    const double d = a[c] - b[c];
    s += d * d;
  }
  return s;
}

}  // namespace

double marginal_entropy(const ParticleBatch& batch, const BeliefConfig& cfg) {
  cfg.validate(batch.size());
  const std::size_t n = batch.size();
  const auto& xs = batch.denoised();
  std::vector<double> log_w(n, -std::log(static_cast<double>(n)));
  if (!cfg.weights.empty()) {
    for (std::size_t i = 0; i < n; ++i) log_w[i] = std::log(cfg.weights[i]);
  }
  double total = 0.0;
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!cfg.weights.empty() && cfg.weights[i] == 0.0) continue;
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t d = 0; d < xs[i].size(); ++d) {
        const double diff = xs[i][d] - xs[j][d];
        sq += diff * diff;
      }
      terms[j] = log_w[j] + sq / (2.0 * cfg.sigma_x2);
      hi = std::max(hi, terms[j]);
    }
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - hi);
    total += std::exp(log_w[i]) * (hi + std::log(acc));
  }
  return total;
}

double exploration_score(const ParticleBatch& batch, std::span<const std::size_t> cells,
                         const BeliefConfig& cfg) {
  check_cells(batch, cells);
  const auto& xs = batch.denoised();
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) s += pair_distance(xs[i], xs[j], cells);
  }
  // Ordered pairs count each unordered pair twice.
  return 2.0 * s / (2.0 * cfg.sigma_x2);
}

double likelihood_score(const ParticleBatch& batch, std::span<const std::size_t> cells,
                        const BeliefConfig& cfg) {
  check_cells(batch, cells);
  const auto& xs = batch.denoised();
  const double n = static_cast<double>(xs.size());
  double off = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      off += std::exp(-pair_distance(xs[i], xs[j], cells) / (2.0 * cfg.sigma_x2));
    }
  }
  return n + 2.0 * off;
}

double reward_sum(const ParticleBatch& batch, std::span<const std::size_t> cells,
                  const RewardFn& reward) {
  check_cells(batch, cells);
  std::vector<double> patch(cells.size());
  double s = 0.0;
  for (const auto& x : batch.denoised()) {
    for (std::size_t k = 0; k < cells.size(); ++k) patch[k] = x[cells[k]];
    s += reward(patch);
  }
  return s;
}

double exploitation_score(const ParticleBatch& batch, std::span<const std::size_t> cells,
                          const BeliefConfig& cfg, const RewardFn& reward) {
  return likelihood_score(batch, cells, cfg) * reward_sum(batch, cells, reward);
}

void ScoreField::write_csv(std::ostream& out) const {
  out << "location,expl,likeli,reward,exploit,combined\n";
  for (std::size_t k = 0; k < size(); ++k) {
    out << locations[k] << ',' << fmt_real(exploration[k]) << ',' << fmt_real(likelihood[k]) << ','
        << fmt_real(reward[k]) << ',' << fmt_real(exploitation[k]) << ','
        << fmt_real(k < combined.size() ? combined[k] : 0.0) << '\n';
  }
}

ScoreField compute_score_field(const ParticleBatch& batch, const LocationGrid& grid,
                               std::span<const std::size_t> candidates,
                               const BeliefConfig& cfg, const RewardFn& reward) {
  cfg.validate(batch.size());
  if (grid.cell_count() != batch.dimension()) {
    throw DimensionMismatch("score field grid", batch.dimension(), grid.cell_count());
  }
  ScoreField f;
  const std::size_t n = candidates.size();
  f.locations.assign(candidates.begin(), candidates.end());
  f.exploration.resize(n);
  f.likelihood.resize(n);
  f.reward.assign(n, 0.0);
  f.exploitation.assign(n, 0.0);
  f.combined.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& cells = grid.cells(candidates[k]);
    f.exploration[k] = exploration_score(batch, cells, cfg);
    f.likelihood[k] = likelihood_score(batch, cells, cfg);
    if (reward) {
      f.reward[k] = reward_sum(batch, cells, reward);
      f.exploitation[k] = f.likelihood[k] * f.reward[k];
    }
  }
  return f;
}

}  // namespace diffatd

#include "diffatd/noise_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "diffatd/errors.hpp"

namespace diffatd {

std::size_t NoiseSchedule::index(int tau) const {
  if (tau < 1 || tau > steps()) {
    throw InvalidRange("diffusion step " + std::to_string(tau) + " outside [1, " +
                       std::to_string(steps()) + "]");
  }
  return static_cast<std::size_t>(tau - 1);
}

NoiseSchedule schedule_from_betas(std::vector<double> betas, PosteriorNoise noise) {
  if (betas.empty()) throw InvalidRange("noise schedule needs at least one step");
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw InvalidRange("beta values must lie in (0, 1)");
  }
  NoiseSchedule s;
  const std::size_t n = betas.size();
  s.beta_ = std::move(betas);
  s.alpha_.resize(n);
  s.alpha_bar_.resize(n);
  s.sigma_tilde_.resize(n);
  double running = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    s.alpha_[i] = 1.0 - s.beta_[i];
    running *= s.alpha_[i];
    s.alpha_bar_[i] = running;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (noise == PosteriorNoise::zero) {
      s.sigma_tilde_[i] = 0.0;
      continue;
    }
    const double abar_prev = i == 0 ? 1.0 : s.alpha_bar_[i - 1];
    s.sigma_tilde_[i] = std::sqrt(s.beta_[i] * (1.0 - abar_prev) / (1.0 - s.alpha_bar_[i]));
  }
  return s;
}

NoiseSchedule make_schedule(int steps, double beta_min, double beta_max, BetaCurve curve,
                            PosteriorNoise noise) {
  if (steps < 1) throw InvalidRange("step count must be >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0)) {
    throw InvalidRange("beta bounds must satisfy 0 < beta_min <= beta_max < 1");
  }
  std::vector<double> betas(static_cast<std::size_t>(steps));
  switch (curve) {
    case BetaCurve::linear:
      for (int i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        betas[static_cast<std::size_t>(i)] = beta_min + frac * (beta_max - beta_min);
      }
      break;
    case BetaCurve::cosine: {
      constexpr double offset = 0.008;
      auto f = [&](double t) {
        const double c = std::cos((t / steps + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
        return c * c;
      };
      for (int i = 0; i < steps; ++i) {
        const double b = 1.0 - f(i + 1.0) / f(static_cast<double>(i));
        betas[static_cast<std::size_t>(i)] = std::clamp(b, beta_min, beta_max);
      }
      break;
    }
  }
  return schedule_from_betas(std::move(betas), noise);
}

}  // namespace diffatd

#include <algorithm>
#include <cmath>
#include <numbers>

#include "diffatd/errors.hpp"
#include "diffatd/validation.hpp"

namespace diffatd::oracle {

double alpha_bar_product(std::span<const double> betas, int tau) {
  double p = 1.0;
  for (int s = 0; s < tau; ++s) p *= 1.0 - betas[static_cast<std::size_t>(s)];
  return p;
}

double gmm_log_density(std::span<const double> x, int tau, const GaussianMixturePrior& prior,
                       const NoiseSchedule& schedule) {
  const double abar = schedule.alpha_bar(tau);
  std::vector<double> terms;
  for (const auto& comp : prior.components()) {
    const double var = abar * comp.variance + 1.0 - abar;
    double log_pdf = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double r = x[d] - std::sqrt(abar) * comp.mean[d];
      log_pdf += -0.5 * std::log(2.0 * std::numbers::pi * var) - r * r / (2.0 * var);
    }
    terms.push_back(std::log(comp.weight) + log_pdf);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

std::vector<double> central_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double keep = probe[d];
    probe[d] = keep + h;
    const double up = f(probe);
    probe[d] = keep - h;
    const double down = f(probe);
    probe[d] = keep;
    g[d] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<double> gaussian_posterior_mean(std::span<const double> x, double alpha_bar,
                                            std::span<const double> mean, double var) {
  // x = sqrt(a) x0 + sqrt(1 - a) e with x0 ~ N(m, v): the regression of x0 on x
  // has gain cov(x0, x) / var(x) = sqrt(a) v / (a v + 1 - a).
  const double gain = std::sqrt(alpha_bar) * var / (alpha_bar * var + 1.0 - alpha_bar);
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    out[d] = mean[d] + gain * (x[d] - std::sqrt(alpha_bar) * mean[d]);
  }
  return out;
}

std::vector<std::size_t> entropy_rank_tied_set(const ParticleBatch& batch,
                                               std::span<const std::size_t> candidates,
                                               std::span<const std::size_t> measured,
                                               const BeliefConfig& cfg) {
  if (batch.size() > 4) throw InvalidArgument("entropy oracle handles at most 4 particles");
  if (candidates.empty() || candidates.size() > 16) {
    throw InvalidArgument("entropy oracle needs 1 to 16 candidates");
  }
  const auto& xh = batch.denoised();
  std::vector<double> objective;
  for (std::size_t q : candidates) {
    std::vector<std::size_t> set(measured.begin(), measured.end());
    set.push_back(q);
    double total = 0.0;
    for (std::size_t i = 0; i < xh.size(); ++i) {
      for (std::size_t j = 0; j < xh.size(); ++j) {
        // log of a product of per-coordinate factors, one factor at a time
        double log_prod = 0.0;
        for (std::size_t a : set) {
          const double d = xh[i][a] - xh[j][a];
          log_prod += std::log(std::exp(d * d / (2.0 * cfg.sigma_x2)));
        }
        total += log_prod;
      }
    }
    objective.push_back(total);
  }
  const double best = *std::max_element(objective.begin(), objective.end());
  // The constant measured-set part is summed in each objective, so equal
  // candidates may differ in the last bits.
  const double tol = 1e-9 * std::max(1.0, std::abs(best));
  std::vector<std::size_t> tied;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    if (objective[k] >= best - tol) tied.push_back(candidates[k]);
  }
  return tied;
}

std::size_t entropy_rank_oracle(const ParticleBatch& batch,
                                std::span<const std::size_t> candidates,
                                std::span<const std::size_t> measured, const BeliefConfig& cfg) {
  return entropy_rank_tied_set(batch, candidates, measured, cfg).front();
}

double reward_forward(const RewardNet& net, std::span<const double> patch) {
  std::vector<double> h(patch.begin(), patch.end());
  const auto& layers = net.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const bool last = li + 1 == layers.size();
    std::vector<double> z(layers[li].bias);
    for (std::size_t o = 0; o < z.size(); ++o) {
      for (std::size_t i = 0; i < h.size(); ++i) z[o] += layers[li].weights[o * h.size() + i] * h[i];
      if (!last) z[o] = std::max(z[o], 0.0) + net.config().slope * std::min(z[o], 0.0);
    }
    h = z;
  }
  return 1.0 / (1.0 + std::exp(-h[0]));
}

Mt64::Mt64(std::uint64_t seed) : index_(312) {
  mt_[0] = seed;
  for (int i = 1; i < 312; ++i) {
    mt_[i] = 6364136223846793005ULL * (mt_[i - 1] ^ (mt_[i - 1] >> 62)) + static_cast<std::uint64_t>(i);
  }
}

std::uint64_t Mt64::next() {
  constexpr std::uint64_t upper = 0xFFFFFFFF80000000ULL;
  constexpr std::uint64_t lower = 0x7FFFFFFFULL;
  constexpr std::uint64_t matrix = 0xB5026F5AA96619E9ULL;
  if (index_ >= 312) {
    for (int i = 0; i < 312; ++i) {
      const std::uint64_t y = (mt_[i] & upper) | (mt_[(i + 1) % 312] & lower);
      mt_[i] = mt_[(i + 156) % 312] ^ (y >> 1) ^ ((y & 1ULL) ? matrix : 0ULL);
    }
    index_ = 0;
  }
  std::uint64_t x = mt_[index_++];
  x ^= (x >> 29) & 0x5555555555555555ULL;
  x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
  x ^= (x << 37) & 0xFFF7EEE000000000ULL;
  x ^= x >> 43;
  return x;
}

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t gamma = 0x9E3779B97F4A7C15ULL;
  const std::uint64_t first = mix(seed + gamma);
  return mix((first ^ (stream_id * 0xD1B54A32D192ED03ULL)) + gamma);
}

std::size_t uniform_index(Mt64& gen, std::size_t n) {
  const std::uint64_t max = ~0ULL;
  const std::uint64_t limit = max - max % n;
  for (;;) {
    const std::uint64_t r = gen.next();
    if (r < limit) return static_cast<std::size_t>(r % n);
  }
}

double PolarNormal::operator()(Mt64& gen) {
  if (saved_available_) {
    saved_available_ = false;
    return saved_;
  }
  auto canonical = [&gen] {
    const double u = static_cast<double>(gen.next()) / 18446744073709551616.0;
    return u >= 1.0 ? std::nextafter(1.0, 0.0) : u;
  };
  double x, y, r2;
  do {
    x = 2.0 * canonical() - 1.0;
    y = 2.0 * canonical() - 1.0;
    r2 = x * x + y * y;
  } while (r2 > 1.0 || r2 == 0.0);
  const double mult = std::sqrt(-2.0 * std::log(r2) / r2);
  saved_ = x * mult;
  saved_available_ = true;
  return y * mult;
}

}  // namespace diffatd::oracle

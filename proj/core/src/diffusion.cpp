#include "diffatd/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "diffatd/errors.hpp"

namespace diffatd {

namespace {

void check_dim(const char* what, std::size_t expected, std::size_t got) {
  if (expected != got) throw DimensionMismatch(what, expected, got);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GmmScore::GmmScore(GaussianMixturePrior prior, NoiseSchedule schedule)
    : prior_(std::move(prior)), schedule_(std::move(schedule)) {}

void GmmScore::responsibilities(std::span<const double> x, int tau, std::vector<double>& resp,
                                std::vector<double>& var) const {
  check_dim("score input", prior_.dimension(), x.size());
  const double abar = schedule_.alpha_bar(tau);
  const double root = std::sqrt(abar);
  const auto& comps = prior_.components();
  const double dim = static_cast<double>(prior_.dimension());
  resp.resize(comps.size());
  var.resize(comps.size());
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double c = abar * comps[k].variance + (1.0 - abar);
    var[k] = c;
    double sq = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double r = x[d] - root * comps[k].mean[d];
      sq += r * r;
    }
    resp[k] = std::log(comps[k].weight) - 0.5 * dim * std::log(c) - 0.5 * sq / c;
    max_log = std::max(max_log, resp[k]);
  }
  double total = 0.0;
  for (double& r : resp) {
    r = std::exp(r - max_log);
    total += r;
  }
  for (double& r : resp) r /= total;
}

void GmmScore::score(std::span<const double> x, int tau, std::span<double> out) const {
  check_dim("score output", prior_.dimension(), out.size());
  std::vector<double> resp, var;
  responsibilities(x, tau, resp, var);
  const double root = std::sqrt(schedule_.alpha_bar(tau));
  std::fill(out.begin(), out.end(), 0.0);
  const auto& comps = prior_.components();
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (resp[k] == 0.0) continue;
    const double w = resp[k] / var[k];
    for (std::size_t d = 0; d < x.size(); ++d) out[d] += w * (root * comps[k].mean[d] - x[d]);
  }
}

void GmmScore::hessian_vector(std::span<const double> x, int tau, std::span<const double> v,
                              std::span<double> out) const {
  check_dim("hessian vector", prior_.dimension(), v.size());
  check_dim("hessian output", prior_.dimension(), out.size());
  std::vector<double> resp, var;
  responsibilities(x, tau, resp, var);
  const double root = std::sqrt(schedule_.alpha_bar(tau));
  const auto& comps = prior_.components();
  const std::size_t n = x.size();

  // H v = sum_k r_k (-v / c_k) + sum_k r_k s_k (s_k . v) - s (s . v)
  std::vector<double> s_total(n, 0.0);
  std::vector<double> s_k(n);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (resp[k] == 0.0) continue;
    for (std::size_t d = 0; d < n; ++d) s_k[d] = (root * comps[k].mean[d] - x[d]) / var[k];
    const double proj = dot(s_k, v);
    for (std::size_t d = 0; d < n; ++d) {
      s_total[d] += resp[k] * s_k[d];
      out[d] += resp[k] * (s_k[d] * proj - v[d] / var[k]);
    }
  }
  const double proj_total = dot(s_total, v);
  for (std::size_t d = 0; d < n; ++d) out[d] -= s_total[d] * proj_total;
}

std::vector<double> gmm_score(std::span<const double> x, int tau,
                              const GaussianMixturePrior& prior, const NoiseSchedule& schedule) {
  check_dim("gmm_score input", prior.dimension(), x.size());
  GmmScore model(prior, schedule);
  std::vector<double> out(x.size());
  model.score(x, tau, out);
  return out;
}

std::vector<double> tweedie_denoise(std::span<const double> x_tau, int tau,
                                    const ScoreModel& score, const NoiseSchedule& schedule) {
  check_dim("tweedie input", score.dimension(), x_tau.size());
  const double abar = schedule.alpha_bar(tau);
  std::vector<double> s(x_tau.size());
  score.score(x_tau, tau, s);
  const double inv_root = 1.0 / std::sqrt(abar);
  std::vector<double> out(x_tau.size());
  for (std::size_t d = 0; d < x_tau.size(); ++d) {
    out[d] = (x_tau[d] + (1.0 - abar) * s[d]) * inv_root;
  }
  return out;
}

std::vector<double> ancestral_step(std::span<const double> x_tau, std::span<const double> x_hat,
                                   int tau, std::span<const double> z,
                                   const NoiseSchedule& schedule) {
  check_dim("ancestral x_hat", x_tau.size(), x_hat.size());
  check_dim("ancestral noise", x_tau.size(), z.size());
  const double a = schedule.alpha(tau);
  const double b = schedule.beta(tau);
  const double abar = schedule.alpha_bar(tau);
  const double abar_prev = schedule.alpha_bar(tau - 1);
  const double coef_x = std::sqrt(a) * (1.0 - abar_prev) / (1.0 - abar);
  const double coef_hat = std::sqrt(abar_prev) * b / (1.0 - abar);
  const double sigma = schedule.sigma_tilde(tau);
  std::vector<double> out(x_tau.size());
  for (std::size_t d = 0; d < x_tau.size(); ++d) {
    out[d] = coef_x * x_tau[d] + coef_hat * x_hat[d] + sigma * z[d];
  }
  return out;
}

void MeasurementLog::add(std::size_t coordinate, double value) {
  coords_.push_back(coordinate);
  values_.push_back(value);
}

bool MeasurementLog::contains(std::size_t coordinate) const {
  return std::find(coords_.begin(), coords_.end(), coordinate) != coords_.end();
}

std::vector<double> guidance_gradient(std::span<const double> x_tau,
                                      std::span<const double> x_hat,
                                      const MeasurementLog& observed, int tau,
                                      JacobianMode mode, const ScoreModel& score,
                                      const NoiseSchedule& schedule) {
  const std::size_t n = x_tau.size();
  check_dim("guidance x_hat", n, x_hat.size());
  std::vector<double> residual(n, 0.0);
  const auto& coords = observed.coordinates();
  const auto& values = observed.values();
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= n) throw UnknownLocation(coords[i], n);
    residual[coords[i]] += 2.0 * (x_hat[coords[i]] - values[i]);
  }
  const double abar = schedule.alpha_bar(tau);
  const double inv_root = 1.0 / std::sqrt(abar);
  std::vector<double> grad(n);
  if (mode == JacobianMode::scaled_identity) {
    for (std::size_t d = 0; d < n; ++d) grad[d] = inv_root * residual[d];
    return grad;
  }
  // d x_hat / d x = (I + (1 - abar) H) / sqrt(abar), H symmetric.
  std::vector<double> hv(n);
  score.hessian_vector(x_tau, tau, residual, hv);
  for (std::size_t d = 0; d < n; ++d) {
    grad[d] = inv_root * (residual[d] + (1.0 - abar) * hv[d]);
  }
  return grad;
}

std::vector<double> guidance_step(std::span<const double> x_prime,
                                  std::span<const double> x_tau,
                                  std::span<const double> x_hat,
                                  const MeasurementLog& observed, int tau,
                                  const GuidanceConfig& cfg, const ScoreModel& score,
                                  const NoiseSchedule& schedule) {
  check_dim("guidance x_prime", x_tau.size(), x_prime.size());
  if (!(cfg.zeta >= 0.0) || !std::isfinite(cfg.zeta)) {
    throw InvalidRange("guidance step size must be finite and non-negative");
  }
  std::vector<double> out(x_prime.begin(), x_prime.end());
  if (observed.empty() || cfg.zeta == 0.0) {
    for (std::size_t c : observed.coordinates()) {
      if (c >= x_tau.size()) throw UnknownLocation(c, x_tau.size());
    }
    return out;
  }
  const auto grad = guidance_gradient(x_tau, x_hat, observed, tau, cfg.jacobian, score, schedule);
  for (std::size_t d = 0; d < out.size(); ++d) out[d] -= cfg.zeta * grad[d];
  return out;
}

std::vector<double> guidance_step(std::span<const double> x_prime,
                                  std::span<const double> x_tau,
                                  const MeasurementLog& observed, int tau,
                                  const GuidanceConfig& cfg, const ScoreModel& score,
                                  const NoiseSchedule& schedule) {
  const auto x_hat = tweedie_denoise(x_tau, tau, score, schedule);
  return guidance_step(x_prime, x_tau, x_hat, observed, tau, cfg, score, schedule);
}

}  // namespace diffatd

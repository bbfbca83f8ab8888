#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "diffatd/belief.hpp"
#include "diffatd/diffusion.hpp"
#include "diffatd/policy.hpp"
#include "diffatd/rng.hpp"
#include "diffatd/validation.hpp"

namespace diffatd {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

double rel_err(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max(diff, std::abs(a[k] - b[k]));
    ref = std::max(ref, std::abs(b[k]));
  }
  return diff / std::max(ref, 1e-8);
}

GaussianMixturePrior random_prior(RandomStream& rng, std::size_t dim, std::size_t comps) {
  std::vector<GaussianComponent> c(comps);
  double total = 0.0;
  for (auto& comp : c) {
    comp.weight = 0.2 + rng.uniform();
    total += comp.weight;
    comp.mean.resize(dim);
    for (double& m : comp.mean) m = 2.0 * rng.normal();
    comp.variance = 0.05 + rng.uniform();
  }
  // Renormalize so the last weight absorbs the rounding.
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < comps; ++k) {
    c[k].weight /= total;
    acc += c[k].weight;
  }
  c.back().weight = 1.0 - acc;
  return GaussianMixturePrior(std::move(c));
}

ValidationResult schedule_suite() {
  double worst = 0.0;
  for (int steps : {1, 7, 200, 1000, 4096}) {
    for (auto curve : {BetaCurve::linear, BetaCurve::cosine}) {
      const auto s = make_schedule(steps, 1e-4, 0.02, curve);
      for (int tau = 1; tau <= steps; ++tau) {
        worst = std::max(worst, std::abs(s.alpha_bar(tau) - oracle::alpha_bar_product(s.betas(), tau)));
      }
    }
  }
  return {"schedule-product", worst <= 1e-12, "max abs err " + sci(worst), 0.0};
}

ValidationResult tweedie_suite() {
  RandomStream rng(101);
  const auto sched = make_schedule(1000, 1e-4, 0.02, BetaCurve::linear);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + rng.index(4);
    GaussianComponent comp{1.0, std::vector<double>(dim), 0.1 + 2.0 * rng.uniform()};
    for (double& m : comp.mean) m = rng.normal();
    GmmScore score(GaussianMixturePrior({comp}), sched);
    const int tau = 1 + static_cast<int>(rng.index(1000));
    std::vector<double> x(dim);
    for (double& v : x) v = 2.0 * rng.normal();
    const auto got = tweedie_denoise(x, tau, score, sched);
    const auto want = oracle::gaussian_posterior_mean(x, sched.alpha_bar(tau), comp.mean, comp.variance);
    for (std::size_t d = 0; d < dim; ++d) worst = std::max(worst, std::abs(got[d] - want[d]));
  }
  return {"tweedie-posterior-mean", worst < 1e-9, "max abs err " + sci(worst) + " over 50 cases", 0.0};
}

ValidationResult score_suite() {
  RandomStream rng(202);
  const auto sched = make_schedule(100, 1e-3, 0.05, BetaCurve::linear);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng.index(8);
    const auto prior = random_prior(rng, dim, 1 + rng.index(5));
    const int tau = 1 + static_cast<int>(rng.index(100));
    std::vector<double> x(dim);
    for (double& v : x) v = 2.0 * rng.normal();
    const auto got = gmm_score(x, tau, prior, sched);
    const auto fd = oracle::central_gradient(
        [&](std::span<const double> p) { return oracle::gmm_log_density(p, tau, prior, sched); }, x,
        1e-5);
    worst = std::max(worst, rel_err(got, fd));
  }
  return {"score-finite-difference", worst < 1e-6, "max rel err " + sci(worst) + " over 100 points",
          0.0};
}

ValidationResult guidance_suite() {
  RandomStream rng(303);
  const auto sched = make_schedule(100, 1e-3, 0.05, BetaCurve::linear);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t dim = 2 + rng.index(5);
    const auto prior = random_prior(rng, dim, 1 + rng.index(4));
    GmmScore score(prior, sched);
    const int tau = 1 + static_cast<int>(rng.index(100));
    std::vector<double> x(dim);
    for (double& v : x) v = rng.normal();
    MeasurementLog log;
    for (std::size_t d = 0; d < dim; d += 2) log.add(d, rng.normal());
    const auto x_hat = tweedie_denoise(x, tau, score, sched);
    const auto got = guidance_gradient(x, x_hat, log, tau, JacobianMode::exact, score, sched);
    auto residual = [&](std::span<const double> p) {
      const auto xh = tweedie_denoise(p, tau, score, sched);
      double r = 0.0;
      for (std::size_t k = 0; k < log.size(); ++k) {
        const double e = log.values()[k] - xh[log.coordinates()[k]];
        r += e * e;
      }
      return r;
    };
    worst = std::max(worst, rel_err(got, oracle::central_gradient(residual, x, 1e-5)));
  }
  return {"guidance-exact-jacobian", worst < 1e-6, "max rel err " + sci(worst) + " over 30 cases",
          0.0};
}

ValidationResult entropy_suite() {
  RandomStream rng(404);
  const BeliefConfig cfg;
  int agree = 0;
  const int instances = 200;
  for (int trial = 0; trial < instances; ++trial) {
    const std::size_t n_b = 2 + rng.index(3);
    const std::size_t dim = 20;
    const bool coarse = trial % 4 == 0;  // small integer values produce ties
    std::vector<std::vector<double>> xh(n_b, std::vector<double>(dim));
    for (auto& p : xh) {
      for (double& v : p) v = coarse ? static_cast<double>(rng.index(2)) : rng.normal();
    }
    ParticleBatch batch(xh, xh, 1);
    std::vector<std::size_t> cells(dim);
    for (std::size_t k = 0; k < dim; ++k) cells[k] = k;
    for (std::size_t k = dim; k > 1; --k) std::swap(cells[k - 1], cells[rng.index(k)]);
    const std::size_t n_measured = rng.index(5);
    std::vector<std::size_t> measured(cells.begin(), cells.begin() + static_cast<long>(n_measured));
    const std::size_t n_cand = 1 + rng.index(std::min<std::size_t>(16, dim - n_measured));
    std::vector<std::size_t> cand(cells.begin() + static_cast<long>(n_measured),
                                  cells.begin() + static_cast<long>(n_measured + n_cand));
    std::sort(cand.begin(), cand.end());
    std::vector<double> expl;
    for (std::size_t q : cand) {
      const std::size_t one[] = {q};
      expl.push_back(exploration_score(batch, one, cfg));
    }
    RandomStream unused(0);
    const std::size_t pick = cand[argmax(expl, TieBreak::lowest_index, unused)];
    const auto tied = oracle::entropy_rank_tied_set(batch, cand, measured, cfg);
    if (std::find(tied.begin(), tied.end(), pick) != tied.end()) ++agree;
  }
  return {"exploration-entropy-argmax", agree == instances,
          std::to_string(agree) + "/" + std::to_string(instances) + " instances agree", 0.0};
}

ValidationResult reward_grad_suite() {
  RandomStream rng(505);
  double worst = 0.0;
  std::vector<RewardNetConfig> configs;
  for (std::size_t input : {1u, 16u}) {
    RewardNetConfig dense;
    dense.input = input;
    configs.push_back(dense);
    configs.push_back(RewardNetConfig::deep_preset(input));
  }
  for (std::size_t c = 0; c < configs.size(); ++c) {
    RewardNet net(configs[c], 600 + c);
    std::vector<LabeledPatch> data(6);
    for (auto& s : data) {
      s.patch.resize(configs[c].input);
      for (double& v : s.patch) v = rng.uniform();
      s.label = rng.uniform();
    }
    worst = std::max(worst, grad_check(net, data));
  }
  return {"reward-backprop", worst < 1e-4, "max rel err " + sci(worst) + " over 4 architectures",
          0.0};
}

ValidationResult forward_suite() {
  RandomStream rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    RewardNetConfig cfg = trial % 2 ? RewardNetConfig::deep_preset(4) : RewardNetConfig{};
    if (trial % 2 == 0) cfg.input = 4;
    RewardNet net(cfg, 700 + static_cast<std::uint64_t>(trial));
    std::vector<double> patch(4);
    for (double& v : patch) v = 2.0 * rng.normal();
    worst = std::max(worst, std::abs(net.predict(patch) - oracle::reward_forward(net, patch)));
  }
  return {"reward-forward-pass", worst < 1e-12, "max abs err " + sci(worst), 0.0};
}

ValidationResult rng_suite() {
  int mismatches = 0;
  for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    for (std::uint64_t id : {stream::kPolicy, stream::kObservationNoise, stream::kParticleBase + 3}) {
      RandomStream lib(seed, id);
      oracle::Mt64 ref(oracle::derive_seed(seed, id));
      for (std::size_t n : {1u, 2u, 3u, 4u, 17u, 1000u}) {
        if (lib.index(n) != oracle::uniform_index(ref, n)) ++mismatches;
      }
#if defined(__GLIBCXX__)
      RandomStream lib_n(seed, id);
      oracle::Mt64 ref_n(oracle::derive_seed(seed, id));
      oracle::PolarNormal polar;
      for (int k = 0; k < 8; ++k) {
        if (lib_n.normal() != polar(ref_n)) ++mismatches;
      }
#endif
    }
  }
  return {"seeded-streams", mismatches == 0, std::to_string(mismatches) + " mismatching draws", 0.0};
}

}  // namespace

std::vector<ValidationResult> run_validation_suites() {
  using Suite = ValidationResult (*)();
  const Suite suites[] = {schedule_suite,  tweedie_suite,     score_suite,   guidance_suite,
                          entropy_suite,   reward_grad_suite, forward_suite, rng_suite};
  std::vector<ValidationResult> out;
  for (Suite s : suites) {
    const auto start = std::chrono::steady_clock::now();
    ValidationResult r = s();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace diffatd

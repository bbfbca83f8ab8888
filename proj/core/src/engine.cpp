#include <algorithm>
#include <chrono>
#include <cmath>

#include "diffatd/bench.hpp"
#include "diffatd/diffusion.hpp"
#include "diffatd/errors.hpp"
#include "diffatd/policy.hpp"
#include "diffatd/reward_model.hpp"
#include "diffatd/rng.hpp"

namespace diffatd {

namespace {

// Contents in [0, 1] <-> diffusion coordinates in [-1, 1].
constexpr double kModelScale = 2.0;
constexpr double kModelShift = -1.0;

double to_model(double content) { return kModelScale * content + kModelShift; }
double to_content(double model) { return (model - kModelShift) / kModelScale; }

GaussianMixturePrior build_prior(const ExperimentConfig& cfg) {
  switch (cfg.prior.kind) {
    case PriorSource::Kind::blobs: {
      BlobPriorSpec spec = cfg.prior.blobs;
      spec.rows = cfg.scene.rows;
      spec.cols = cfg.scene.cols;
      return make_blob_prior(spec);
    }
    case PriorSource::Kind::json:
      return GaussianMixturePrior::load(cfg.prior.path);
    case PriorSource::Kind::empirical:
      return load_empirical_prior(cfg.prior.path, cfg.prior.variance);
  }
  throw ConfigError("prior.kind", "unsupported");
}

}  // namespace

Experiment::Experiment(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.scene.kind == SceneSource::Kind::file) {
    Scene s = load_scene(cfg_.scene.path, cfg_.scene.format, cfg_.scene.target, cfg_.scene.block);
    cfg_.scene.rows = s.rows();
    cfg_.scene.cols = s.cols();
    file_scene_ = s.with_noise(cfg_.scene.noise);
  }
  prior_ = build_prior(cfg_);
  if (prior_.dimension() != cfg_.scene.rows * cfg_.scene.cols) {
    throw ConfigError("prior", "dimension " + std::to_string(prior_.dimension()) +
                                   " does not match the " + std::to_string(cfg_.scene.rows) + "x" +
                                   std::to_string(cfg_.scene.cols) + " scene");
  }
  model_prior_ = prior_.affine(kModelScale, kModelShift);
  schedule_ = make_schedule(cfg_.diffusion.steps, cfg_.diffusion.beta_min, cfg_.diffusion.beta_max,
                            cfg_.diffusion.curve, cfg_.diffusion.posterior_noise);
}

Scene Experiment::scene(std::uint64_t seed) const {
  if (file_scene_) return *file_scene_;
  RandomStream rng(seed, stream::kScene);
  return gen_gmm_scene(prior_, cfg_.scene.rows, cfg_.scene.cols, cfg_.scene.rule, rng,
                       cfg_.scene.block, cfg_.scene.noise);
}

EpisodeResult Experiment::run(std::uint64_t seed, const EpisodeObserver& observer) const {
  return run(scene(seed), seed, observer);
}

EpisodeResult Experiment::run(const Scene& scene, std::uint64_t seed,
                              const EpisodeObserver& observer) const {
  const auto start = std::chrono::steady_clock::now();
  if (scene.grid().size() != prior_.dimension()) {
    throw DimensionMismatch("episode scene", prior_.dimension(), scene.grid().size());
  }
  const auto& layout = scene.layout();
  const int budget = std::min<int>(cfg_.budget, static_cast<int>(scene.location_count()));
  const int steps = schedule_.steps();
  const auto measure_taus = build_measurement_schedule(steps, budget);

  EpisodeResult result;
  result.seed = seed;
  result.budget = budget;
  result.target_locations = scene.target_location_count();

  EpisodeState state(budget, scene.location_count());
  MeasuredSet measured(scene.location_count());
  RandomStream policy_rng(seed, stream::kPolicy);
  RandomStream noise_rng(seed, stream::kObservationNoise);

  const bool belief_policy = cfg_.policy.uses_belief();
  const std::size_t dim = prior_.dimension();
  const std::size_t n_b = cfg_.n_particles;
  GmmScore score(model_prior_, schedule_);

  std::vector<RandomStream> particle_rng;
  std::vector<std::vector<double>> particles;
  std::vector<std::vector<double>> denoised(n_b);
  if (belief_policy) {
    particle_rng.reserve(n_b);
    particles.assign(n_b, std::vector<double>(dim));
    for (std::size_t i = 0; i < n_b; ++i) {
      particle_rng.emplace_back(seed, stream::kParticleBase + i);
      for (double& v : particles[i]) v = particle_rng[i].normal();
    }
  }

  RewardNet net(cfg_.reward.net_config(layout.patch_area()), derive_seed(seed, stream::kRewardInit));
  std::vector<LabeledPatch> dataset;
  MeasurementLog observed;
  std::vector<double> z(dim);

  std::size_t next_measure = 0;
  for (int tau = steps; tau >= 1; --tau) {
    if (belief_policy) {
      for (std::size_t i = 0; i < n_b; ++i) {
        denoised[i] = tweedie_denoise(particles[i], tau, score, schedule_);
        for (double& v : z) v = particle_rng[i].normal();
        const auto x_prime = ancestral_step(particles[i], denoised[i], tau, z, schedule_);
        particles[i] = guidance_step(x_prime, particles[i], denoised[i], observed, tau,
                                     cfg_.diffusion.guidance, score, schedule_);
      }
    }
    if (next_measure >= measure_taus.size() || measure_taus[next_measure] != tau) continue;
    ++next_measure;
    if (state.remaining() <= 0 || state.candidates().empty()) continue;

    SelectionContext ctx;
    ctx.layout = &layout;
    ctx.belief = cfg_.belief;
    std::optional<ParticleBatch> batch;
    if (belief_policy) {
      std::vector<std::vector<double>> content(n_b, std::vector<double>(dim));
      for (std::size_t i = 0; i < n_b; ++i) {
        std::transform(denoised[i].begin(), denoised[i].end(), content[i].begin(), to_content);
      }
      batch.emplace(particles, std::move(content), tau);
      ctx.batch = &*batch;
      ctx.reward = [&net](std::span<const double> patch) { return net.predict(patch); };
    }

    const Selection sel = select(cfg_.policy, state, ctx, policy_rng);
    Measurement m = measure(scene, sel.location, measured, noise_rng, state.taken() + 1);
    state.record(sel.location, m.y);

    StepRecord rec;
    rec.t = state.taken();
    rec.tau = tau;
    rec.location = sel.location;
    rec.y = m.y;
    if (sel.field) {
      const auto k = sel.field_index;
      rec.expl = sel.field->exploration[k];
      rec.likeli = sel.field->likelihood[k];
      rec.reward = sel.field->reward[k];
      rec.exploit = sel.field->exploitation[k];
      rec.combined = sel.field->combined[k];
    }
    if (batch) rec.entropy = marginal_entropy(*batch, cfg_.belief);

    const auto& cells = layout.cells(sel.location);
    for (std::size_t k = 0; k < cells.size(); ++k) observed.add(cells[k], to_model(m.content[k]));
    if (belief_policy) {
      dataset.push_back({m.content, m.y});
      train(net, dataset, cfg_.reward.epochs, cfg_.reward.lr);
    }
    result.steps.push_back(rec);
    if (observer) observer(rec, sel.field ? &*sel.field : nullptr);
  }

  result.total_reward = state.cumulative_reward();
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

EpisodeResult run_episode(const ExperimentConfig& cfg, std::uint64_t seed,
                          const EpisodeObserver& observer) {
  return Experiment(cfg).run(seed, observer);
}

}  // namespace diffatd

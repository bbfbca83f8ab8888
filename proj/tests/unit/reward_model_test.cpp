#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "diffatd/errors.hpp"
#include "diffatd/reward_model.hpp"
#include "diffatd/rng.hpp"
#include "diffatd/validation.hpp"
#include "support.hpp"

using namespace diffatd;

namespace {

RewardNet linear_unit(double w, double b) {
  RewardNetConfig cfg;
  cfg.hidden = {};
  RewardNet net(cfg, 1);
  const double p[] = {w, b};
  net.set_parameters(p);
  return net;
}

double logit_of(double p) { return std::log(p / (1.0 - p)); }

std::vector<LabeledPatch> labeled_samples(RandomStream& rng, std::size_t n, std::size_t input) {
  std::vector<LabeledPatch> data(n);
  for (auto& s : data) {
    s.patch.resize(input);
    for (double& v : s.patch) v = rng.uniform();
    s.label = rng.uniform();
  }
  return data;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double pairs = 0.0, wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace

TEST_SUITE("reward_model") {

TEST_CASE("zero parameters predict one half") {
  RewardNet net(RewardNetConfig{}, 3);
  std::vector<double> zeros(net.parameter_count(), 0.0);
  net.set_parameters(zeros);
  const double patch[] = {0.7};
  CHECK(net.predict(patch) == 0.5);
  const double origin[] = {0.0};
  CHECK(linear_unit(1.0, 0.0).predict(origin) == 0.5);
}

TEST_CASE("forward pass matches an independent evaluator") {
  RandomStream rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    RewardNetConfig cfg = trial % 3 == 0 ? RewardNetConfig::deep_preset(4) : RewardNetConfig{};
    cfg.input = 4;
    RewardNet net(cfg, 100 + static_cast<std::uint64_t>(trial));
    std::vector<double> patch(4);
    for (double& v : patch) v = 3.0 * rng.normal();
    CHECK(std::abs(net.predict(patch) - oracle::reward_forward(net, patch)) < 1e-12);
  }
}

TEST_CASE("predictions stay strictly inside the unit interval") {
  const auto net = linear_unit(1.0, 0.0);
  const double hi[] = {800.0}, lo[] = {-800.0};
  CHECK(net.predict(hi) < 1.0);
  CHECK(net.predict(lo) > 0.0);
}

TEST_CASE("binary cross entropy") {
  CHECK(bce(0.5, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(bce(1.0 - 1e-12, 1.0) < 1e-11);
  const auto net = linear_unit(1.0, 0.0);
  const std::vector<LabeledPatch> data{
      {{logit_of(0.9)}, 1.0}, {{logit_of(0.1)}, 0.0}, {{logit_of(0.5)}, 1.0}};
  const double expected = -(std::log(0.9) + std::log(0.9) + std::log(0.5));
  CHECK(bce_loss(net, data) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(bce_loss(net, {}), EmptyDataset);
}

TEST_CASE("soft labels and input checks") {
  const auto net = linear_unit(2.0, -1.0);
  const std::vector<LabeledPatch> soft{{{0.3}, 0.25}};
  const double p = 1.0 / (1.0 + std::exp(-(2.0 * 0.3 - 1.0)));
  CHECK(bce_loss(net, soft) == doctest::Approx(-(0.25 * std::log(p) + 0.75 * std::log(1 - p))).epsilon(1e-12));
  CHECK_THROWS_AS(bce_loss(net, std::vector<LabeledPatch>{{{0.3}, 1.5}}), InvalidRange);
  CHECK_THROWS_AS(bce_loss(net, std::vector<LabeledPatch>{{{0.3, 0.1}, 1.0}}), DimensionMismatch);
  const double wide[] = {0.1, 0.2};
  CHECK_THROWS_AS(net.predict(wide), DimensionMismatch);
}

TEST_CASE("training fits a separable pair") {
  RewardNet net(RewardNetConfig{}, 5);
  const std::vector<LabeledPatch> data{{{0.1}, 0.0}, {{0.9}, 1.0}};
  const double before = bce_loss(net, data);
  train(net, data, 500, 0.1);
  CHECK(bce_loss(net, data) < 0.1);
  CHECK(bce_loss(net, data) < before);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  RandomStream rng(32);
  RewardNet net(RewardNetConfig{}, 6);
  const auto before = net.parameters();
  train(net, labeled_samples(rng, 5, 1), 10, 0.0);
  CHECK(net.parameters() == before);
}

TEST_CASE("duplicating the dataset doubles loss and gradient") {
  RandomStream rng(33);
  RewardNet net(RewardNetConfig{}, 7);
  const auto data = labeled_samples(rng, 4, 1);
  auto twice = data;
  twice.insert(twice.end(), data.begin(), data.end());
  std::vector<double> g1, g2;
  const double l1 = net.loss_and_gradient(data, g1);
  const double l2 = net.loss_and_gradient(twice, g2);
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-14));
  for (std::size_t k = 0; k < g1.size(); ++k) CHECK(g2[k] == doctest::Approx(2.0 * g1[k]).epsilon(1e-12));
}

TEST_CASE("a small descent step does not increase the loss") {
  RandomStream rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    RewardNet net(RewardNetConfig{}, 200 + static_cast<std::uint64_t>(trial));
    const auto data = labeled_samples(rng, 1 + rng.index(10), 1);
    const double before = bce_loss(net, data);
    train(net, data, 3, 0.01);
    CHECK(bce_loss(net, data) <= before + 1e-12);
  }
}

TEST_CASE("backprop agrees with finite differences") {
  RandomStream rng(35);
  for (std::size_t input : {1u, 4u, 16u}) {
    RewardNetConfig dense;
    dense.input = input;
    for (const auto& cfg : {dense, RewardNetConfig::deep_preset(input)}) {
      RewardNet net(cfg, 300 + input);
      CHECK(grad_check(net, labeled_samples(rng, 5, input)) < 1e-4);
    }
  }
  const auto single = linear_unit(0.3, -0.2);
  CHECK(grad_check(single, labeled_samples(rng, 3, 1)) < 1e-6);
}

TEST_CASE("gradients vanish at a near-perfect fit") {
  const auto net = linear_unit(60.0, -30.0);
  const std::vector<LabeledPatch> data{{{0.0}, 0.0}, {{1.0}, 1.0}};
  std::vector<double> g;
  net.loss_and_gradient(data, g);
  for (double v : g) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("training is deterministic for a seed") {
  RandomStream rng(36);
  const auto data = labeled_samples(rng, 8, 4);
  RewardNetConfig cfg;
  cfg.input = 4;
  RewardNet a(cfg, 42), b(cfg, 42), c(cfg, 43);
  CHECK(a.parameters() == b.parameters());
  CHECK(a.parameters() != c.parameters());
  for (std::size_t k = 1; k <= data.size(); ++k) {
    train(a, std::span(data).first(k), 3, 0.01);
    train(b, std::span(data).first(k), 3, 0.01);
  }
  CHECK(a.parameters() == b.parameters());
}

TEST_CASE("initialization bounds") {
  RewardNetConfig cfg;
  cfg.input = 9;
  RewardNet net(cfg, 8);
  for (const auto& l : net.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (double w : l.weights) CHECK(std::abs(w) <= bound);
    for (double b : l.bias) CHECK(std::abs(b) <= bound);
  }
  CHECK(net.parameter_count() == 9 * 16 + 16 + 16 * 8 + 8 + 8 + 1);
}

TEST_CASE("online learning separates bright targets from background") {
  RandomStream rng(37);
  auto draw = [&rng](bool target) { return target ? 0.8 + 0.2 * rng.uniform() : 0.2 * rng.uniform(); };
  RewardNet net(RewardNetConfig{}, derive_seed(37, stream::kRewardInit));
  std::vector<LabeledPatch> data;
  for (int t = 0; t < 50; ++t) {
    const bool target = rng.uniform() < 0.3;
    data.push_back({{draw(target)}, target ? 1.0 : 0.0});
    train(net, data, 3, 0.01);
  }
  std::vector<double> scores;
  std::vector<int> labels;
  for (int k = 0; k < 400; ++k) {
    const bool target = k % 3 == 0;
    const double patch[] = {draw(target)};
    scores.push_back(net.predict(patch));
    labels.push_back(target ? 1 : 0);
  }
  CHECK(auc(scores, labels) > 0.9);
}

TEST_CASE("checkpoint round trip") {
  RewardNet net(RewardNetConfig::deep_preset(4), 9);
  const auto back = RewardNet::from_json(net.to_json());
  CHECK(back.parameters() == net.parameters());
  CHECK(back.seed() == 9);
  CHECK(back.config().hidden == net.config().hidden);
  const auto dir = scratch_dir("reward_ckpt");
  net.save(dir / "net.json");
  CHECK(RewardNet::load(dir / "net.json").parameters() == net.parameters());
  CHECK_THROWS_AS(RewardNet::from_json("{\"config\": 3}"), ParseError);
}

}

#include <doctest.h>

#include <string>

#include "diffatd/bench.hpp"
#include "diffatd/config.hpp"
#include "diffatd/errors.hpp"
#include "support.hpp"

using namespace diffatd;

namespace {

std::string key_of(const std::string& text) {
  try {
    ExperimentConfig::from_json(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const auto cfg = ExperimentConfig::from_json("{}");
  CHECK(cfg.diffusion.steps == 1000);
  CHECK(cfg.diffusion.beta_min == 1e-4);
  CHECK(cfg.diffusion.beta_max == 0.02);
  CHECK(cfg.diffusion.guidance.zeta == 1.0);
  CHECK(cfg.diffusion.guidance.jacobian == JacobianMode::scaled_identity);
  CHECK(cfg.belief.sigma_x2 == 1.0);
  CHECK(cfg.policy.kind == PolicyKind::diffatd);
  CHECK(cfg.policy.combine_mode == CombineMode::exploit);
  CHECK(cfg.policy.normalize == Normalize::minmax);
  CHECK(cfg.policy.tie_break == TieBreak::lowest_index);
  CHECK(cfg.reward.epochs == 3);
  CHECK(cfg.reward.lr == 0.01);
  CHECK(cfg.reward.net_config(1).hidden == std::vector<std::size_t>{16, 8});
}

TEST_CASE("errors name the offending key") {
  CHECK(key_of(R"({"budgte": 3})") == "budgte");
  CHECK(key_of(R"({"policy": {"kind": "nope"}})") == "policy.kind");
  CHECK(key_of(R"({"policy": {"alpha": -1}})") == "policy.alpha");
  CHECK(key_of(R"({"diffusion": {"steps": 10}, "budget": 11})") == "budget");
  CHECK(key_of(R"({"diffusion": {"jacobian": "full"}})") == "diffusion.jacobian");
  CHECK(key_of(R"({"scene": {"noise": {"sigma": -0.1}}})") == "scene.noise.sigma");
  CHECK(key_of(R"({"scene": {"rows": "many"}})") == "scene.rows");
  CHECK(key_of(R"({"seeds": [1, 1]})") == "seeds");
  CHECK(key_of(R"({"seeds": []})") == "seeds");
  CHECK(key_of(R"({"belief": {"n_particles": 1}})") == "belief.n_particles");
  CHECK(key_of(R"({"reward": {"preset": "conv"}})") == "reward.preset");
  CHECK(key_of(R"({"scene": {"source": "file"}})") == "scene.path");
  CHECK_THROWS_AS(ExperimentConfig::from_json("{not json"), ParseError);
}

TEST_CASE("missing file names the path") {
  try {
    ExperimentConfig::load("/nonexistent/dir/c.json");
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/c.json") != std::string::npos);
  }
}

TEST_CASE("relative paths resolve against the config file") {
  const auto cfg = ExperimentConfig::load(data_path("species_scene.json"));
  CHECK(cfg.scene.kind == SceneSource::Kind::file);
  CHECK(cfg.scene.path == data_path("species_counts.csv"));
  CHECK(cfg.prior.path == data_path("corpus"));
  CHECK(cfg.scene.block == 2);
  CHECK(cfg.scene.target.kind == TargetSpec::Kind::value);
}

TEST_CASE("json round trip") {
  auto cfg = ExperimentConfig::load(data_path("tiny.json"));
  cfg.policy.kind = PolicyKind::ucb;
  cfg.policy.ucb_c = 0.75;
  cfg.policy.kappa_override = 0.25;
  cfg.diffusion.curve = BetaCurve::cosine;
  cfg.diffusion.guidance.jacobian = JacobianMode::exact;
  cfg.reward.deep_preset = true;
  cfg.scene.noise = {0.0, 0.1};
  const auto back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.policy.kind == PolicyKind::ucb);
  CHECK(back.policy.kappa_override == 0.25);
  CHECK(back.diffusion.guidance.jacobian == JacobianMode::exact);
  CHECK(back.reward.net_config(4).hidden == std::vector<std::size_t>{4, 32, 16, 8});
  CHECK(back.seeds == cfg.seeds);
}

TEST_CASE("suite expansion") {
  const auto entries = load_suite(data_path("tiny_suite.json"));
  REQUIRE(entries.size() == 8);
  CHECK(entries[0].label == "diffatd");
  CHECK(entries[0].config.budget == 4);
  CHECK(entries[1].config.budget == 8);
  CHECK(entries[7].config.policy.kind == PolicyKind::random);
  const auto single = load_suite(data_path("tiny.json"));
  REQUIRE(single.size() == 1);
  CHECK(single[0].label == "diffatd");
  CHECK_THROWS_AS(suite_from_json(R"({"suite": {"budgets": []}})"), ConfigError);
  CHECK_THROWS_AS(
      suite_from_json(R"({"suite": {"policies": [{"label": "a"}, {"label": "a", "kind": "random"}]}})"),
      ConfigError);
  CHECK_THROWS_AS(suite_from_json(R"({"suite": {"budgets": [5000]}})"), ConfigError);
}

TEST_CASE("shipped configs load") {
  for (const char* name : {"benchmark.json", "default.json"}) {
    const auto path = std::filesystem::path(DIFFATD_CONFIG_DIR) / name;
    CHECK_NOTHROW(Experiment(ExperimentConfig::load(path)));
    CHECK_NOTHROW(load_suite(path));
  }
}

}

#include "diffatd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "diffatd/errors.hpp"

namespace diffatd {

namespace fs = std::filesystem;
using nlohmann::json;

RewardNetConfig RewardTraining::net_config(std::size_t input) const {
  if (deep_preset) {
    auto cfg = RewardNetConfig::deep_preset(input);
    cfg.slope = slope;
    return cfg;
  }
  return RewardNetConfig{input, hidden, slope};
}

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(join(prefix, key), "unknown key");
  }
}

template <typename T>
void read(const json& obj, const std::string& prefix, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(prefix, key), std::string("wrong type: ") + e.what());
  }
}

template <typename E>
E read_enum(const json& obj, const std::string& prefix, const char* key, E fallback,
            std::initializer_list<std::pair<const char*, E>> names) {
  if (!obj.contains(key)) return fallback;
  std::string value;
  read(obj, prefix, key, value);
  for (const auto& [name, e] : names) {
    if (value == name) return e;
  }
  throw ConfigError(join(prefix, key), "unknown value '" + value + "'");
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

void parse_policy(const json& p, PolicyConfig& policy, const std::string& prefix,
                  bool allow_label = false) {
  if (allow_label) {
    check_keys(p, prefix, {"label", "kind", "alpha", "combine_mode", "normalize", "tie_break", "ucb_c",
                           "epsilon", "arm_size", "kappa_override"});
  } else {
    check_keys(p, prefix, {"kind", "alpha", "combine_mode", "normalize", "tie_break", "ucb_c", "epsilon",
                           "arm_size", "kappa_override"});
  }
  if (p.contains("kind")) {
    std::string kind;
    read(p, prefix, "kind", kind);
    try {
      policy.kind = policy_kind_from_string(kind);
    } catch (const ConfigError&) {
      throw ConfigError(join(prefix, "kind"), "unknown policy '" + kind + "'");
    }
  }
  read(p, prefix, "alpha", policy.alpha);
  policy.combine_mode = read_enum(p, prefix, "combine_mode", policy.combine_mode,
                                  {{"exploit", CombineMode::exploit}, {"likeli", CombineMode::likeli}});
  policy.normalize = read_enum(p, prefix, "normalize", policy.normalize,
                               {{"minmax", Normalize::minmax}, {"none", Normalize::none}});
  policy.tie_break = read_enum(p, prefix, "tie_break", policy.tie_break,
                               {{"lowest_index", TieBreak::lowest_index},
                                {"seeded_random", TieBreak::seeded_random}});
  read(p, prefix, "ucb_c", policy.ucb_c);
  read(p, prefix, "epsilon", policy.epsilon);
  read(p, prefix, "arm_size", policy.arm_size);
  if (p.contains("kappa_override")) {
    if (p["kappa_override"].is_null()) {
      policy.kappa_override.reset();
    } else {
      double k = 0.0;
      read(p, prefix, "kappa_override", k);
      policy.kappa_override = k;
    }
  }
}

ExperimentConfig parse_config(const json& doc, const fs::path& base) {
  ExperimentConfig cfg;
  check_keys(doc, "", {"scene", "prior", "diffusion", "belief", "budget", "policy", "reward", "seeds",
                       "output_dir", "suite"});

  if (doc.contains("scene")) {
    const auto& s = doc["scene"];
    check_keys(s, "scene", {"source", "rows", "cols", "block", "threshold", "component_labels", "path",
                            "format", "target", "noise"});
    cfg.scene.kind = read_enum(s, "scene", "source", cfg.scene.kind,
                               {{"synthetic", SceneSource::Kind::synthetic}, {"file", SceneSource::Kind::file}});
    read(s, "scene", "rows", cfg.scene.rows);
    read(s, "scene", "cols", cfg.scene.cols);
    read(s, "scene", "block", cfg.scene.block);
    read(s, "scene", "threshold", cfg.scene.rule.threshold);
    cfg.scene.target.threshold = cfg.scene.rule.threshold;
    read(s, "scene", "component_labels", cfg.scene.rule.component_labels);
    if (s.contains("path")) {
      std::string p;
      read(s, "scene", "path", p);
      cfg.scene.path = resolve(base, p);
      cfg.scene.format = grid_format_from_path(cfg.scene.path);
    }
    cfg.scene.format = read_enum(s, "scene", "format", cfg.scene.format,
                                 {{"csv", GridFormat::csv}, {"pgm", GridFormat::pgm}});
    cfg.scene.target.kind = read_enum(s, "scene", "target", cfg.scene.target.kind,
                                      {{"threshold", TargetSpec::Kind::threshold},
                                       {"value", TargetSpec::Kind::value},
                                       {"sidecar", TargetSpec::Kind::sidecar}});
    if (s.contains("noise")) {
      const auto& n = s["noise"];
      check_keys(n, "scene.noise", {"mu", "sigma"});
      read(n, "scene.noise", "mu", cfg.scene.noise.mu);
      read(n, "scene.noise", "sigma", cfg.scene.noise.sigma);
    }
  }

  if (doc.contains("prior")) {
    const auto& p = doc["prior"];
    check_keys(p, "prior", {"kind", "components", "blobs_per_component", "radius_min", "radius_max",
                            "background", "peak", "variance", "seed", "path"});
    cfg.prior.kind = read_enum(p, "prior", "kind", cfg.prior.kind,
                               {{"blobs", PriorSource::Kind::blobs},
                                {"json", PriorSource::Kind::json},
                                {"empirical", PriorSource::Kind::empirical}});
    auto& b = cfg.prior.blobs;
    read(p, "prior", "components", b.components);
    read(p, "prior", "blobs_per_component", b.blobs_per_component);
    read(p, "prior", "radius_min", b.radius_min);
    read(p, "prior", "radius_max", b.radius_max);
    read(p, "prior", "background", b.background);
    read(p, "prior", "peak", b.peak);
    read(p, "prior", "variance", b.variance);
    cfg.prior.variance = b.variance;
    read(p, "prior", "seed", b.seed);
    if (p.contains("path")) {
      std::string path;
      read(p, "prior", "path", path);
      cfg.prior.path = resolve(base, path);
    }
  }

  if (doc.contains("diffusion")) {
    const auto& d = doc["diffusion"];
    check_keys(d, "diffusion", {"steps", "beta_min", "beta_max", "curve", "posterior_noise", "zeta",
                                "jacobian"});
    read(d, "diffusion", "steps", cfg.diffusion.steps);
    read(d, "diffusion", "beta_min", cfg.diffusion.beta_min);
    read(d, "diffusion", "beta_max", cfg.diffusion.beta_max);
    cfg.diffusion.curve = read_enum(d, "diffusion", "curve", cfg.diffusion.curve,
                                    {{"linear", BetaCurve::linear}, {"cosine", BetaCurve::cosine}});
    cfg.diffusion.posterior_noise =
        read_enum(d, "diffusion", "posterior_noise", cfg.diffusion.posterior_noise,
                  {{"posterior", PosteriorNoise::posterior}, {"zero", PosteriorNoise::zero}});
    read(d, "diffusion", "zeta", cfg.diffusion.guidance.zeta);
    cfg.diffusion.guidance.jacobian =
        read_enum(d, "diffusion", "jacobian", cfg.diffusion.guidance.jacobian,
                  {{"scaled-identity", JacobianMode::scaled_identity}, {"exact", JacobianMode::exact}});
  }

  if (doc.contains("belief")) {
    const auto& b = doc["belief"];
    check_keys(b, "belief", {"n_particles", "sigma_x2", "weights"});
    read(b, "belief", "n_particles", cfg.n_particles);
    read(b, "belief", "sigma_x2", cfg.belief.sigma_x2);
    read(b, "belief", "weights", cfg.belief.weights);
  }

  read(doc, "", "budget", cfg.budget);
  if (doc.contains("policy")) parse_policy(doc["policy"], cfg.policy, "policy");

  if (doc.contains("reward")) {
    const auto& r = doc["reward"];
    check_keys(r, "reward", {"preset", "hidden", "slope", "epochs", "lr"});
    const std::string preset = r.value("preset", std::string("dense"));
    if (preset != "dense" && preset != "deep") throw ConfigError("reward.preset", "unknown preset '" + preset + "'");
    cfg.reward.deep_preset = preset == "deep";
    read(r, "reward", "hidden", cfg.reward.hidden);
    read(r, "reward", "slope", cfg.reward.slope);
    read(r, "reward", "epochs", cfg.reward.epochs);
    read(r, "reward", "lr", cfg.reward.lr);
  }

  read(doc, "", "seeds", cfg.seeds);
  if (doc.contains("output_dir")) {
    std::string out;
    read(doc, "", "output_dir", out);
    cfg.output_dir = resolve(base, out);
  }
  cfg.validate();
  return cfg;
}

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (scene.rows == 0) throw ConfigError("scene.rows", "must be >= 1");
  if (scene.cols == 0) throw ConfigError("scene.cols", "must be >= 1");
  if (scene.block == 0 || scene.rows % scene.block || scene.cols % scene.block) {
    if (scene.kind == SceneSource::Kind::synthetic || scene.block == 0) {
      throw ConfigError("scene.block", "must evenly divide rows and cols");
    }
  }
  if (!(scene.rule.threshold >= 0.0 && scene.rule.threshold <= 1.0)) {
    throw ConfigError("scene.threshold", "must lie in [0, 1]");
  }
  if (!(scene.noise.sigma >= 0.0)) throw ConfigError("scene.noise.sigma", "must be >= 0");
  if (scene.kind == SceneSource::Kind::file && scene.path.empty()) {
    throw ConfigError("scene.path", "required when scene.source is 'file'");
  }
  if (prior.kind == PriorSource::Kind::blobs) {
    if (prior.blobs.components == 0) throw ConfigError("prior.components", "must be >= 1");
    if (!(prior.blobs.variance >= 0.0)) throw ConfigError("prior.variance", "must be >= 0");
    if (!(prior.blobs.radius_min > 0.0 && prior.blobs.radius_min <= prior.blobs.radius_max)) {
      throw ConfigError("prior.radius_min", "need 0 < radius_min <= radius_max");
    }
  } else if (prior.path.empty()) {
    throw ConfigError("prior.path", "required for json and empirical priors");
  }
  if (prior.kind == PriorSource::Kind::empirical && !(prior.variance >= 0.0)) {
    throw ConfigError("prior.variance", "must be >= 0");
  }
  if (diffusion.steps < 1) throw ConfigError("diffusion.steps", "must be >= 1");
  if (!(diffusion.beta_min > 0.0 && diffusion.beta_min <= diffusion.beta_max && diffusion.beta_max < 1.0)) {
    throw ConfigError("diffusion.beta_min", "need 0 < beta_min <= beta_max < 1");
  }
  if (!(diffusion.guidance.zeta >= 0.0) || !std::isfinite(diffusion.guidance.zeta)) {
    throw ConfigError("diffusion.zeta", "must be finite and >= 0");
  }
  if (n_particles < 2) throw ConfigError("belief.n_particles", "must be >= 2");
  if (!(belief.sigma_x2 > 0.0)) throw ConfigError("belief.sigma_x2", "must be > 0");
  if (!belief.weights.empty()) {
    try {
      belief.validate(n_particles);
    } catch (const InvalidArgument& e) {
      throw ConfigError("belief.weights", e.what());
    }
  }
  if (budget < 1) throw ConfigError("budget", "must be >= 1");
  if (budget > diffusion.steps) {
    throw ConfigError("budget", "exceeds diffusion.steps (" + std::to_string(diffusion.steps) + ")");
  }
  policy.validate();
  if (reward.epochs < 0) throw ConfigError("reward.epochs", "must be >= 0");
  if (!(reward.lr >= 0.0)) throw ConfigError("reward.lr", "must be >= 0");
  for (std::size_t w : reward.hidden) {
    if (w == 0) throw ConfigError("reward.hidden", "widths must be positive");
  }
  if (seeds.empty()) throw ConfigError("seeds", "must list at least one seed");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw ConfigError("seeds", "seeds must be distinct");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text, const fs::path& base_dir) {
  return parse_config(parse_text(text), base_dir);
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  return from_json(read_file(path), path.parent_path());
}

std::string ExperimentConfig::to_json() const {
  json doc;
  doc["scene"] = {
      {"source", scene.kind == SceneSource::Kind::synthetic ? "synthetic" : "file"},
      {"rows", scene.rows},
      {"cols", scene.cols},
      {"block", scene.block},
      {"threshold", scene.rule.threshold},
      {"noise", {{"mu", scene.noise.mu}, {"sigma", scene.noise.sigma}}},
  };
  if (!scene.rule.component_labels.empty()) doc["scene"]["component_labels"] = scene.rule.component_labels;
  if (scene.kind == SceneSource::Kind::file) {
    doc["scene"]["path"] = scene.path.string();
    doc["scene"]["format"] = scene.format == GridFormat::csv ? "csv" : "pgm";
    const char* target = scene.target.kind == TargetSpec::Kind::threshold ? "threshold"
                         : scene.target.kind == TargetSpec::Kind::value   ? "value"
                                                                          : "sidecar";
    doc["scene"]["target"] = target;
  }
  switch (prior.kind) {
    case PriorSource::Kind::blobs:
      doc["prior"] = {{"kind", "blobs"},
                      {"components", prior.blobs.components},
                      {"blobs_per_component", prior.blobs.blobs_per_component},
                      {"radius_min", prior.blobs.radius_min},
                      {"radius_max", prior.blobs.radius_max},
                      {"background", prior.blobs.background},
                      {"peak", prior.blobs.peak},
                      {"variance", prior.blobs.variance},
                      {"seed", prior.blobs.seed}};
      break;
    case PriorSource::Kind::json:
      doc["prior"] = {{"kind", "json"}, {"path", prior.path.string()}};
      break;
    case PriorSource::Kind::empirical:
      doc["prior"] = {{"kind", "empirical"}, {"path", prior.path.string()}, {"variance", prior.variance}};
      break;
  }
  doc["diffusion"] = {
      {"steps", diffusion.steps},
      {"beta_min", diffusion.beta_min},
      {"beta_max", diffusion.beta_max},
      {"curve", diffusion.curve == BetaCurve::linear ? "linear" : "cosine"},
      {"posterior_noise", diffusion.posterior_noise == PosteriorNoise::posterior ? "posterior" : "zero"},
      {"zeta", diffusion.guidance.zeta},
      {"jacobian", diffusion.guidance.jacobian == JacobianMode::exact ? "exact" : "scaled-identity"},
  };
  doc["belief"] = {{"n_particles", n_particles}, {"sigma_x2", belief.sigma_x2}};
  if (!belief.weights.empty()) doc["belief"]["weights"] = belief.weights;
  doc["budget"] = budget;
  doc["policy"] = {
      {"kind", to_string(policy.kind)},
      {"alpha", policy.alpha},
      {"combine_mode", policy.combine_mode == CombineMode::exploit ? "exploit" : "likeli"},
      {"normalize", policy.normalize == Normalize::minmax ? "minmax" : "none"},
      {"tie_break", policy.tie_break == TieBreak::lowest_index ? "lowest_index" : "seeded_random"},
      {"ucb_c", policy.ucb_c},
      {"epsilon", policy.epsilon},
      {"arm_size", policy.arm_size},
  };
  if (policy.kappa_override) doc["policy"]["kappa_override"] = *policy.kappa_override;
  doc["reward"] = {{"preset", reward.deep_preset ? "deep" : "dense"},
                   {"hidden", reward.hidden},
                   {"slope", reward.slope},
                   {"epochs", reward.epochs},
                   {"lr", reward.lr}};
  doc["seeds"] = seeds;
  if (!output_dir.empty()) doc["output_dir"] = output_dir.string();
  return doc.dump(2);
}

std::vector<SuiteEntry> suite_from_json(const std::string& text, const fs::path& base_dir) {
  const json doc = parse_text(text);
  const ExperimentConfig base = parse_config(doc, base_dir);
  if (!doc.contains("suite")) return {{to_string(base.policy.kind), base}};
  const auto& suite = doc["suite"];
  check_keys(suite, "suite", {"policies", "budgets"});
  std::vector<int> budgets{base.budget};
  read(suite, "suite", "budgets", budgets);
  if (budgets.empty()) throw ConfigError("suite.budgets", "must not be empty");
  std::vector<std::pair<std::string, PolicyConfig>> policies;
  if (suite.contains("policies")) {
    const auto& list = suite["policies"];
    if (!list.is_array() || list.empty()) throw ConfigError("suite.policies", "expected a non-empty array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string prefix = "suite.policies[" + std::to_string(i) + "]";
      PolicyConfig p = base.policy;
      p.kappa_override.reset();
      parse_policy(list[i], p, prefix, true);
      std::string label = to_string(p.kind);
      read(list[i], prefix, "label", label);
      try {
        p.validate();
      } catch (const ConfigError& e) {
        throw ConfigError(prefix, e.what());
      }
      policies.emplace_back(label, p);
    }
  } else {
    policies.emplace_back(to_string(base.policy.kind), base.policy);
  }
  std::set<std::string> labels;
  for (const auto& [label, p] : policies) {
    if (!labels.insert(label).second) throw ConfigError("suite.policies", "duplicate label '" + label + "'");
  }
  std::vector<SuiteEntry> entries;
  for (const auto& [label, p] : policies) {
    for (int b : budgets) {
      ExperimentConfig cfg = base;
      cfg.policy = p;
      cfg.budget = b;
      try {
        cfg.validate();
      } catch (const ConfigError& e) {
        throw ConfigError("suite.budgets", e.what());
      }
      entries.push_back({label, std::move(cfg)});
    }
  }
  return entries;
}

std::vector<SuiteEntry> load_suite(const fs::path& path) {
  return suite_from_json(read_file(path), path.parent_path());
}

}  // namespace diffatd

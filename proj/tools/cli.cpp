#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "diffatd/bench.hpp"
#include "diffatd/config.hpp"
#include "diffatd/errors.hpp"
#include "diffatd/format.hpp"
#include "diffatd/validation.hpp"

namespace diffatd {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 1;
  std::optional<std::string> policy;
  std::optional<int> budget;
  std::string trace;
  int step = 1;
};

ExperimentConfig load_config(const Options& opt) {
  ExperimentConfig cfg = opt.config.empty() ? ExperimentConfig{} : ExperimentConfig::load(opt.config);
  if (opt.policy) cfg.policy.kind = policy_kind_from_string(*opt.policy);
  if (opt.budget) cfg.budget = *opt.budget;
  if (opt.seed) cfg.seeds = {*opt.seed};
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const std::string& path, const char* flag) {
  if (path.empty()) throw ConfigError(flag, "an output path is required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  return out;
}

int cmd_gen_scene(const Options& opt, std::ostream& err) {
  if (opt.out.empty()) throw ConfigError("--out", "an output path is required");
  const Experiment exp(load_config(opt));
  const auto seed = exp.config().seeds.front();
  const Scene scene = exp.scene(seed);
  save_scene_csv(scene, opt.out);
  err << "scene " << scene.rows() << "x" << scene.cols() << " seed " << seed << ": U = "
      << scene.target_location_count() << " of " << scene.location_count() << " locations\n";
  return 0;
}

int cmd_run(const Options& opt, std::ostream& err) {
  if (opt.out.empty() && opt.trace.empty()) {
    throw ConfigError("--out", "give --out and/or --trace");
  }
  const Experiment exp(load_config(opt));
  const auto seed = exp.config().seeds.front();
  err << "running " << to_string(exp.config().policy.kind) << " seed " << seed << " budget "
      << exp.config().budget << "\n";
  const EpisodeResult r = exp.run(seed, [&err](const StepRecord& rec, const ScoreField*) {
    err << "  t=" << rec.t << " tau=" << rec.tau << " location=" << rec.location
        << " y=" << fmt_real(rec.y) << "\n";
  });
  if (!opt.out.empty()) {
    auto out = open_output(opt.out, "--out");
    out << "seed,policy,B,U,R,SR_term\n"
        << seed << ',' << to_string(exp.config().policy.kind) << ',' << r.budget << ','
        << r.target_locations << ',' << fmt_real(r.total_reward) << ',' << fmt_real(r.sr_term())
        << '\n';
  }
  if (!opt.trace.empty()) {
    auto out = open_output(opt.trace, "--trace");
    write_trace_csv(r, out);
  }
  err << "R = " << fmt_real(r.total_reward) << ", SR term = " << fmt_real(r.sr_term()) << " ("
      << r.wall_seconds << " s)\n";
  return 0;
}

int cmd_suite(const Options& opt, std::ostream& err) {
  if (opt.out.empty()) throw ConfigError("--out", "an output path is required");
  std::vector<SuiteEntry> entries =
      opt.config.empty() ? std::vector<SuiteEntry>{{"diffatd", ExperimentConfig{}}}
                         : load_suite(opt.config);
  if (opt.policy) {
    std::erase_if(entries, [&](const SuiteEntry& e) { return e.label != *opt.policy; });
    if (entries.empty()) throw ConfigError("--policy", "no suite entry is labeled " + *opt.policy);
  }
  for (auto& e : entries) {
    if (opt.budget) e.config.budget = *opt.budget;
    if (opt.seed) e.config.seeds = {*opt.seed};
    e.config.validate();
  }
  if (opt.budget) {
    // Entries that differed only in budget now coincide.
    std::vector<SuiteEntry> unique;
    for (auto& e : entries) {
      const bool seen = std::any_of(unique.begin(), unique.end(),
                                    [&](const SuiteEntry& u) { return u.label == e.label; });
      if (!seen) unique.push_back(std::move(e));
    }
    entries = std::move(unique);
  }
  std::size_t episodes = 0;
  for (const auto& e : entries) episodes += e.config.seeds.size();
  err << "suite: " << entries.size() << " configurations, " << episodes << " episodes, "
      << opt.jobs << " jobs\n";
  const SuiteReport report = run_suite(entries, opt.jobs);
  auto out = open_output(opt.out, "--out");
  write_suite_csv(report, out);
  for (const auto& row : report.rows) {
    err << "  " << row.policy << " B=" << row.budget << ": SR " << fmt_real(row.mean_sr) << " +- "
        << fmt_real(row.std_sr) << " over " << row.n_seeds << " seeds\n";
  }
  if (!opt.trace.empty()) {
    // One trace per episode, re-run serially so the files do not depend on jobs.
    fs::create_directories(opt.trace);
    for (const auto& e : entries) {
      const Experiment exp(e.config);
      for (auto seed : e.config.seeds) {
        std::ofstream t(fs::path(opt.trace) / (e.label + "_B" + std::to_string(e.config.budget) +
                                               "_seed" + std::to_string(seed) + ".csv"),
                        std::ios::binary);
        write_trace_csv(exp.run(seed), t);
      }
    }
  }
  for (const auto& f : report.failures) {
    err << "failed: " << f.policy << " B=" << f.budget << " seed " << f.seed << ": " << f.message
        << "\n";
  }
  return report.failures.empty() ? 0 : 2;
}

int cmd_scores(const Options& opt, std::ostream& err) {
  if (opt.out.empty()) throw ConfigError("--out", "an output path is required");
  const Experiment exp(load_config(opt));
  if (!exp.config().policy.uses_belief()) {
    throw ConfigError("policy.kind", to_string(exp.config().policy.kind) +
                                         " does not compute a score field");
  }
  if (opt.step < 1 || opt.step > exp.config().budget) {
    throw ConfigError("--step", "must lie in [1, budget]");
  }
  std::optional<ScoreField> captured;
  const auto seed = exp.config().seeds.front();
  exp.run(seed, [&](const StepRecord& rec, const ScoreField* field) {
    if (rec.t == opt.step && field) captured = *field;
  });
  if (!captured) throw RuntimeFailure("episode ended before measurement " + std::to_string(opt.step));
  auto out = open_output(opt.out, "--out");
  captured->write_csv(out);
  err << "score field of measurement " << opt.step << " over " << captured->size()
      << " candidates written to " << opt.out << "\n";
  return 0;
}

int cmd_validate(const Options& opt, std::ostream& err) {
  if (!opt.config.empty()) load_config(opt);  // checks the config parses
  const auto results = run_validation_suites();
  std::ostringstream lines;
  bool ok = true;
  for (const auto& r : results) {
    lines << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " (" << r.seconds
          << " s)\n";
    ok = ok && r.passed;
  }
  err << lines.str();
  if (!opt.out.empty()) {
    auto out = open_output(opt.out, "--out");
    out << lines.str();
  }
  return ok ? 0 : 2;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& err) {
  CLI::App app{"Active target discovery with diffusion-guided belief tracking", "diffatd"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "experiment config (JSON)");
    sub->add_option("--seed", opt.seed, "seed (overrides the config's seed list)");
    sub->add_option("--out", opt.out, "output file");
  };
  auto add_overrides = [&opt](CLI::App* sub) {
    sub->add_option("--policy", opt.policy,
                    "diffatd | random | max_ent | greedy_adaptive | ucb | eps_greedy");
    sub->add_option("--budget", opt.budget, "measurement budget B");
  };

  auto* gen = app.add_subcommand("gen-scene", "sample a synthetic scene to CSV");
  add_common(gen);
  auto* run = app.add_subcommand("run", "run one episode");
  add_common(run);
  add_overrides(run);
  run->add_option("--trace", opt.trace, "per-step trace CSV");
  auto* suite = app.add_subcommand("suite", "run a policies x budgets x seeds matrix");
  add_common(suite);
  add_overrides(suite);
  suite->add_option("--jobs", opt.jobs, "parallel episodes")->check(CLI::PositiveNumber);
  suite->add_option("--trace", opt.trace, "directory for per-episode trace CSVs");
  auto* scores = app.add_subcommand("scores", "dump the score field of one measurement");
  add_common(scores);
  add_overrides(scores);
  scores->add_option("--step", opt.step, "1-based measurement index");
  auto* validate = app.add_subcommand("validate", "run the oracle self-checks");
  validate->add_option("--config", opt.config, "config to check for parse errors");
  validate->add_option("--out", opt.out, "report file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, err, err) == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_scene(opt, err);
    if (run->parsed()) return cmd_run(opt, err);
    if (suite->parsed()) return cmd_suite(opt, err);
    if (scores->parsed()) return cmd_scores(opt, err);
    return cmd_validate(opt, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace diffatd

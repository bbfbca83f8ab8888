#include "diffatd/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "diffatd/errors.hpp"
#include "diffatd/format.hpp"

namespace diffatd {

double EpisodeResult::sr_term() const {
  const std::size_t denom = std::min<std::size_t>(static_cast<std::size_t>(budget), target_locations);
  if (denom == 0) return 0.0;
  return total_reward / static_cast<double>(denom);
}

double success_rate(std::span<const EpisodeResult> results) {
  if (results.empty()) throw InvalidArgument("success_rate needs at least one episode");
  // Episodes sharing min{B, U} are summed before dividing, so a single
  // normalizer costs one rounding.
  std::map<std::size_t, double> reward_by_norm;
  for (const auto& r : results) {
    const auto norm = std::min(static_cast<std::size_t>(r.budget), r.target_locations);
    if (norm > 0) reward_by_norm[norm] += r.total_reward;
  }
  const double tasks = static_cast<double>(results.size());
  double s = 0.0;
  for (const auto& [norm, reward] : reward_by_norm) s += reward / (tasks * static_cast<double>(norm));
  return s;
}

void write_trace_csv(const EpisodeResult& result, std::ostream& out) {
  out << "t,tau,location,expl,likeli,reward,exploit,combined,y,entropy\n";
  for (const auto& s : result.steps) {
    out << s.t << ',' << s.tau << ',' << s.location << ',' << fmt_real(s.expl) << ','
        << fmt_real(s.likeli) << ',' << fmt_real(s.reward) << ',' << fmt_real(s.exploit) << ','
        << fmt_real(s.combined) << ',' << fmt_real(s.y) << ',' << fmt_real(s.entropy) << '\n';
  }
}

SuiteReport run_suite(std::span<const SuiteEntry> entries, unsigned jobs) {
  if (entries.empty()) throw InvalidArgument("suite needs at least one configuration");
  std::vector<std::unique_ptr<Experiment>> experiments;
  experiments.reserve(entries.size());
  for (const auto& e : entries) experiments.push_back(std::make_unique<Experiment>(e.config));

  struct Task {
    std::size_t entry;
    std::size_t seed_index;
  };
  std::vector<Task> tasks;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    for (std::size_t s = 0; s < entries[e].config.seeds.size(); ++s) tasks.push_back({e, s});
  }
  std::vector<std::optional<EpisodeResult>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const auto& task = tasks[k];
      const auto seed = entries[task.entry].config.seeds[task.seed_index];
      try {
        results[k] = experiments[task.entry]->run(seed);
      } catch (const std::exception& ex) {
        errors[k] = ex.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  SuiteReport report;
  std::map<std::pair<std::string, int>, SuiteRow> rows;
  std::map<std::pair<std::string, int>, double> runtime;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& entry = entries[tasks[k].entry];
    const auto key = std::make_pair(entry.label, entry.config.budget);
    auto& row = rows[key];
    row.policy = entry.label;
    row.budget = entry.config.budget;
    if (!results[k]) {
      report.failures.push_back({entry.label, entry.config.budget,
                                 entry.config.seeds[tasks[k].seed_index], errors[k]});
      continue;
    }
    row.sr_terms.push_back(results[k]->sr_term());
    runtime[key] += results[k]->wall_seconds;
  }
  for (auto& [key, row] : rows) {
    row.n_seeds = row.sr_terms.size();
    if (row.n_seeds == 0) continue;
    double sum = 0.0;
    for (double v : row.sr_terms) sum += v;
    row.mean_sr = sum / static_cast<double>(row.n_seeds);
    double sq = 0.0;
    for (double v : row.sr_terms) sq += (v - row.mean_sr) * (v - row.mean_sr);
    row.std_sr = row.n_seeds > 1 ? std::sqrt(sq / static_cast<double>(row.n_seeds - 1)) : 0.0;
    row.mean_runtime = runtime[key] / static_cast<double>(row.n_seeds);
    report.rows.push_back(row);
  }
  return report;
}

void write_suite_csv(const SuiteReport& report, std::ostream& out) {
  out << "policy,B,mean_SR,std_SR,n_seeds,mean_runtime\n";
  for (const auto& r : report.rows) {
    out << r.policy << ',' << r.budget << ',' << fmt_real(r.mean_sr) << ',' << fmt_real(r.std_sr)
        << ',' << r.n_seeds << ',' << fmt_real(r.mean_runtime) << '\n';
  }
}

}  // namespace diffatd

#include "diffatd/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "diffatd/errors.hpp"

namespace diffatd {

void PolicyConfig::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("policy.alpha", "must be > 0");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("policy.epsilon", "must lie in [0, 1]");
  if (!(ucb_c >= 0.0) || !std::isfinite(ucb_c)) throw ConfigError("policy.ucb_c", "must be >= 0");
  if (arm_size == 0) throw ConfigError("policy.arm_size", "must be >= 1");
  if (kappa_override && !(*kappa_override >= 0.0 && *kappa_override <= 1.0)) {
    throw ConfigError("policy.kappa_override", "must lie in [0, 1]");
  }
}

bool PolicyConfig::uses_belief() const noexcept {
  return kind == PolicyKind::diffatd || kind == PolicyKind::max_ent ||
         kind == PolicyKind::greedy_adaptive;
}

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::diffatd: return "diffatd";
    case PolicyKind::random: return "random";
    case PolicyKind::max_ent: return "max_ent";
    case PolicyKind::greedy_adaptive: return "greedy_adaptive";
    case PolicyKind::ucb: return "ucb";
    case PolicyKind::eps_greedy: return "eps_greedy";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  for (auto k : {PolicyKind::diffatd, PolicyKind::random, PolicyKind::max_ent,
                 PolicyKind::greedy_adaptive, PolicyKind::ucb, PolicyKind::eps_greedy}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("policy.kind", "unknown policy '" + name + "'");
}

double kappa(int budget, int t, double alpha) {
  if (budget < 1) throw InvalidRange("kappa: budget must be >= 1");
  if (t < 0 || t > budget) throw InvalidRange("kappa: steps taken must lie in [0, budget]");
  if (!(alpha > 0.0)) throw InvalidRange("kappa: alpha must be > 0");
  const double scaled = alpha * budget;
  return std::max(0.0, (scaled - t) / (scaled + t));
}

namespace {

std::vector<double> minmax(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - *lo) / range;
  return out;
}

}  // namespace

const std::vector<double>& combined_score(ScoreField& field, double kappa_value, CombineMode mode,
                                          Normalize normalize) {
  if (field.size() == 0) throw ExhaustedCandidates();
  const auto& second = mode == CombineMode::exploit ? field.exploitation : field.likelihood;
  std::vector<double> a = field.exploration;
  std::vector<double> b = second;
  if (normalize == Normalize::minmax) {
    a = minmax(a);
    b = minmax(b);
  }
  field.combined.resize(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    field.combined[k] = kappa_value * a[k] + (1.0 - kappa_value) * b[k];
  }
  return field.combined;
}

std::vector<int> build_measurement_schedule(int steps, int budget) {
  if (steps < 1) throw InvalidRange("measurement schedule: steps must be >= 1");
  if (budget < 1) throw InvalidRange("measurement schedule: budget must be >= 1");
  if (budget > steps) {
    throw InvalidRange("measurement schedule: budget " + std::to_string(budget) +
                       " exceeds the " + std::to_string(steps) + " reverse steps");
  }
  std::vector<int> taus;
  taus.reserve(static_cast<std::size_t>(budget));
  const long long T = steps;
  for (long long j = 1; j <= budget; ++j) {
    const long long done = (T * j + budget - 1) / budget;  // ceil(T j / B)
    taus.push_back(static_cast<int>(T - done + 1));
  }
  return taus;
}

EpisodeState::EpisodeState(int budget, std::size_t location_count) : budget_(budget) {
  if (budget < 1) throw InvalidRange("episode budget must be >= 1");
  candidates_.resize(location_count);
  std::iota(candidates_.begin(), candidates_.end(), std::size_t{0});
}

bool EpisodeState::is_candidate(std::size_t location) const {
  return std::binary_search(candidates_.begin(), candidates_.end(), location);
}

void EpisodeState::record(std::size_t location, double y) {
  if (remaining() <= 0) throw ExhaustedCandidates();
  const auto it = std::lower_bound(candidates_.begin(), candidates_.end(), location);
  if (it == candidates_.end() || *it != location) throw RepeatMeasurement(location);
  candidates_.erase(it);
  history_.push_back(location);
  rewards_.push_back(y);
  reward_ += y;
}

std::size_t argmax(const std::vector<double>& values, TieBreak tie, RandomStream& rng) {
  if (values.empty()) throw ExhaustedCandidates();
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  if (tie == TieBreak::lowest_index) return best;
  std::vector<std::size_t> tied;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] == values[best]) tied.push_back(k);
  }
  return tied.size() == 1 ? tied.front() : tied[rng.index(tied.size())];
}

namespace {

struct ArmStats {
  std::vector<double> sum;
  std::vector<int> pulls;
};

std::size_t arm_of(const LocationGrid& layout, std::size_t location, std::size_t arm_size,
                   std::size_t arm_cols) {
  const std::size_t lr = location / layout.location_cols();
  const std::size_t lc = location % layout.location_cols();
  return (lr / arm_size) * arm_cols + lc / arm_size;
}

// Arm means default to an optimistic 1.0 before the arm is first pulled.
std::vector<double> bandit_values(const PolicyConfig& policy, const EpisodeState& state,
                                  const LocationGrid& layout, bool with_bonus) {
  const std::size_t arm_cols = (layout.location_cols() + policy.arm_size - 1) / policy.arm_size;
  const std::size_t arm_rows = (layout.location_rows() + policy.arm_size - 1) / policy.arm_size;
  ArmStats stats{std::vector<double>(arm_rows * arm_cols, 0.0), std::vector<int>(arm_rows * arm_cols, 0)};
  for (std::size_t s = 0; s < state.history().size(); ++s) {
    const std::size_t a = arm_of(layout, state.history()[s], policy.arm_size, arm_cols);
    stats.sum[a] += state.rewards()[s];
    stats.pulls[a] += 1;
  }
  const double log_t = std::log(static_cast<double>(state.taken()) + 1.0);
  std::vector<double> values;
  values.reserve(state.candidates().size());
  for (std::size_t q : state.candidates()) {
    const std::size_t a = arm_of(layout, q, policy.arm_size, arm_cols);
    const double n = stats.pulls[a];
    double v = n > 0 ? stats.sum[a] / n : 1.0;
    if (with_bonus) v += policy.ucb_c * std::sqrt(log_t / (n + 1.0));
    values.push_back(v);
  }
  return values;
}

}  // namespace

Selection select(const PolicyConfig& policy, const EpisodeState& state,
                 const SelectionContext& ctx, RandomStream& rng) {
  if (state.candidates().empty() || state.remaining() <= 0) throw ExhaustedCandidates();
  const auto& cands = state.candidates();
  Selection sel;
  sel.kappa = policy.kappa_override.value_or(kappa(state.budget(), state.taken(), policy.alpha));

  auto need_layout = [&]() -> const LocationGrid& {
    if (!ctx.layout) throw InvalidArgument(to_string(policy.kind) + " policy needs the location layout");
    return *ctx.layout;
  };

  switch (policy.kind) {
    case PolicyKind::random:
      sel.location = cands[rng.index(cands.size())];
      return sel;
    case PolicyKind::ucb: {
      const auto values = bandit_values(policy, state, need_layout(), true);
      sel.location = cands[argmax(values, policy.tie_break, rng)];
      return sel;
    }
    case PolicyKind::eps_greedy: {
      if (rng.uniform() < policy.epsilon) {
        sel.location = cands[rng.index(cands.size())];
        return sel;
      }
      const auto values = bandit_values(policy, state, need_layout(), false);
      sel.location = cands[argmax(values, policy.tie_break, rng)];
      return sel;
    }
    case PolicyKind::diffatd:
    case PolicyKind::max_ent:
    case PolicyKind::greedy_adaptive:
      break;
  }

  if (!ctx.batch) throw InvalidArgument(to_string(policy.kind) + " policy needs a particle batch");
  const RewardFn& reward = ctx.reward;
  if (policy.kind != PolicyKind::max_ent && !reward) {
    throw InvalidArgument(to_string(policy.kind) + " policy needs a reward model");
  }
  ScoreField field = compute_score_field(*ctx.batch, need_layout(), cands, ctx.belief, reward);
  std::size_t row = 0;
  switch (policy.kind) {
    case PolicyKind::max_ent:
      row = argmax(field.exploration, policy.tie_break, rng);
      combined_score(field, 1.0, policy.combine_mode, policy.normalize);
      break;
    case PolicyKind::greedy_adaptive:
      row = argmax(field.exploitation, policy.tie_break, rng);
      combined_score(field, 0.0, policy.combine_mode, policy.normalize);
      break;
    default:
      row = argmax(combined_score(field, sel.kappa, policy.combine_mode, policy.normalize),
                   policy.tie_break, rng);
      break;
  }
  sel.location = field.locations[row];
  sel.field_index = row;
  sel.field = std::move(field);
  return sel;
}

}  // namespace diffatd

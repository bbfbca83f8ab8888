#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "diffatd/belief.hpp"
#include "diffatd/grid.hpp"
#include "diffatd/rng.hpp"

namespace diffatd {

enum class PolicyKind { diffatd, random, max_ent, greedy_adaptive, ucb, eps_greedy };
enum class CombineMode { exploit, likeli };
enum class Normalize { minmax, none };
enum class TieBreak { lowest_index, seeded_random };

struct PolicyConfig {
  PolicyKind kind = PolicyKind::diffatd;
  double alpha = 1.0;  ///< kappa schedule scaling
  CombineMode combine_mode = CombineMode::exploit;
  Normalize normalize = Normalize::minmax;
  TieBreak tie_break = TieBreak::lowest_index;
  double ucb_c = 1.4142135623730951;
  double epsilon = 0.1;
  std::size_t arm_size = 4;  ///< bandit arms are arm_size x arm_size tiles of locations
  std::optional<double> kappa_override;

  void validate() const;
  /// True for policies that score candidates from the particle belief. These
  /// also keep the online reward model, so their traces share columns.
  bool uses_belief() const noexcept;
};

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

/// max{0, (alpha B - t) / (alpha B + t)}.
double kappa(int budget, int t, double alpha = 1.0);

/// kappa * norm(expl) + (1 - kappa) * norm(exploit or likeli), written into
/// field.combined and returned. minmax maps each column onto [0, 1] over the
/// candidates (a constant column becomes 0). Throws ExhaustedCandidates on an
/// empty field.
const std::vector<double>& combined_score(ScoreField& field, double kappa_value,
                                          CombineMode mode = CombineMode::exploit,
                                          Normalize normalize = Normalize::minmax);

/// Reverse steps (descending tau) at which measurements happen: the j-th of
/// `budget` measurements follows ceil(T j / B) reverse steps.
/// Throws InvalidRange unless 1 <= budget <= steps.
std::vector<int> build_measurement_schedule(int steps, int budget);

/// Budget bookkeeping for one episode.
class EpisodeState {
 public:
  EpisodeState(int budget, std::size_t location_count);

  int budget() const noexcept { return budget_; }
  int taken() const noexcept { return static_cast<int>(history_.size()); }
  int remaining() const noexcept { return budget_ - taken(); }
  double cumulative_reward() const noexcept { return reward_; }
  const std::vector<std::size_t>& candidates() const noexcept { return candidates_; }
  const std::vector<std::size_t>& history() const noexcept { return history_; }
  const std::vector<double>& rewards() const noexcept { return rewards_; }
  bool is_candidate(std::size_t location) const;

  /// Records a measurement and removes the location from the candidates.
  void record(std::size_t location, double y);

 private:
  int budget_;
  std::vector<std::size_t> candidates_;  // ascending
  std::vector<std::size_t> history_;
  std::vector<double> rewards_;
  double reward_ = 0.0;
};

/// Everything a policy may look at. Pointers may be null for policies that
/// do not need them.
struct SelectionContext {
  const LocationGrid* layout = nullptr;
  const ParticleBatch* batch = nullptr;
  BeliefConfig belief;
  RewardFn reward;
};

struct Selection {
  std::size_t location = 0;
  double kappa = 0.0;
  std::optional<ScoreField> field;
  std::size_t field_index = 0;  ///< row of `location` in field
};

/// Picks the next location. Throws ExhaustedCandidates when nothing remains
/// or the budget is spent.
Selection select(const PolicyConfig& policy, const EpisodeState& state,
                 const SelectionContext& ctx, RandomStream& rng);

/// Index of the maximum; ties resolved by `tie` (lowest index or a uniform
/// draw among the tied set).
std::size_t argmax(const std::vector<double>& values, TieBreak tie, RandomStream& rng);

}  // namespace diffatd

#pragma once

#include "thumper/core.hpp"
#include "thumper/neighbors.hpp"
#include "thumper/simulator.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace thumper {

inline constexpr std::size_t kDefaultRolloutCap = 50;

struct RandomPolicy {};

struct GreedyPolicy {
    std::shared_ptr<const NeighborModel> model;
    std::size_t min_support = kDefaultMinSupport;
};

struct Mpc2Policy {
    std::shared_ptr<const NeighborModel> model;
    std::size_t rollout_cap = kDefaultRolloutCap;
    std::size_t min_support = kDefaultMinSupport;
};

using PolicyKind = std::variant<RandomPolicy, GreedyPolicy, Mpc2Policy>;

std::string policy_name(const PolicyKind& p);

/// Per-solenoid estimates; nullopt where the neighborhood is below the support threshold.
using SolenoidEstimates = std::array<std::optional<SuccessEstimate>, kNumSolenoids>;
/// Per-solenoid two-step scores; nullopt where the first step abstains.
using SolenoidScores = std::array<std::optional<double>, kNumSolenoids>;

Action decide_random(const DieState& state, const GoalSpec& goal, Rng& rng);

SolenoidEstimates greedy_estimates(const NeighborModel& model, const DieState& state,
                                   const GoalSpec& goal, std::size_t min_support = kDefaultMinSupport);

/// Fires the solenoid with the highest estimated success probability; exact
/// ties are broken uniformly at random. Falls back to a random action when
/// every solenoid abstains.
Action decide_greedy(const DieState& state, const GoalSpec& goal, const NeighborModel& model, Rng& rng,
                     std::size_t min_support = kDefaultMinSupport);

/// Two-step score of each first impulse:
///   V(u1) = p1 + (1 - p1) * mean over failed successors q' of max_u2 p(q', u2)
/// where the successors are the failing neighbors' logged outcomes (at most
/// `rollout_cap`, subsampled uniformly) and an abstaining second step counts as 0.
SolenoidScores mpc2_scores(const NeighborModel& model, const DieState& state, const GoalSpec& goal, Rng& rng,
                           std::size_t rollout_cap = kDefaultRolloutCap,
                           std::size_t min_support = kDefaultMinSupport);

Action decide_mpc2(const DieState& state, const GoalSpec& goal, const NeighborModel& model, Rng& rng,
                   std::size_t rollout_cap = kDefaultRolloutCap, std::size_t min_support = kDefaultMinSupport);

Action decide(const PolicyKind& policy, const DieState& state, const GoalSpec& goal, Rng& rng);

/// Success chance of an ideally thrown die landing on a requested face.
constexpr double ideal_throw_prob() noexcept { return 1.0 / 6.0; }

/// Chance that at least one of `throws` ideal throws lands on the face.
double ideal_throw_cumulative(int throws) noexcept;

}  // namespace thumper

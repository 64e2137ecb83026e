#include "thumper/policy.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <vector>

namespace thumper {

namespace {

// a < b on successes/support, exactly.
bool less_probable(const SuccessEstimate& a, const SuccessEstimate& b) noexcept
{
    return a.successes * b.support < b.successes * a.support;
}

bool same_probability(const SuccessEstimate& a, const SuccessEstimate& b) noexcept
{
    return a.successes * b.support == b.successes * a.support;
}

int pick_uniform(const std::vector<int>& candidates, Rng& rng)
{
    if (candidates.size() == 1)
        return candidates.front();
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    return candidates[pick(rng)];
}

}  // namespace

std::string policy_name(const PolicyKind& p)
{
    switch (p.index()) {
        case 0: return "random";
        case 1: return "greedy";
        default: return "mpc2";
    }
}

Action decide_random(const DieState&, const GoalSpec&, Rng& rng) { return random_action(rng); }

SolenoidEstimates greedy_estimates(const NeighborModel& model, const DieState& state, const GoalSpec& goal,
                                   std::size_t min_support)
{
    SolenoidEstimates out;
    for (int s = 0; s < kNumSolenoids; ++s) {
        const SuccessEstimate e = model.success_prob(state, s, goal);
        if (!e.abstains() && e.support >= min_support)
            out[s] = e;
    }
    return out;
}

Action decide_greedy(const DieState& state, const GoalSpec& goal, const NeighborModel& model, Rng& rng,
                     std::size_t min_support)
{
    const SolenoidEstimates est = greedy_estimates(model, state, goal, min_support);
    std::vector<int> best;
    for (int s = 0; s < kNumSolenoids; ++s) {
        if (!est[s])
            continue;
        if (best.empty() || less_probable(*est[best.front()], *est[s]))
            best.assign(1, s);
        else if (same_probability(*est[best.front()], *est[s]))
            best.push_back(s);
    }
    if (best.empty())
        return decide_random(state, goal, rng);
    const int chosen = pick_uniform(best, rng);
    return Action{chosen, model.select_duration(state, chosen, goal)};
}

SolenoidScores mpc2_scores(const NeighborModel& model, const DieState& state, const GoalSpec& goal, Rng& rng,
                           std::size_t rollout_cap, std::size_t min_support)
{
    if (rollout_cap < 1)
        throw std::invalid_argument("rollout cap must be at least 1");
    SolenoidScores out;
    const auto& trials = model.trials();
    for (int s = 0; s < kNumSolenoids; ++s) {
        const auto hood = model.neighborhood(state, s);
        if (hood.empty() || hood.size() < min_support)
            continue;
        std::vector<std::uint32_t> failed;
        for (auto idx : hood)
            if (!trial_meets(goal, trials[idx]))
                failed.push_back(idx);
        const double p1 = 1.0 - static_cast<double>(failed.size()) / static_cast<double>(hood.size());
        if (failed.size() > rollout_cap) {
            std::vector<std::uint32_t> kept;
            kept.reserve(rollout_cap);
            std::sample(failed.begin(), failed.end(), std::back_inserter(kept), rollout_cap, rng);
            failed = std::move(kept);
        }
        double second = 0.0;
        for (auto idx : failed) {
            const SolenoidEstimates next = greedy_estimates(model, trials[idx].after, goal, min_support);
            double best = 0.0;
            for (const auto& e : next)
                if (e)
                    best = std::max(best, *e->probability());
            second += best;
        }
        out[s] = failed.empty() ? p1 : p1 + (1.0 - p1) * second / static_cast<double>(failed.size());
    }
    return out;
}

Action decide_mpc2(const DieState& state, const GoalSpec& goal, const NeighborModel& model, Rng& rng,
                   std::size_t rollout_cap, std::size_t min_support)
{
    const SolenoidScores v = mpc2_scores(model, state, goal, rng, rollout_cap, min_support);
    std::vector<int> best;
    for (int s = 0; s < kNumSolenoids; ++s) {
        if (!v[s])
            continue;
        if (best.empty() || *v[best.front()] < *v[s])
            best.assign(1, s);
        else if (*v[best.front()] == *v[s])
            best.push_back(s);
    }
    if (best.empty())
        return decide_random(state, goal, rng);
    const int chosen = pick_uniform(best, rng);
    return Action{chosen, model.select_duration(state, chosen, goal)};
}

Action decide(const PolicyKind& policy, const DieState& state, const GoalSpec& goal, Rng& rng)
{
    if (const auto* g = std::get_if<GreedyPolicy>(&policy))
        return decide_greedy(state, goal, *g->model, rng, g->min_support);
    if (const auto* m = std::get_if<Mpc2Policy>(&policy))
        return decide_mpc2(state, goal, *m->model, rng, m->rollout_cap, m->min_support);
    return decide_random(state, goal, rng);
}

double ideal_throw_cumulative(int throws) noexcept
{
    return 1.0 - std::pow(1.0 - ideal_throw_prob(), throws);
}

}  // namespace thumper

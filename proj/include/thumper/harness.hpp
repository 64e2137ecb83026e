#pragma once

#include "thumper/core.hpp"
#include "thumper/policy.hpp"
#include "thumper/simulator.hpp"
#include "thumper/trial_store.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace thumper {

/// Independent stream seed derived from a base seed (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// A plate in continuous operation: the simulated truth plus the last camera reading.
class Plate {
public:
    Plate(const PlateConfig& config, std::uint64_t seed);

    const Simulator& simulator() const noexcept { return sim_; }
    SimState& state() noexcept { return state_; }
    /// Last reading; nullopt while a leaner awaits recovery.
    const std::optional<DieState>& observed() const noexcept { return observed_; }
    /// Observed state, re-reading the camera if the last reading was a leaner.
    const DieState& settle();

    Observation fire(const Action& a);

private:
    Simulator sim_;
    SimState state_;
    std::optional<DieState> observed_;
};

struct StepRecord {
    std::optional<DieState> observed;  // nullopt for a recovery impulse after a leaner
    Action action;
    Observation outcome;
    bool success = false;
};

struct EpisodeOptions {
    int max_impulses = 10;
    bool recovery_counts = true;
};

struct EpisodeResult {
    GoalSpec goal;
    std::optional<int> impulses_used;  // nullopt: goal not reached within the cap
    std::vector<StepRecord> steps;

    bool succeeded() const noexcept { return impulses_used.has_value(); }
};

/// Fires impulses until the goal is met or the cap is reached. A leaner is
/// followed by a random recovery impulse, which counts toward the cap unless
/// `recovery_counts` is false.
EpisodeResult run_episode(Plate& plate, const PolicyKind& policy, const GoalSpec& goal, Rng& rng,
                          const EpisodeOptions& options = {});

enum class Task { FaceChange, TargetFace };

std::string task_name(Task t);
Task parse_task(const std::string& name);

/// Face-change outcomes are judged against each trial's own starting face, so
/// that task pools neighbors across faces; reaching a named face depends on
/// where the die starts, so the target-face task keeps them apart.
Stratification default_stratification(Task t) noexcept;

struct Hyperparams {
    double r = 0.0;
    double w = 0.0;
};

/// Neighborhood size and heading weight used when none are configured.
Hyperparams default_hyperparams(Task t) noexcept;

struct CampaignOptions {
    Task task = Task::TargetFace;
    std::size_t n_goals = 2000;
    EpisodeOptions episode;
};

struct SolenoidCounts {
    std::size_t fired = 0;
    std::size_t succeeded = 0;
};

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    int solenoid = 0;
};

struct CampaignReport {
    std::string policy;
    Task task = Task::TargetFace;
    int max_impulses = 10;
    std::vector<EpisodeResult> episodes;
    /// cumulative_success[k - 1]: fraction of episodes finished within k impulses.
    std::vector<double> cumulative_success;
    std::array<SolenoidCounts, kNumSolenoids> per_solenoid{};
    std::vector<ScatterPoint> scatter;

    std::size_t total_impulses() const noexcept;
};

/// Consecutive goals on one plate whose state carries over. Target faces are
/// drawn uniformly among faces differing from both the previous goal and the
/// current face.
CampaignReport run_campaign(const PlateConfig& config, const PolicyKind& policy, const CampaignOptions& options,
                            std::uint64_t seed);

/// Aggregates episode records into the report fields.
CampaignReport summarize(std::string policy, Task task, int max_impulses, std::vector<EpisodeResult> episodes);

/// Everything the command-line tools read from a harness configuration file.
/// Unset neighborhood parameters fall back to the task defaults.
struct HarnessSettings {
    PlateConfig plate = default_config();
    Task task = Task::TargetFace;
    std::string policy = "greedy";
    std::optional<double> r;
    std::optional<double> w;
    AngleMode angle_mode = AngleMode::Wrapped;
    std::optional<Stratification> stratification;
    int max_impulses = 10;
    bool recovery_counts = true;
    std::size_t rollout_cap = kDefaultRolloutCap;
    std::size_t min_support = kDefaultMinSupport;
    std::size_t n_goals = 2000;
    std::uint64_t seed = 0;

    Hyperparams hyperparams() const noexcept;
    Stratification effective_stratification() const noexcept;
    /// Applies plate and harness keys; throws ConfigError naming the first bad key.
    void apply(const std::map<std::string, std::string>& kv);
};

HarnessSettings load_settings(const std::string& path);

/// Builds a policy by name ("random", "greedy", "mpc2"). The learned policies
/// need a model and throw std::invalid_argument without one.
PolicyKind make_policy(const std::string& kind, std::shared_ptr<const NeighborModel> model,
                       const HarnessSettings& settings);

struct FaceChangeRate {
    std::size_t fired = 0;
    std::size_t changed = 0;
    double rate() const noexcept { return fired == 0 ? 0.0 : static_cast<double>(changed) / fired; }
};

/// Per-solenoid face-change rates over the valid trials of a dataset.
std::array<FaceChangeRate, kNumSolenoids> face_change_rates(const Dataset& d);

// Delimited exports.
std::string episodes_csv(const CampaignReport& r);
std::string steps_csv(const CampaignReport& r);
/// Columns: impulse_count, then one cumulative probability column per report.
std::string curve_csv(const std::vector<CampaignReport>& reports);
std::string histogram_csv(const std::vector<CampaignReport>& reports);
std::string scatter_csv(const std::vector<CampaignReport>& reports);

/// Rebuilds a report from exported episode and step files.
CampaignReport parse_campaign(std::string_view episodes_text, std::string_view steps_text);

}  // namespace thumper

#pragma once

#include "thumper/core.hpp"
#include "thumper/trial_store.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace thumper {

enum class AngleMode { Wrapped, Raw };

/// Planar distance plus `w` millimeters per degree of heading difference.
struct ScalarizedMetric {
    double w = 5.0;
    AngleMode angle_mode = AngleMode::Wrapped;

    double angle_term(double theta_a, double theta_b) const noexcept;
    double operator()(const Pose& a, const Pose& b) const noexcept;
};

double distance(const ScalarizedMetric& m, const Pose& a, const Pose& b) noexcept;

/// Neighborhood vote: how many neighbors there were and how many met the goal.
struct SuccessEstimate {
    std::size_t successes = 0;
    std::size_t support = 0;

    bool abstains() const noexcept { return support == 0; }
    /// Undefined (nullopt) when the neighborhood is empty.
    std::optional<double> probability() const noexcept;
};

inline constexpr double kFallbackDurationMs = 16.5;
inline constexpr std::size_t kDefaultMinSupport = 3;

/// Whether neighborhoods only include trials that started on the query's face.
enum class Stratification { ByFace, Pooled };

/// Whether a logged trial's outcome meets the goal. Face-change goals are
/// judged against the trial's own starting face.
bool trial_meets(const GoalSpec& goal, const Trial& t) noexcept;

/// Radius-neighbor outcome model: valid trials split by fired solenoid (and
/// starting face unless pooled), each split indexed on a planar grid for
/// exact ball queries.
class NeighborModel {
public:
    NeighborModel(const Dataset& d, ScalarizedMetric metric, double radius,
                  Stratification stratification = Stratification::ByFace);

    const ScalarizedMetric& metric() const noexcept { return metric_; }
    double radius() const noexcept { return radius_; }
    Stratification stratification() const noexcept { return stratification_; }
    /// Valid trials in dataset order.
    const std::vector<Trial>& trials() const noexcept { return trials_; }
    std::size_t partition_size(int solenoid) const;
    /// Trials indexed for queries from `face` (all faces when pooled).
    std::size_t stratum_size(int solenoid, DieFace face) const;

    /// Indices into trials() of the ball members, ascending.
    std::vector<std::uint32_t> neighborhood(const DieState& state, int solenoid) const;

    SuccessEstimate success_prob(const DieState& state, int solenoid, const GoalSpec& goal) const;
    /// Mean duration of the successful neighbors, clamped to the band;
    /// kFallbackDurationMs when none succeeded.
    double select_duration(const DieState& state, int solenoid, const GoalSpec& goal) const;

private:
    struct Stratum {
        double origin_x = 0.0;
        double origin_y = 0.0;
        std::size_t nx = 1;
        std::size_t ny = 1;
        std::vector<std::uint32_t> cell_start;
        std::vector<std::uint32_t> items;
    };

    std::size_t stratum_key(int solenoid, DieFace face) const noexcept
    {
        const int f = stratification_ == Stratification::ByFace ? face.value() - 1 : 0;
        return static_cast<std::size_t>(solenoid) * 6 + f;
    }
    void index_stratum(Stratum& s, const std::vector<std::uint32_t>& members);

    ScalarizedMetric metric_;
    double radius_;
    Stratification stratification_;
    double cell_mm_;
    std::vector<Trial> trials_;
    std::array<Stratum, kNumSolenoids * 6> strata_;
};

/// Fraction of the k nearest same-solenoid, same-face valid trials whose
/// outcome meets the goal. Distance ties keep dataset order.
SuccessEstimate knn_success_prob(const Dataset& d, const ScalarizedMetric& m, const DieState& state,
                                 int solenoid, const GoalSpec& goal, std::size_t k);

}  // namespace thumper

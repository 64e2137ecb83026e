#pragma once

#include "thumper/core.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>

namespace thumper {

using Rng = std::mt19937_64;

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Parameters of the surrogate plate. Lengths in mm, angles in degrees.
struct PlateConfig {
    std::array<Point2, kNumSolenoids> solenoid_xy{};
    double corral_inradius = 90.0;
    double wall_restitution = 0.3;
    double center_authority_scale = 0.5;
    double roll_annulus_mean = 50.0;
    double roll_annulus_sd = 30.0;
    double direction_noise_sd = 20.0;
    double translation_scale = 15.0;
    double translation_decay = 40.0;
    double double_roll_prob = 0.2;
    double leaner_prob = 0.02;
    double obs_noise_xy = 0.5;
    double obs_noise_theta = 0.5;
    // Kernel constants with fixed defaults, exposed for completeness.
    double roll_prob_cap = 0.95;
    double translation_noise_sd = 2.0;
    double yaw_noise_sd = 5.0;
    double leaner_wall_band = 10.0;
    double roll_gain = 1.5;
    // Dice near a wall turn toward an edge-flush heading.
    double wall_align_band = 15.0;
    double wall_align_rate = 0.8;

    /// Throws std::invalid_argument when an invariant does not hold.
    void validate() const;

    /// Flat key/value form, one entry per field. Solenoids are `solenoid_<i>` = "x,y".
    std::map<std::string, std::string> to_key_values() const;
    /// Applies recognized keys on top of `*this`; returns the keys it did not recognize.
    std::vector<std::string> apply_key_values(const std::map<std::string, std::string>& kv);
    /// Stable digest of the serialized parameters, for dataset provenance.
    std::uint64_t digest() const;

    friend bool operator==(const PlateConfig&, const PlateConfig&) = default;
};

PlateConfig default_config();

/// Hexagonal corral with walls whose outward normals point at 0, 60, ..., 300 degrees.
class Corral {
public:
    explicit Corral(double inradius) : inradius_(inradius) {}

    double inradius() const noexcept { return inradius_; }
    double area() const noexcept;
    /// Signed distance to the nearest wall; positive inside.
    double wall_distance(Point2 p) const noexcept;
    bool contains(Point2 p) const noexcept { return wall_distance(p) >= 0.0; }
    /// Index k of the wall closest to p; its outward normal points at 60k degrees.
    int nearest_wall(Point2 p) const noexcept;
    /// Mirrors any overshoot across the walls, scaled by `restitution`, then
    /// projects onto the hexagon if anything is left outside.
    Point2 reflect(Point2 p, double restitution) const noexcept;
    Point2 sample_uniform(Rng& rng) const;

private:
    double inradius_;
};

/// Camera view of the plate after an impulse: a flat resting die, or a leaner.
struct Observation {
    std::optional<DieState> state;

    static Observation leaner() { return {}; }
    static Observation valid(DieState s) { return {std::move(s)}; }
    bool is_leaner() const noexcept { return !state.has_value(); }
};

/// Ground truth of a simulated plate plus its private random stream.
class SimState {
public:
    SimState(DieState truth, std::uint64_t seed) : truth_(std::move(truth)), rng_(seed) {}
    /// Die dropped uniformly at random inside the corral.
    static SimState dropped(const PlateConfig& config, std::uint64_t seed);

    const DieState& truth() const noexcept { return truth_; }
    void set_truth(DieState s) { truth_ = std::move(s); }
    Rng& rng() noexcept { return rng_; }

    friend bool operator==(const SimState&, const SimState&) = default;

private:
    DieState truth_;
    Rng rng_;
};

/// Details of one kernel evaluation, for diagnostics and tests.
struct StepTrace {
    double distance = 0.0;
    double lift = 0.0;
    double roll_prob = 0.0;
    bool rolled = false;
    bool double_rolled = false;
    bool leaner = false;
};

class Simulator {
public:
    explicit Simulator(PlateConfig config);

    const PlateConfig& config() const noexcept { return config_; }
    const Corral& corral() const noexcept { return corral_; }

    /// Fires one impulse. Throws std::invalid_argument for an invalid action.
    Observation step(SimState& state, const Action& action, StepTrace* trace = nullptr) const;
    /// Noisy camera reading of the current truth; the face is exact.
    Observation observe(SimState& state) const;

    /// Closed-form probability that the impulse tips the die at least once.
    double roll_probability(const DieState& state, const Action& action) const;

    /// Monte-Carlo estimate of Pr[goal after one impulse] on the true plant.
    double oracle_success_prob(const DieState& state, const Action& action, const GoalSpec& goal,
                               int n, std::uint64_t seed = 0) const;

    DieState random_drop(Rng& rng) const;

private:
    PlateConfig config_;
    Corral corral_;
};

/// Uniform solenoid and uniform duration over the allowed band.
Action random_action(Rng& rng);

/// Puts a labeling into its upright form by rotating the die frame, adjusting the heading.
DieState canonicalize(const CubeOrientation& orientation, Point2 position, double theta);

/// Die-frame edge nearest to a world heading for a die whose east axis points at `theta`.
RollDirection edge_toward(double world_heading, double theta) noexcept;

}  // namespace thumper

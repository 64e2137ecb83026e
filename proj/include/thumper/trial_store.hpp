#pragma once

#include "thumper/core.hpp"
#include "thumper/simulator.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace thumper {

/// One logged impulse: observed state before, the action, observed state after.
/// For an invalid trial (leaner) `after` is the next valid observation once the
/// die has been recovered, and carries no outcome information.
struct Trial {
    DieState before;
    Action action;
    DieState after;
    bool valid = true;
    int episode_id = 0;
    int step_index = 0;

    friend bool operator==(const Trial&, const Trial&) = default;
};

struct Provenance {
    std::uint64_t seed = 0;
    std::uint64_t config_digest = 0;
    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Dataset {
    std::vector<Trial> trials;
    Provenance provenance;

    std::size_t size() const noexcept { return trials.size(); }
    bool empty() const noexcept { return trials.empty(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Self-supervised collection: random impulses, every trial logged, each
/// successor becoming the next starting state.
Dataset collect(const PlateConfig& config, std::size_t n_trials, std::uint64_t seed);

Dataset filter_valid(const Dataset& d);

struct FoldPair {
    Dataset train;
    Dataset test;
};

/// Shuffled k-fold partition; test fold sizes differ by at most one.
std::vector<FoldPair> kfold_split(const Dataset& d, std::size_t k, std::uint64_t seed);

/// Histogram of before-positions on a square grid covering the corral.
struct DensityMap {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_mm = 1.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::size_t> counts;  // row-major, y outer

    std::size_t total() const noexcept;
    std::size_t at(std::size_t ix, std::size_t iy) const { return counts.at(iy * nx + ix); }
};

DensityMap density_stats(const Dataset& d, double grid_mm, double corral_inradius = 90.0);

/// Per-area density of before-positions within `band_mm` of a wall divided by
/// that inside the central disk of radius `band_mm`.
double edge_center_density_ratio(const Dataset& d, const Corral& corral, double band_mm = 20.0);

inline constexpr std::string_view kTrialLogHeader =
    "episode,step,s,x,y,theta,solenoid,duration_ms,s_prime,x_prime,y_prime,theta_prime,valid";

std::string serialize(const Dataset& d);
/// Parses a trial log. Rows from external sources are accepted as long as
/// the columns match; a missing provenance line leaves it zeroed.
Dataset parse_dataset(std::string_view text);

void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace thumper

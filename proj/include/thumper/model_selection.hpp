#pragma once

#include "thumper/neighbors.hpp"
#include "thumper/trial_store.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thumper {

/// Goals a logged trial is scored against. The face-change task gives one
/// goal per trial (leave the starting face); the target-face task scores
/// every face other than the starting one.
using GoalsForTrial = std::function<std::vector<GoalSpec>(const Trial&)>;

GoalsForTrial face_change_goals();
GoalsForTrial target_face_goals();

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct RocCurve {
    std::vector<double> thresholds;
    std::vector<RocPoint> points;
    std::size_t positives = 0;
    std::size_t negatives = 0;

    bool degenerate() const noexcept { return positives == 0 || negatives == 0; }
};

/// 1.0, 0.99, ..., 0.0
std::vector<double> default_thresholds();

/// ROC of one solenoid's classifier on a test split. A test query counts as
/// predicted-positive at threshold a iff the trained model does not abstain
/// (support >= min_support) and its success fraction is >= a.
RocCurve roc_for(int solenoid, const NeighborModel& trained, const Dataset& test, const GoalsForTrial& goals,
                 const std::vector<double>& thresholds, std::size_t min_support = kDefaultMinSupport);

/// Trapezoidal area with (0,0) and (1,1) appended where missing; nullopt for a degenerate curve.
std::optional<double> auroc(const RocCurve& c);

struct AurocEntry {
    std::size_t fold = 0;
    int solenoid = 0;
    std::optional<double> auroc;
};

struct GridCell {
    double r = 0.0;
    double w = 0.0;
    std::optional<double> mean_auroc;  // over non-degenerate (fold, solenoid) entries
    std::vector<AurocEntry> entries;
};

struct HyperparamSelection {
    double r = 0.0;
    double w = 0.0;
    double plateau_tolerance = 0.01;
    std::vector<GridCell> cells;  // r ascending, then w ascending

    const GridCell& cell(double r, double w) const;
};

struct SelectionOptions {
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t min_support = kDefaultMinSupport;
    double plateau_tolerance = 0.01;
    AngleMode angle_mode = AngleMode::Wrapped;
    Stratification stratification = Stratification::ByFace;
    std::vector<double> thresholds = default_thresholds();
};

/// Grid search over (r, w) by k-fold cross-validated mean AUROC across all
/// seven solenoids. Picks the lexicographically smallest (r, w) whose mean is
/// within the plateau tolerance of the best cell.
HyperparamSelection select_hyperparams(const Dataset& d, const GoalsForTrial& goals, std::vector<double> r_grid,
                                       std::vector<double> w_grid, const SelectionOptions& options = {});

/// Columns: r, w, fold, solenoid, auroc (empty when degenerate).
std::string selection_csv(const HyperparamSelection& s);

}  // namespace thumper

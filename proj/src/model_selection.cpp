#include "thumper/model_selection.hpp"

#include "thumper/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thumper {

GoalsForTrial face_change_goals()
{
    return [](const Trial& t) { return std::vector<GoalSpec>{AnyOtherFace{t.before.face()}}; };
}

GoalsForTrial target_face_goals()
{
    return [](const Trial& t) {
        std::vector<GoalSpec> goals;
        for (int f = 1; f <= 6; ++f)
            if (DieFace(f) != t.before.face())
                goals.emplace_back(TargetFace{DieFace(f)});
        return goals;
    };
}

std::vector<double> default_thresholds()
{
    std::vector<double> t;
    for (int i = 100; i >= 0; --i)
        t.push_back(i / 100.0);
    return t;
}

RocCurve roc_for(int solenoid, const NeighborModel& trained, const Dataset& test, const GoalsForTrial& goals,
                 const std::vector<double>& thresholds, std::size_t min_support)
{
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0.0 || thresholds[i] > 1.0 || (i > 0 && thresholds[i] > thresholds[i - 1]))
            throw std::invalid_argument("ROC thresholds must descend within [0,1]");
    }
    struct Scored {
        std::optional<double> p;
        bool positive;
    };
    std::vector<Scored> scored;
    const auto& trials = trained.trials();
    for (const auto& t : test.trials) {
        if (!t.valid || t.action.solenoid != solenoid)
            continue;
        const auto hood = trained.neighborhood(t.before, solenoid);
        for (const auto& goal : goals(t)) {
            Scored s{std::nullopt, goal_satisfied(goal, t.after)};
            if (!hood.empty() && hood.size() >= min_support) {
                std::size_t hits = 0;
                for (auto idx : hood)
                    hits += trial_meets(goal, trials[idx]) ? 1 : 0;
                s.p = static_cast<double>(hits) / static_cast<double>(hood.size());
            }
            scored.push_back(s);
        }
    }

    RocCurve c;
    c.thresholds = thresholds;
    for (const auto& s : scored)
        (s.positive ? c.positives : c.negatives) += 1;
    // Sort by score so each threshold is a single pass position.
    std::vector<Scored> ranked;
    for (const auto& s : scored)
        if (s.p)
            ranked.push_back(s);
    std::sort(ranked.begin(), ranked.end(), [](const Scored& a, const Scored& b) { return *a.p > *b.p; });
    std::size_t pos = 0, tp = 0, fp = 0;
    for (double a : thresholds) {
        while (pos < ranked.size() && *ranked[pos].p >= a) {
            (ranked[pos].positive ? tp : fp) += 1;
            ++pos;
        }
        c.points.push_back({c.negatives ? static_cast<double>(fp) / c.negatives : 0.0,
                            c.positives ? static_cast<double>(tp) / c.positives : 0.0});
    }
    return c;
}

std::optional<double> auroc(const RocCurve& c)
{
    if (c.degenerate())
        return std::nullopt;
    std::vector<RocPoint> pts;
    if (c.points.empty() || !(c.points.front() == RocPoint{0.0, 0.0}))
        pts.push_back({0.0, 0.0});
    pts.insert(pts.end(), c.points.begin(), c.points.end());
    if (!(pts.back() == RocPoint{1.0, 1.0}))
        pts.push_back({1.0, 1.0});
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i)
        area += (pts[i].fpr - pts[i - 1].fpr) * 0.5 * (pts[i].tpr + pts[i - 1].tpr);
    return area;
}

const GridCell& HyperparamSelection::cell(double r_value, double w_value) const
{
    for (const auto& c : cells)
        if (c.r == r_value && c.w == w_value)
            return c;
    throw std::out_of_range("no grid cell (" + format_double(r_value) + ", " + format_double(w_value) + ")");
}

HyperparamSelection select_hyperparams(const Dataset& d, const GoalsForTrial& goals, std::vector<double> r_grid,
                                       std::vector<double> w_grid, const SelectionOptions& options)
{
    if (r_grid.empty() || w_grid.empty())
        throw std::invalid_argument("hyperparameter grids must be non-empty");
    std::sort(r_grid.begin(), r_grid.end());
    std::sort(w_grid.begin(), w_grid.end());
    r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
    w_grid.erase(std::unique(w_grid.begin(), w_grid.end()), w_grid.end());

    const auto folds = kfold_split(filter_valid(d), options.folds, options.seed);
    HyperparamSelection sel;
    sel.plateau_tolerance = options.plateau_tolerance;
    for (double r : r_grid) {
        for (double w : w_grid) {
            GridCell cell{r, w, std::nullopt, {}};
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const NeighborModel model(folds[f].train, ScalarizedMetric{w, options.angle_mode}, r,
                                          options.stratification);
                for (int s = 0; s < kNumSolenoids; ++s) {
                    const auto a = auroc(roc_for(s, model, folds[f].test, goals, options.thresholds,
                                                 options.min_support));
                    cell.entries.push_back({f, s, a});
                    if (a) {
                        sum += *a;
                        ++n;
                    }
                }
            }
            if (n > 0)
                cell.mean_auroc = sum / static_cast<double>(n);
            sel.cells.push_back(std::move(cell));
        }
    }

    std::optional<double> best;
    for (const auto& c : sel.cells)
        if (c.mean_auroc && (!best || *c.mean_auroc > *best))
            best = c.mean_auroc;
    if (!best)
        throw std::runtime_error("every hyperparameter cell is degenerate");
    for (const auto& c : sel.cells) {
        if (c.mean_auroc && *c.mean_auroc >= *best - options.plateau_tolerance) {
            sel.r = c.r;
            sel.w = c.w;
            break;
        }
    }
    return sel;
}

std::string selection_csv(const HyperparamSelection& s)
{
    std::string out = "# selected_r=" + format_double(s.r) + " selected_w=" + format_double(s.w) + "\n";
    out += "r,w,fold,solenoid,auroc\n";
    for (const auto& c : s.cells)
        for (const auto& e : c.entries)
            out += format_double(c.r) + ',' + format_double(c.w) + ',' + std::to_string(e.fold) + ',' +
                   std::to_string(e.solenoid) + ',' + (e.auroc ? format_double(*e.auroc) : "") + '\n';
    return out;
}

}  // namespace thumper

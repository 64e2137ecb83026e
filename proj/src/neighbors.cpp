#include "thumper/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace thumper {

namespace {

constexpr double kMinCellMm = 4.0;

std::size_t cell_coord(double v, double origin, double cell, std::size_t n) noexcept
{
    const double c = std::floor((v - origin) / cell);
    if (!(c > 0.0))
        return 0;
    return static_cast<std::size_t>(std::min(c, static_cast<double>(n - 1)));
}

}  // namespace

double ScalarizedMetric::angle_term(double theta_a, double theta_b) const noexcept
{
    const double diff =
        angle_mode == AngleMode::Wrapped ? wrap_angle_diff(theta_a, theta_b) : std::abs(theta_a - theta_b);
    return w * diff;
}

double ScalarizedMetric::operator()(const Pose& a, const Pose& b) const noexcept
{
    return std::hypot(a.x - b.x, a.y - b.y) + angle_term(a.theta, b.theta);
}

double distance(const ScalarizedMetric& m, const Pose& a, const Pose& b) noexcept { return m(a, b); }

std::optional<double> SuccessEstimate::probability() const noexcept
{
    if (support == 0)
        return std::nullopt;
    return static_cast<double>(successes) / static_cast<double>(support);
}

bool trial_meets(const GoalSpec& goal, const Trial& t) noexcept
{
    if (std::holds_alternative<AnyOtherFace>(goal))
        return t.after.face() != t.before.face();
    return goal_satisfied(goal, t.after);
}

NeighborModel::NeighborModel(const Dataset& d, ScalarizedMetric metric, double radius, Stratification stratification)
    : metric_(metric), radius_(radius), stratification_(stratification)
{
    if (!(radius > 0.0))
        throw std::invalid_argument("neighborhood radius must be positive");
    if (!(metric.w >= 0.0))
        throw std::invalid_argument("metric conversion factor must be non-negative");
    cell_mm_ = std::max(radius, kMinCellMm);

    std::array<std::vector<std::uint32_t>, kNumSolenoids * 6> members;
    for (const auto& t : d.trials) {
        if (!t.valid)
            continue;
        members[stratum_key(t.action.solenoid, t.before.face())].push_back(
            static_cast<std::uint32_t>(trials_.size()));
        trials_.push_back(t);
    }
    for (std::size_t k = 0; k < strata_.size(); ++k)
        index_stratum(strata_[k], members[k]);
}

void NeighborModel::index_stratum(Stratum& s, const std::vector<std::uint32_t>& members)
{
    if (members.empty()) {
        s.cell_start.assign(2, 0);
        return;
    }
    double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
    double max_x = -min_x, max_y = -min_x;
    for (auto i : members) {
        const Pose& p = trials_[i].before.pose();
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    s.origin_x = min_x;
    s.origin_y = min_y;
    s.nx = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor((max_x - min_x) / cell_mm_)) + 1);
    s.ny = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor((max_y - min_y) / cell_mm_)) + 1);

    std::vector<std::size_t> cell_of(members.size());
    s.cell_start.assign(s.nx * s.ny + 1, 0);
    for (std::size_t j = 0; j < members.size(); ++j) {
        const Pose& p = trials_[members[j]].before.pose();
        cell_of[j] = cell_coord(p.y, s.origin_y, cell_mm_, s.ny) * s.nx +
                     cell_coord(p.x, s.origin_x, cell_mm_, s.nx);
        ++s.cell_start[cell_of[j] + 1];
    }
    std::partial_sum(s.cell_start.begin(), s.cell_start.end(), s.cell_start.begin());
    s.items.resize(members.size());
    std::vector<std::uint32_t> fill(s.cell_start.begin(), s.cell_start.end() - 1);
    for (std::size_t j = 0; j < members.size(); ++j)
        s.items[fill[cell_of[j]]++] = members[j];
}

std::size_t NeighborModel::partition_size(int solenoid) const
{
    if (stratification_ == Stratification::Pooled)
        return stratum_size(solenoid, DieFace(1));
    std::size_t n = 0;
    for (int f = 1; f <= 6; ++f)
        n += stratum_size(solenoid, DieFace(f));
    return n;
}

std::size_t NeighborModel::stratum_size(int solenoid, DieFace face) const
{
    if (solenoid < 0 || solenoid >= kNumSolenoids)
        throw std::out_of_range("solenoid index out of range");
    return strata_[stratum_key(solenoid, face)].items.size();
}

std::vector<std::uint32_t> NeighborModel::neighborhood(const DieState& state, int solenoid) const
{
    if (solenoid < 0 || solenoid >= kNumSolenoids)
        throw std::out_of_range("solenoid index out of range");
    const Stratum& s = strata_[stratum_key(solenoid, state.face())];
    std::vector<std::uint32_t> out;
    if (s.items.empty())
        return out;
    const Pose& q = state.pose();
    // The planar disk of radius r contains the metric ball, since the angle term is non-negative.
    const std::size_t x0 = cell_coord(q.x - radius_, s.origin_x, cell_mm_, s.nx);
    const std::size_t x1 = cell_coord(q.x + radius_, s.origin_x, cell_mm_, s.nx);
    const std::size_t y0 = cell_coord(q.y - radius_, s.origin_y, cell_mm_, s.ny);
    const std::size_t y1 = cell_coord(q.y + radius_, s.origin_y, cell_mm_, s.ny);
    for (std::size_t iy = y0; iy <= y1; ++iy) {
        for (std::size_t ix = x0; ix <= x1; ++ix) {
            const std::size_t c = iy * s.nx + ix;
            for (std::uint32_t j = s.cell_start[c]; j < s.cell_start[c + 1]; ++j) {
                const std::uint32_t idx = s.items[j];
                if (metric_(q, trials_[idx].before.pose()) <= radius_)
                    out.push_back(idx);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

SuccessEstimate NeighborModel::success_prob(const DieState& state, int solenoid, const GoalSpec& goal) const
{
    SuccessEstimate e;
    for (auto idx : neighborhood(state, solenoid)) {
        ++e.support;
        if (trial_meets(goal, trials_[idx]))
            ++e.successes;
    }
    return e;
}

double NeighborModel::select_duration(const DieState& state, int solenoid, const GoalSpec& goal) const
{
    double sum = 0.0;
    std::size_t n = 0;
    for (auto idx : neighborhood(state, solenoid)) {
        if (trial_meets(goal, trials_[idx])) {
            sum += trials_[idx].action.duration_ms;
            ++n;
        }
    }
    if (n == 0)
        return kFallbackDurationMs;
    return std::clamp(sum / static_cast<double>(n), kMinDurationMs, kMaxDurationMs);
}

SuccessEstimate knn_success_prob(const Dataset& d, const ScalarizedMetric& m, const DieState& state,
                                 int solenoid, const GoalSpec& goal, std::size_t k)
{
    if (k < 1)
        throw std::invalid_argument("kNN needs k >= 1");
    struct Candidate {
        double dist;
        std::size_t order;
        bool success;
    };
    std::vector<Candidate> c;
    for (std::size_t i = 0; i < d.trials.size(); ++i) {
        const Trial& t = d.trials[i];
        if (!t.valid || t.action.solenoid != solenoid || t.before.face() != state.face())
            continue;
        c.push_back({m(state.pose(), t.before.pose()), i, goal_satisfied(goal, t.after)});
    }
    const std::size_t take = std::min(k, c.size());
    std::partial_sort(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(take), c.end(),
                      [](const Candidate& a, const Candidate& b) {
                          return a.dist != b.dist ? a.dist < b.dist : a.order < b.order;
                      });
    SuccessEstimate e;
    e.support = take;
    for (std::size_t i = 0; i < take; ++i)
        e.successes += c[i].success ? 1 : 0;
    return e;
}

}  // namespace thumper

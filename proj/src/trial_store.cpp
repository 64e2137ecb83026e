#include "thumper/trial_store.hpp"

#include "thumper/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace thumper {

Dataset collect(const PlateConfig& config, std::size_t n_trials, std::uint64_t seed)
{
    if (n_trials < 1)
        throw std::invalid_argument("collect needs at least one trial");
    const Simulator sim(config);
    SimState plate = SimState::dropped(config, seed);
    Rng chooser(seed ^ 0x9e3779b97f4a7c15ull);

    Dataset d;
    d.provenance = {seed, config.digest()};
    d.trials.reserve(n_trials);
    DieState current = *sim.observe(plate).state;
    for (std::size_t i = 0; i < n_trials; ++i) {
        const Action action = random_action(chooser);
        const Observation obs = sim.step(plate, action);
        Trial t{current, action, current, !obs.is_leaner(), 0, static_cast<int>(i)};
        t.after = obs.is_leaner() ? *sim.observe(plate).state : *obs.state;
        current = t.after;
        d.trials.push_back(std::move(t));
    }
    return d;
}

Dataset filter_valid(const Dataset& d)
{
    Dataset out;
    out.provenance = d.provenance;
    std::copy_if(d.trials.begin(), d.trials.end(), std::back_inserter(out.trials),
                 [](const Trial& t) { return t.valid; });
    return out;
}

std::vector<FoldPair> kfold_split(const Dataset& d, std::size_t k, std::uint64_t seed)
{
    if (k < 2)
        throw std::invalid_argument("k-fold split needs k >= 2");
    if (k > d.size())
        throw std::invalid_argument("k-fold split: k = " + std::to_string(k) +
                                    " exceeds dataset size " + std::to_string(d.size()));
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::size_t> fold_of(d.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        fold_of[order[i]] = i % k;

    std::vector<FoldPair> folds(k);
    for (auto& f : folds) {
        f.train.provenance = d.provenance;
        f.test.provenance = d.provenance;
    }
    // Original order is kept inside each split.
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            (fold_of[i] == j ? folds[j].test : folds[j].train).trials.push_back(d.trials[i]);
    return folds;
}

std::size_t DensityMap::total() const noexcept
{
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

DensityMap density_stats(const Dataset& d, double grid_mm, double corral_inradius)
{
    if (!(grid_mm > 0.0))
        throw std::invalid_argument("density grid size must be positive");
    const double half = corral_inradius * 2.0 / std::sqrt(3.0);
    DensityMap m;
    m.cell_mm = grid_mm;
    m.origin_x = -half;
    m.origin_y = -half;
    m.nx = m.ny = static_cast<std::size_t>(std::ceil(2.0 * half / grid_mm));
    m.counts.assign(m.nx * m.ny, 0);
    auto cell = [&](double v, double origin, std::size_t n) {
        const double c = std::floor((v - origin) / grid_mm);
        return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(n - 1)));
    };
    for (const auto& t : d.trials)
        ++m.counts[cell(t.before.pose().y, m.origin_y, m.ny) * m.nx +
                   cell(t.before.pose().x, m.origin_x, m.nx)];
    return m;
}

double edge_center_density_ratio(const Dataset& d, const Corral& corral, double band_mm)
{
    std::size_t edge = 0, center = 0;
    for (const auto& t : d.trials) {
        const Point2 p{t.before.pose().x, t.before.pose().y};
        if (corral.wall_distance(p) <= band_mm)
            ++edge;
        if (std::hypot(p.x, p.y) <= band_mm)
            ++center;
    }
    const Corral inner(corral.inradius() - band_mm);
    const double edge_area = corral.area() - inner.area();
    const double center_area = 3.14159265358979323846 * band_mm * band_mm;
    if (center == 0)
        return std::numeric_limits<double>::infinity();
    return (edge / edge_area) / (center / center_area);
}

std::string serialize(const Dataset& d)
{
    std::string out = "# seed=" + std::to_string(d.provenance.seed) +
                      " config_digest=" + std::to_string(d.provenance.config_digest) + "\n";
    out += kTrialLogHeader;
    out += '\n';
    for (const auto& t : d.trials) {
        const Pose& a = t.before.pose();
        const Pose& b = t.after.pose();
        out += std::to_string(t.episode_id) + ',' + std::to_string(t.step_index) + ',' +
               std::to_string(t.before.face().value()) + ',' + format_double(a.x) + ',' +
               format_double(a.y) + ',' + format_double(a.theta) + ',' +
               std::to_string(t.action.solenoid) + ',' + format_double(t.action.duration_ms) + ',' +
               std::to_string(t.after.face().value()) + ',' + format_double(b.x) + ',' +
               format_double(b.y) + ',' + format_double(b.theta) + ',' + (t.valid ? '1' : '0') +
               '\n';
    }
    return out;
}

Dataset parse_dataset(std::string_view text)
{
    Dataset d;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            for (const auto& tok : split(line.substr(1), ' ')) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos)
                    continue;
                const std::string key = tok.substr(0, eq);
                if (key == "seed")
                    d.provenance.seed = std::stoull(tok.substr(eq + 1));
                else if (key == "config_digest")
                    d.provenance.config_digest = std::stoull(tok.substr(eq + 1));
            }
            continue;
        }
        if (!header_seen) {
            if (line != kTrialLogHeader)
                throw ParseError("trial log: unexpected header at line " + std::to_string(line_no));
            header_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 13)
            throw ParseError("trial log line " + std::to_string(line_no) + ": expected 13 fields, got " +
                             std::to_string(f.size()));
        const std::string where = "trial log line " + std::to_string(line_no);
        try {
            Trial t{DieState(DieFace(static_cast<int>(parse_int(f[2], where))),
                             Pose::make(parse_double(f[3], where), parse_double(f[4], where),
                                        parse_double(f[5], where))),
                    Action::make(static_cast<int>(parse_int(f[6], where)), parse_double(f[7], where)),
                    DieState(DieFace(static_cast<int>(parse_int(f[8], where))),
                             Pose::make(parse_double(f[9], where), parse_double(f[10], where),
                                        parse_double(f[11], where))),
                    parse_int(f[12], where) != 0, static_cast<int>(parse_int(f[0], where)),
                    static_cast<int>(parse_int(f[1], where))};
            d.trials.push_back(std::move(t));
        } catch (const std::invalid_argument& e) {
            throw ParseError(where + ": " + e.what());
        }
    }
    if (!header_seen)
        throw ParseError("trial log: missing header");
    return d;
}

void save_dataset(const Dataset& d, const std::string& path) { write_file(path, serialize(d)); }

Dataset load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

}  // namespace thumper

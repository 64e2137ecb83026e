#include "thumper/simulator.hpp"

#include "thumper/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thumper {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Point2 wall_normal(int k) noexcept
{
    const double a = 60.0 * k * kDegToRad;
    return {std::cos(a), std::sin(a)};
}

double dot(Point2 a, Point2 b) noexcept { return a.x * b.x + a.y * b.y; }

void check_probability(double p, const char* name)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must be in [0,1]");
}

void check_non_negative(double v, const char* name)
{
    if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string(name) + " must be finite and non-negative");
}

struct FieldRef {
    const char* key;
    double PlateConfig::*member;
};

constexpr FieldRef kScalarFields[] = {
    {"corral_inradius", &PlateConfig::corral_inradius},
    {"wall_restitution", &PlateConfig::wall_restitution},
    {"center_authority_scale", &PlateConfig::center_authority_scale},
    {"roll_annulus_mean", &PlateConfig::roll_annulus_mean},
    {"roll_annulus_sd", &PlateConfig::roll_annulus_sd},
    {"direction_noise_sd", &PlateConfig::direction_noise_sd},
    {"translation_scale", &PlateConfig::translation_scale},
    {"translation_decay", &PlateConfig::translation_decay},
    {"double_roll_prob", &PlateConfig::double_roll_prob},
    {"leaner_prob", &PlateConfig::leaner_prob},
    {"obs_noise_xy", &PlateConfig::obs_noise_xy},
    {"obs_noise_theta", &PlateConfig::obs_noise_theta},
    {"roll_prob_cap", &PlateConfig::roll_prob_cap},
    {"translation_noise_sd", &PlateConfig::translation_noise_sd},
    {"yaw_noise_sd", &PlateConfig::yaw_noise_sd},
    {"leaner_wall_band", &PlateConfig::leaner_wall_band},
    {"roll_gain", &PlateConfig::roll_gain},
    {"wall_align_band", &PlateConfig::wall_align_band},
    {"wall_align_rate", &PlateConfig::wall_align_rate},
};

std::string solenoid_key(int i) { return "solenoid_" + std::to_string(i); }

}  // namespace

PlateConfig default_config()
{
    PlateConfig c;
    c.solenoid_xy[2] = {0.0, 0.0};
    c.solenoid_xy[0] = {-60.0, 0.0};
    // Counterclockwise around the ring starting just after solenoid 0.
    constexpr int ring[] = {1, 3, 4, 5, 6};
    for (int j = 0; j < 5; ++j) {
        const double a = (180.0 + 60.0 * (j + 1)) * kDegToRad;
        c.solenoid_xy[ring[j]] = {60.0 * std::cos(a), 60.0 * std::sin(a)};
    }
    return c;
}

void PlateConfig::validate() const
{
    for (const auto& p : solenoid_xy)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("solenoid coordinates must be finite");
    if (!(corral_inradius > 0.0))
        throw std::invalid_argument("corral_inradius must be positive");
    const Corral corral(corral_inradius);
    for (const auto& p : solenoid_xy)
        if (!corral.contains(p))
            throw std::invalid_argument("every solenoid must lie inside the corral");
    check_probability(wall_restitution, "wall_restitution");
    check_probability(double_roll_prob, "double_roll_prob");
    check_probability(leaner_prob, "leaner_prob");
    check_probability(roll_prob_cap, "roll_prob_cap");
    check_non_negative(center_authority_scale, "center_authority_scale");
    check_non_negative(roll_annulus_mean, "roll_annulus_mean");
    check_non_negative(direction_noise_sd, "direction_noise_sd");
    check_non_negative(translation_scale, "translation_scale");
    check_non_negative(obs_noise_xy, "obs_noise_xy");
    check_non_negative(obs_noise_theta, "obs_noise_theta");
    check_non_negative(translation_noise_sd, "translation_noise_sd");
    check_non_negative(yaw_noise_sd, "yaw_noise_sd");
    check_non_negative(leaner_wall_band, "leaner_wall_band");
    check_non_negative(roll_gain, "roll_gain");
    check_non_negative(wall_align_band, "wall_align_band");
    check_probability(wall_align_rate, "wall_align_rate");
    if (!(roll_annulus_sd > 0.0))
        throw std::invalid_argument("roll_annulus_sd must be positive");
    if (!(translation_decay > 0.0))
        throw std::invalid_argument("translation_decay must be positive");
}

std::map<std::string, std::string> PlateConfig::to_key_values() const
{
    std::map<std::string, std::string> kv;
    for (int i = 0; i < kNumSolenoids; ++i)
        kv[solenoid_key(i)] = format_double(solenoid_xy[i].x) + "," + format_double(solenoid_xy[i].y);
    for (const auto& f : kScalarFields)
        kv[f.key] = format_double(this->*f.member);
    return kv;
}

std::vector<std::string> PlateConfig::apply_key_values(const std::map<std::string, std::string>& kv)
{
    std::vector<std::string> unknown;
    for (const auto& [key, value] : kv) {
        bool matched = false;
        for (const auto& f : kScalarFields) {
            if (key == f.key) {
                this->*f.member = parse_double(value, key);
                matched = true;
                break;
            }
        }
        for (int i = 0; i < kNumSolenoids && !matched; ++i) {
            if (key == solenoid_key(i)) {
                const auto parts = split(value, ',');
                if (parts.size() != 2)
                    throw std::invalid_argument("value of " + key + " must be \"x,y\"");
                solenoid_xy[i] = {parse_double(parts[0], key), parse_double(parts[1], key)};
                matched = true;
            }
        }
        if (!matched)
            unknown.push_back(key);
    }
    return unknown;
}

std::uint64_t PlateConfig::digest() const
{
    std::string text;
    for (const auto& [k, v] : to_key_values())
        text += k + "=" + v + "\n";
    return fnv1a(text);
}

double Corral::area() const noexcept { return 2.0 * std::sqrt(3.0) * inradius_ * inradius_; }

double Corral::wall_distance(Point2 p) const noexcept
{
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 6; ++k)
        best = std::min(best, inradius_ - dot(p, wall_normal(k)));
    return best;
}

int Corral::nearest_wall(Point2 p) const noexcept
{
    int best = 0;
    for (int k = 1; k < 6; ++k)
        if (dot(p, wall_normal(k)) > dot(p, wall_normal(best)))
            best = k;
    return best;
}

Point2 Corral::reflect(Point2 p, double restitution) const noexcept
{
    for (int pass = 0; pass < 4; ++pass) {
        bool moved = false;
        for (int k = 0; k < 6; ++k) {
            const Point2 n = wall_normal(k);
            const double overshoot = dot(p, n) - inradius_;
            if (overshoot > 0.0) {
                p.x -= (1.0 + restitution) * overshoot * n.x;
                p.y -= (1.0 + restitution) * overshoot * n.y;
                moved = true;
            }
        }
        if (!moved)
            break;
    }
    for (int k = 0; k < 6; ++k) {
        const Point2 n = wall_normal(k);
        const double overshoot = dot(p, n) - inradius_;
        if (overshoot > 0.0) {
            p.x -= overshoot * n.x;
            p.y -= overshoot * n.y;
        }
    }
    return p;
}

Point2 Corral::sample_uniform(Rng& rng) const
{
    const double circum = inradius_ * 2.0 / std::sqrt(3.0);
    std::uniform_real_distribution<double> u(-circum, circum);
    for (;;) {
        Point2 p{u(rng), u(rng)};
        if (contains(p))
            return p;
    }
}

Action random_action(Rng& rng)
{
    std::uniform_int_distribution<int> solenoid(0, kNumSolenoids - 1);
    std::uniform_real_distribution<double> duration(kMinDurationMs, kMaxDurationMs);
    const int s = solenoid(rng);
    return Action{s, duration(rng)};
}

RollDirection edge_toward(double world_heading, double theta) noexcept
{
    const double rel = normalize_degrees(world_heading - theta);
    switch (static_cast<int>(std::lround(rel / 90.0)) % 4) {
        case 0: return RollDirection::East;
        case 1: return RollDirection::North;
        case 2: return RollDirection::West;
        default: return RollDirection::South;
    }
}

DieState canonicalize(const CubeOrientation& orientation, Point2 position, double theta)
{
    const CubeOrientation target = CubeOrientation::upright(orientation.top());
    CubeOrientation o = orientation;
    for (int i = 0; i < 4 && !(o == target); ++i) {
        o = o.relabel_ccw();
        theta += 90.0;
    }
    return DieState(o, Pose::make(position.x, position.y, theta));
}

SimState SimState::dropped(const PlateConfig& config, std::uint64_t seed)
{
    SimState s(DieState(DieFace(1), Pose{}), seed);
    s.truth_ = Simulator(config).random_drop(s.rng_);
    return s;
}

Simulator::Simulator(PlateConfig config) : config_(std::move(config)), corral_(config_.corral_inradius)
{
    config_.validate();
}

DieState Simulator::random_drop(Rng& rng) const
{
    const Point2 p = corral_.sample_uniform(rng);
    std::uniform_int_distribution<std::size_t> pick(0, 23);
    std::uniform_real_distribution<double> heading(0.0, 360.0);
    const CubeOrientation o = CubeOrientation::all()[pick(rng)];
    return canonicalize(o, p, heading(rng));
}

double Simulator::roll_probability(const DieState& state, const Action& action) const
{
    const Point2 s = config_.solenoid_xy[action.solenoid];
    const double d = std::hypot(state.pose().x - s.x, state.pose().y - s.y);
    const double lift = (action.duration_ms - kMinDurationMs) / (kMaxDurationMs - kMinDurationMs);
    const double z = (d - config_.roll_annulus_mean) / config_.roll_annulus_sd;
    double authority = std::exp(-0.5 * z * z);
    if (action.solenoid == kCenterSolenoid)
        authority *= config_.center_authority_scale;
    return std::min(config_.roll_prob_cap, config_.roll_gain * lift * authority);
}

Observation Simulator::step(SimState& state, const Action& action, StepTrace* trace) const
{
    if (!action.valid())
        throw std::invalid_argument("invalid action: solenoid " + std::to_string(action.solenoid) +
                                    ", duration " + format_double(action.duration_ms) + " ms");
    Rng& rng = state.rng();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const DieState& before = state.truth();
    const Point2 s = config_.solenoid_xy[action.solenoid];
    const double dx = before.pose().x - s.x;
    const double dy = before.pose().y - s.y;
    const double d = std::hypot(dx, dy);
    const double lift = (action.duration_ms - kMinDurationMs) / (kMaxDurationMs - kMinDurationMs);
    const double p_roll = roll_probability(before, action);

    // Fixed draw order keeps streams aligned regardless of branch taken.
    const double random_heading = 360.0 * unit(rng);
    const double u_roll = unit(rng);
    const double dir_noise = config_.direction_noise_sd * gauss(rng);
    const double u_double = unit(rng);
    const double noise_x = config_.translation_noise_sd * gauss(rng);
    const double noise_y = config_.translation_noise_sd * gauss(rng);
    const double noise_yaw = config_.yaw_noise_sd * gauss(rng);
    const double u_leaner = unit(rng);

    const double radial = d > 1e-9 ? std::atan2(dy, dx) / kDegToRad : random_heading;

    CubeOrientation o = before.orientation();
    const bool rolled = u_roll < p_roll;
    const bool double_rolled = rolled && u_double < config_.double_roll_prob;
    if (rolled) {
        const RollDirection dir = edge_toward(radial + dir_noise, before.pose().theta);
        o = roll(o, dir);
        if (double_rolled)
            o = roll(o, dir);
    }

    const double push = config_.translation_scale * lift * std::exp(-d / config_.translation_decay);
    Point2 p{before.pose().x + push * std::cos(radial * kDegToRad) + noise_x,
             before.pose().y + push * std::sin(radial * kDegToRad) + noise_y};
    p = corral_.reflect(p, config_.wall_restitution);

    const bool near_wall = corral_.wall_distance(p) <= config_.leaner_wall_band;
    const bool leaner = near_wall && u_leaner < config_.leaner_prob;

    if (trace)
        *trace = StepTrace{d, lift, p_roll, rolled, double_rolled, leaner};

    if (leaner) {
        state.set_truth(random_drop(rng));
        return Observation::leaner();
    }
    double theta = before.pose().theta + noise_yaw;
    if (config_.wall_align_rate > 0.0 && corral_.wall_distance(p) <= config_.wall_align_band) {
        // Turn toward the nearest heading that puts a die edge flush with the nearest wall.
        const double wall = 60.0 * corral_.nearest_wall(p);
        const double off = normalize_degrees(theta - wall + 45.0);
        const double excess = std::fmod(off, 90.0) - 45.0;
        theta -= config_.wall_align_rate * excess;
    }
    state.set_truth(canonicalize(o, p, theta));
    return observe(state);
}

Observation Simulator::observe(SimState& state) const
{
    std::normal_distribution<double> gauss(0.0, 1.0);
    Rng& rng = state.rng();
    const Pose& t = state.truth().pose();
    const double nx = config_.obs_noise_xy * gauss(rng);
    const double ny = config_.obs_noise_xy * gauss(rng);
    const double nt = config_.obs_noise_theta * gauss(rng);
    Point2 p{t.x + nx, t.y + ny};
    if (!corral_.contains(p))
        p = corral_.reflect(p, 0.0);
    return Observation::valid(
        DieState(state.truth().orientation(), Pose::make(p.x, p.y, t.theta + nt)));
}

double Simulator::oracle_success_prob(const DieState& state, const Action& action,
                                      const GoalSpec& goal, int n, std::uint64_t seed) const
{
    if (n < 1)
        throw std::invalid_argument("oracle needs at least one sample");
    SimState sim(state, seed);
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        sim.set_truth(state);
        const Observation obs = step(sim, action);
        if (!obs.is_leaner() && goal_satisfied(goal, *obs.state))
            ++hits;
    }
    return static_cast<double>(hits) / n;
}

}  // namespace thumper

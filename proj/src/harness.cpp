#include "thumper/harness.hpp"

#include "thumper/text_io.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace thumper {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept
{
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Plate::Plate(const PlateConfig& config, std::uint64_t seed)
    : sim_(config), state_(SimState::dropped(config, seed))
{
    observed_ = sim_.observe(state_).state;
}

const DieState& Plate::settle()
{
    if (!observed_)
        observed_ = sim_.observe(state_).state;
    return *observed_;
}

Observation Plate::fire(const Action& a)
{
    Observation obs = sim_.step(state_, a);
    observed_ = obs.state;
    return obs;
}

EpisodeResult run_episode(Plate& plate, const PolicyKind& policy, const GoalSpec& goal, Rng& rng,
                          const EpisodeOptions& options)
{
    if (options.max_impulses < 1)
        throw std::invalid_argument("episode needs max_impulses >= 1");
    EpisodeResult result{goal, std::nullopt, {}};
    plate.settle();
    int counted = 0;
    while (counted < options.max_impulses) {
        StepRecord rec{plate.observed(), Action{}, Observation::leaner(), false};
        const bool recovery = !rec.observed.has_value();
        rec.action = recovery ? random_action(rng) : decide(policy, *rec.observed, goal, rng);
        rec.outcome = plate.fire(rec.action);
        rec.success = !rec.outcome.is_leaner() && goal_satisfied(goal, *rec.outcome.state);
        if (!recovery || options.recovery_counts)
            ++counted;
        result.steps.push_back(std::move(rec));
        if (result.steps.back().success) {
            result.impulses_used = counted;
            break;
        }
    }
    return result;
}

std::string task_name(Task t) { return t == Task::FaceChange ? "face-change" : "target-face"; }

Task parse_task(const std::string& name)
{
    if (name == "face-change")
        return Task::FaceChange;
    if (name == "target-face")
        return Task::TargetFace;
    throw std::invalid_argument("unknown task '" + name + "' (expected face-change or target-face)");
}

std::size_t CampaignReport::total_impulses() const noexcept
{
    std::size_t n = 0;
    for (const auto& e : episodes)
        n += e.steps.size();
    return n;
}

CampaignReport run_campaign(const PlateConfig& config, const PolicyKind& policy, const CampaignOptions& options,
                            std::uint64_t seed)
{
    if (options.n_goals < 1)
        throw std::invalid_argument("campaign needs at least one goal");
    Plate plate(config, derive_seed(seed, 0));
    Rng decisions(derive_seed(seed, 1));
    Rng goals(derive_seed(seed, 2));

    std::vector<EpisodeResult> episodes;
    episodes.reserve(options.n_goals);
    std::optional<DieFace> previous;
    for (std::size_t g = 0; g < options.n_goals; ++g) {
        const DieFace current = plate.settle().face();
        GoalSpec goal = AnyOtherFace{current};
        if (options.task == Task::TargetFace) {
            std::vector<int> allowed;
            for (int f = 1; f <= 6; ++f)
                if (DieFace(f) != current && (!previous || DieFace(f) != *previous))
                    allowed.push_back(f);
            std::uniform_int_distribution<std::size_t> pick(0, allowed.size() - 1);
            const DieFace target(allowed[pick(goals)]);
            previous = target;
            goal = TargetFace{target};
        }
        episodes.push_back(run_episode(plate, policy, goal, decisions, options.episode));
    }
    return summarize(policy_name(policy), options.task, options.episode.max_impulses, std::move(episodes));
}

CampaignReport summarize(std::string policy, Task task, int max_impulses, std::vector<EpisodeResult> episodes)
{
    CampaignReport r;
    r.policy = std::move(policy);
    r.task = task;
    r.max_impulses = max_impulses;
    r.episodes = std::move(episodes);
    std::vector<std::size_t> finished_at(static_cast<std::size_t>(max_impulses) + 1, 0);
    for (const auto& e : r.episodes) {
        if (e.impulses_used)
            ++finished_at.at(static_cast<std::size_t>(*e.impulses_used));
        for (const auto& s : e.steps) {
            auto& c = r.per_solenoid[s.action.solenoid];
            ++c.fired;
            if (s.success)
                ++c.succeeded;
            if (s.observed)
                r.scatter.push_back({s.observed->pose().x, s.observed->pose().y, s.action.solenoid});
        }
    }
    std::size_t running = 0;
    for (int k = 1; k <= max_impulses; ++k) {
        running += finished_at[k];
        r.cumulative_success.push_back(r.episodes.empty() ? 0.0
                                                          : static_cast<double>(running) / r.episodes.size());
    }
    return r;
}

Stratification default_stratification(Task t) noexcept
{
    return t == Task::FaceChange ? Stratification::Pooled : Stratification::ByFace;
}

Hyperparams default_hyperparams(Task t) noexcept
{
    return t == Task::FaceChange ? Hyperparams{8.0, 0.0} : Hyperparams{35.0, 0.3};
}

Hyperparams HarnessSettings::hyperparams() const noexcept
{
    const Hyperparams d = default_hyperparams(task);
    return {r.value_or(d.r), w.value_or(d.w)};
}

Stratification HarnessSettings::effective_stratification() const noexcept
{
    return stratification.value_or(default_stratification(task));
}

namespace {

std::size_t parse_count(const std::string& key, const std::string& value)
{
    const long long v = parse_int(value, key);
    if (v < 0)
        throw ConfigError("config key " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

}  // namespace

void HarnessSettings::apply(const std::map<std::string, std::string>& kv)
{
    std::map<std::string, std::string> plate_keys;
    try {
        for (const auto& [key, value] : kv) {
            if (key == "task")
                task = parse_task(value);
            else if (key == "policy")
                policy = value;
            else if (key == "r")
                r = parse_double(value, key);
            else if (key == "w")
                w = parse_double(value, key);
            else if (key == "angle_mode") {
                if (value != "wrapped" && value != "raw")
                    throw ConfigError("angle_mode must be wrapped or raw");
                angle_mode = value == "raw" ? AngleMode::Raw : AngleMode::Wrapped;
            } else if (key == "neighborhood") {
                if (value != "by-face" && value != "pooled")
                    throw ConfigError("neighborhood must be by-face or pooled");
                stratification = value == "pooled" ? Stratification::Pooled : Stratification::ByFace;
            } else if (key == "max_impulses")
                max_impulses = static_cast<int>(parse_count(key, value));
            else if (key == "recovery_counts") {
                if (value != "true" && value != "false")
                    throw ConfigError("recovery_counts must be true or false");
                recovery_counts = value == "true";
            } else if (key == "rollout_cap")
                rollout_cap = parse_count(key, value);
            else if (key == "min_support")
                min_support = parse_count(key, value);
            else if (key == "n_goals")
                n_goals = parse_count(key, value);
            else if (key == "seed")
                seed = parse_count(key, value);
            else
                plate_keys.emplace(key, value);
        }
        const auto unknown = plate.apply_key_values(plate_keys);
        if (!unknown.empty())
            throw ConfigError("invalid config key '" + unknown.front() + "'");
        plate.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
}

HarnessSettings load_settings(const std::string& path)
{
    HarnessSettings s;
    s.apply(read_key_value_file(path));
    return s;
}

PolicyKind make_policy(const std::string& kind, std::shared_ptr<const NeighborModel> model,
                       const HarnessSettings& settings)
{
    if (kind == "random")
        return RandomPolicy{};
    if (kind != "greedy" && kind != "mpc2")
        throw std::invalid_argument("unknown policy '" + kind + "' (expected random, greedy or mpc2)");
    if (!model)
        throw std::invalid_argument("missing model data: policy " + kind + " needs a trial log");
    if (kind == "greedy")
        return GreedyPolicy{std::move(model), settings.min_support};
    return Mpc2Policy{std::move(model), settings.rollout_cap, settings.min_support};
}

std::array<FaceChangeRate, kNumSolenoids> face_change_rates(const Dataset& d)
{
    std::array<FaceChangeRate, kNumSolenoids> out{};
    for (const auto& t : d.trials) {
        if (!t.valid)
            continue;
        auto& r = out[t.action.solenoid];
        ++r.fired;
        if (t.after.face() != t.before.face())
            ++r.changed;
    }
    return out;
}

namespace {

std::string goal_kind(const GoalSpec& g) { return std::holds_alternative<AnyOtherFace>(g) ? "other" : "target"; }

int goal_face(const GoalSpec& g)
{
    if (const auto* o = std::get_if<AnyOtherFace>(&g))
        return o->reference.value();
    return std::get<TargetFace>(g).target.value();
}

constexpr std::string_view kEpisodesHeader = "episode,goal_kind,goal_face,succeeded,impulses_used,steps";
constexpr std::string_view kStepsHeader =
    "episode,step,recovery,s,x,y,theta,solenoid,duration_ms,leaner,s_prime,x_prime,y_prime,theta_prime,success";

std::string campaign_comment(const CampaignReport& r)
{
    return "# policy=" + r.policy + " task=" + task_name(r.task) +
           " max_impulses=" + std::to_string(r.max_impulses) + "\n";
}

void append_state(std::string& out, const std::optional<DieState>& s)
{
    if (!s) {
        out += ",,,";
        return;
    }
    out += std::to_string(s->face().value()) + ',' + format_double(s->pose().x) + ',' +
           format_double(s->pose().y) + ',' + format_double(s->pose().theta);
}

std::optional<DieState> read_state(const std::vector<std::string>& f, std::size_t at, const std::string& where)
{
    if (trim(f[at]).empty())
        return std::nullopt;
    return DieState(DieFace(static_cast<int>(parse_int(f[at], where))),
                    Pose::make(parse_double(f[at + 1], where), parse_double(f[at + 2], where),
                               parse_double(f[at + 3], where)));
}

struct CsvBody {
    std::map<std::string, std::string> meta;
    std::vector<std::vector<std::string>> rows;
};

CsvBody read_csv(std::string_view text, std::string_view header, std::size_t columns, const std::string& what)
{
    CsvBody body;
    bool header_seen = false;
    for (const auto& raw : split(text, '\n')) {
        const std::string line = trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '#') {
            for (const auto& tok : split(line.substr(1), ' ')) {
                const auto eq = tok.find('=');
                if (eq != std::string::npos)
                    body.meta[tok.substr(0, eq)] = tok.substr(eq + 1);
            }
            continue;
        }
        if (!header_seen) {
            if (line != header)
                throw ParseError(what + ": unexpected header");
            header_seen = true;
            continue;
        }
        auto f = split(line, ',');
        if (f.size() != columns)
            throw ParseError(what + ": expected " + std::to_string(columns) + " fields per row");
        body.rows.push_back(std::move(f));
    }
    if (!header_seen)
        throw ParseError(what + ": missing header");
    return body;
}

}  // namespace

std::string episodes_csv(const CampaignReport& r)
{
    std::string out = campaign_comment(r);
    out += kEpisodesHeader;
    out += '\n';
    for (std::size_t i = 0; i < r.episodes.size(); ++i) {
        const auto& e = r.episodes[i];
        out += std::to_string(i) + ',' + goal_kind(e.goal) + ',' + std::to_string(goal_face(e.goal)) + ',' +
               (e.succeeded() ? '1' : '0') + ',' + (e.impulses_used ? std::to_string(*e.impulses_used) : "") +
               ',' + std::to_string(e.steps.size()) + '\n';
    }
    return out;
}

std::string steps_csv(const CampaignReport& r)
{
    std::string out = campaign_comment(r);
    out += kStepsHeader;
    out += '\n';
    for (std::size_t i = 0; i < r.episodes.size(); ++i) {
        const auto& steps = r.episodes[i].steps;
        for (std::size_t j = 0; j < steps.size(); ++j) {
            const auto& s = steps[j];
            out += std::to_string(i) + ',' + std::to_string(j) + ',' + (s.observed ? '0' : '1') + ',';
            append_state(out, s.observed);
            out += ',' + std::to_string(s.action.solenoid) + ',' + format_double(s.action.duration_ms) + ',' +
                   (s.outcome.is_leaner() ? '1' : '0') + ',';
            append_state(out, s.outcome.state);
            out += ',';
            out += s.success ? '1' : '0';
            out += '\n';
        }
    }
    return out;
}

std::string curve_csv(const std::vector<CampaignReport>& reports)
{
    std::string out = "impulse_count";
    int rows = 0;
    for (const auto& r : reports) {
        out += ',' + r.policy;
        rows = std::max(rows, r.max_impulses);
    }
    out += '\n';
    for (int k = 1; k <= rows; ++k) {
        out += std::to_string(k);
        for (const auto& r : reports) {
            out += ',';
            if (k <= static_cast<int>(r.cumulative_success.size()))
                out += format_double(r.cumulative_success[k - 1]);
        }
        out += '\n';
    }
    return out;
}

std::string histogram_csv(const std::vector<CampaignReport>& reports)
{
    std::string out = "policy,solenoid,fired,succeeded\n";
    for (const auto& r : reports)
        for (int s = 0; s < kNumSolenoids; ++s)
            out += r.policy + ',' + std::to_string(s) + ',' + std::to_string(r.per_solenoid[s].fired) + ',' +
                   std::to_string(r.per_solenoid[s].succeeded) + '\n';
    return out;
}

std::string scatter_csv(const std::vector<CampaignReport>& reports)
{
    std::string out = "policy,x,y,solenoid\n";
    for (const auto& r : reports)
        for (const auto& p : r.scatter)
            out += r.policy + ',' + format_double(p.x) + ',' + format_double(p.y) + ',' +
                   std::to_string(p.solenoid) + '\n';
    return out;
}

CampaignReport parse_campaign(std::string_view episodes_text, std::string_view steps_text)
{
    const CsvBody eps = read_csv(episodes_text, kEpisodesHeader, 6, "episodes file");
    const CsvBody steps = read_csv(steps_text, kStepsHeader, 15, "steps file");
    if (!eps.meta.count("policy") || !eps.meta.count("task") || !eps.meta.count("max_impulses"))
        throw ParseError("episodes file: missing '# policy=... task=... max_impulses=...' line");

    std::vector<EpisodeResult> episodes;
    for (const auto& f : eps.rows) {
        const DieFace face(static_cast<int>(parse_int(f[2], "goal_face")));
        GoalSpec goal = f[1] == "other" ? GoalSpec(AnyOtherFace{face}) : GoalSpec(TargetFace{face});
        EpisodeResult e{goal, std::nullopt, {}};
        if (parse_int(f[3], "succeeded") != 0)
            e.impulses_used = static_cast<int>(parse_int(f[4], "impulses_used"));
        episodes.push_back(std::move(e));
    }
    for (const auto& f : steps.rows) {
        const auto ep = static_cast<std::size_t>(parse_int(f[0], "episode"));
        if (ep >= episodes.size())
            throw ParseError("steps file: episode " + std::to_string(ep) + " not in episodes file");
        StepRecord s{read_state(f, 3, "steps file"),
                     Action::make(static_cast<int>(parse_int(f[7], "solenoid")), parse_double(f[8], "duration_ms")),
                     Observation::leaner(), parse_int(f[14], "success") != 0};
        if (parse_int(f[9], "leaner") == 0)
            s.outcome = Observation::valid(*read_state(f, 10, "steps file"));
        episodes[ep].steps.push_back(std::move(s));
    }
    return summarize(eps.meta.at("policy"), parse_task(eps.meta.at("task")),
                     static_cast<int>(parse_int(eps.meta.at("max_impulses"), "max_impulses")), std::move(episodes));
}

}  // namespace thumper

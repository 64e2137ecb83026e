#include "thumper/harness.hpp"
#include "thumper/text_io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

using namespace thumper;

namespace {

PlateConfig no_leaners()
{
    PlateConfig c = default_config();
    c.leaner_prob = 0.0;
    return c;
}

// A log claiming that an 8 ms tap on solenoid 0 always changes the face.
std::shared_ptr<const NeighborModel> lying_model()
{
    Dataset d;
    for (int i = 0; i < 10; ++i) {
        const DieState before(DieFace(1 + i % 6), Pose::make(i - 5.0, 0, 0));
        const DieState after(DieFace(1 + (i + 1) % 6), Pose::make(i - 5.0, 0, 0));
        d.trials.push_back(Trial{before, Action{0, 8.0}, after, true, 0, i});
    }
    return std::make_shared<const NeighborModel>(d, ScalarizedMetric{0.0}, 1000.0, Stratification::Pooled);
}

const Dataset& fixture()
{
    static const Dataset d = collect(default_config(), 20000, 41);
    return d;
}

}  // namespace

TEST(Episode, FirstImpulseSuccessUsesOne)
{
    // Find a start where the first random impulse succeeds.
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Plate plate(no_leaners(), seed);
        const DieFace start = plate.settle().face();
        Rng rng(seed);
        const EpisodeResult e = run_episode(plate, RandomPolicy{}, AnyOtherFace{start}, rng);
        if (e.steps.size() != 1 || !e.succeeded())
            continue;
        EXPECT_EQ(e.impulses_used, 1);
        EXPECT_TRUE(e.steps[0].success);
        EXPECT_NE(e.steps[0].outcome.state->face(), start);
        return;
    }
    FAIL() << "no first-impulse success in 200 episodes";
}

TEST(Episode, NeverRollingPolicyHitsTheCap)
{
    Plate plate(no_leaners(), 3);
    const DieFace start = plate.settle().face();
    Rng rng(3);
    for (int cap : {1, 4, 10}) {
        const EpisodeResult e = run_episode(plate, GreedyPolicy{lying_model()}, AnyOtherFace{start}, rng,
                                            EpisodeOptions{cap, true});
        EXPECT_FALSE(e.succeeded());
        ASSERT_EQ(e.steps.size(), static_cast<std::size_t>(cap));
        for (const auto& s : e.steps) {
            EXPECT_EQ(s.action, (Action{0, 8.0}));
            EXPECT_FALSE(s.success);
        }
    }
    EXPECT_THROW(run_episode(plate, RandomPolicy{}, AnyOtherFace{start}, rng, EpisodeOptions{0, true}),
                 std::invalid_argument);
}

TEST(Episode, RecoveryCounting)
{
    PlateConfig c = default_config();
    c.leaner_prob = 0.3;
    for (bool counts : {true, false}) {
        const CampaignReport r = run_campaign(c, RandomPolicy{}, {Task::TargetFace, 300, {10, counts}}, 5);
        std::size_t recoveries = 0;
        for (const auto& e : r.episodes) {
            std::size_t rec = 0;
            for (const auto& s : e.steps)
                rec += s.observed ? 0 : 1;
            recoveries += rec;
            const std::size_t counted = e.steps.size() - (counts ? 0 : rec);
            if (e.succeeded()) {
                EXPECT_EQ(static_cast<std::size_t>(*e.impulses_used), counted);
            } else {
                EXPECT_EQ(counted, 10u);
            }
            // A leaner is always followed by a recovery impulse.
            for (std::size_t j = 0; j + 1 < e.steps.size(); ++j)
                EXPECT_EQ(e.steps[j].outcome.is_leaner(), !e.steps[j + 1].observed.has_value());
        }
        EXPECT_GT(recoveries, 0u);
    }
}

TEST(Campaign, DeterministicReplay)
{
    const CampaignOptions opt{Task::TargetFace, 100, {}};
    const auto model = std::make_shared<const NeighborModel>(fixture(), ScalarizedMetric{0.3}, 35.0);
    for (const PolicyKind& p : {PolicyKind(RandomPolicy{}), PolicyKind(GreedyPolicy{model})}) {
        const CampaignReport a = run_campaign(default_config(), p, opt, 9);
        const CampaignReport b = run_campaign(default_config(), p, opt, 9);
        EXPECT_EQ(steps_csv(a), steps_csv(b));
        EXPECT_EQ(episodes_csv(a), episodes_csv(b));
        EXPECT_NE(steps_csv(a), steps_csv(run_campaign(default_config(), p, opt, 10)));
    }
}

TEST(Campaign, GoalSequence)
{
    const CampaignReport r = run_campaign(default_config(), RandomPolicy{}, {Task::TargetFace, 500, {}}, 13);
    ASSERT_EQ(r.episodes.size(), 500u);
    std::array<int, 7> per_face{};
    for (std::size_t i = 0; i < r.episodes.size(); ++i) {
        const auto& e = r.episodes[i];
        const DieFace goal = std::get<TargetFace>(e.goal).target;
        ++per_face[goal.value()];
        ASSERT_TRUE(e.steps.front().observed);
        EXPECT_NE(e.steps.front().observed->face(), goal);
        if (i > 0) {
            EXPECT_NE(std::get<TargetFace>(r.episodes[i - 1].goal).target, goal);
        }
    }
    for (int f = 1; f <= 6; ++f)
        EXPECT_GT(per_face[f], 40);

    const CampaignReport fc = run_campaign(default_config(), RandomPolicy{}, {Task::FaceChange, 50, {}}, 13);
    for (const auto& e : fc.episodes)
        EXPECT_EQ(std::get<AnyOtherFace>(e.goal).reference, e.steps.front().observed->face());
}

TEST(Campaign, CurveAndCountsAreConsistent)
{
    const CampaignReport r = run_campaign(default_config(), RandomPolicy{}, {Task::TargetFace, 2000, {}}, 18);
    ASSERT_EQ(r.cumulative_success.size(), 10u);
    std::size_t successes = 0;
    for (int k = 1; k <= 10; ++k) {
        std::size_t within = 0;
        for (const auto& e : r.episodes)
            within += e.impulses_used && *e.impulses_used <= k ? 1 : 0;
        EXPECT_DOUBLE_EQ(r.cumulative_success[k - 1], double(within) / 2000.0);
        if (k > 1) {
            EXPECT_GE(r.cumulative_success[k - 1], r.cumulative_success[k - 2]);
        }
        successes = within;
    }
    EXPECT_LE(r.cumulative_success.back(), 1.0);

    std::size_t fired = 0, succeeded = 0;
    for (const auto& c : r.per_solenoid) {
        fired += c.fired;
        succeeded += c.succeeded;
    }
    EXPECT_EQ(fired, r.total_impulses());
    EXPECT_EQ(succeeded, successes);

    // Random firing: each solenoid within three binomial deviations of n/7.
    // Stopping on success correlates the counts, so the spread runs a bit wider than binomial.
    const double n = double(fired), sigma = std::sqrt(n * (1.0 / 7.0) * (6.0 / 7.0));
    for (const auto& c : r.per_solenoid)
        EXPECT_NEAR(double(c.fired), n / 7.0, 3.0 * sigma);
}

TEST(Campaign, ExportRoundTrip)
{
    PlateConfig c = default_config();
    c.leaner_prob = 0.1;
    const CampaignReport r = run_campaign(c, RandomPolicy{}, {Task::TargetFace, 200, {}}, 19);
    const CampaignReport back = parse_campaign(episodes_csv(r), steps_csv(r));
    EXPECT_EQ(episodes_csv(back), episodes_csv(r));
    EXPECT_EQ(steps_csv(back), steps_csv(r));
    EXPECT_EQ(back.cumulative_success, r.cumulative_success);
    EXPECT_EQ(back.policy, "random");

    const std::string curve = curve_csv({r, back});
    EXPECT_EQ(std::count(curve.begin(), curve.end(), '\n'), 11);
    const std::string hist = histogram_csv({r});
    EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 1 + kNumSolenoids);
    const std::string scatter = scatter_csv({r});
    EXPECT_EQ(static_cast<std::size_t>(std::count(scatter.begin(), scatter.end(), '\n')), 1 + r.scatter.size());

    EXPECT_THROW(parse_campaign("nope\n", steps_csv(r)), ParseError);
    std::string eps = episodes_csv(r);
    eps.erase(0, eps.find('\n') + 1);  // drop the metadata line
    EXPECT_THROW(parse_campaign(eps, steps_csv(r)), ParseError);
}

TEST(FaceChangeRates, MatchRecount)
{
    const auto rates = face_change_rates(fixture());
    for (int s = 0; s < kNumSolenoids; ++s) {
        std::size_t fired = 0, changed = 0;
        for (const auto& t : fixture().trials)
            if (t.valid && t.action.solenoid == s) {
                ++fired;
                changed += t.after.face() == t.before.face() ? 0 : 1;
            }
        EXPECT_EQ(rates[s].fired, fired);
        EXPECT_EQ(rates[s].changed, changed);
    }

    Dataset stuck;
    for (int s = 0; s < kNumSolenoids; ++s) {
        const DieState q(DieFace(2), Pose{});
        stuck.trials.push_back(Trial{q, Action{s, 8.0}, q, true, 0, s});
    }
    for (const auto& r : face_change_rates(stuck))
        EXPECT_DOUBLE_EQ(r.rate(), 0.0);
    EXPECT_DOUBLE_EQ(FaceChangeRate{}.rate(), 0.0);
}

TEST(Settings, DefaultsAndOverrides)
{
    HarnessSettings s;
    EXPECT_EQ(s.effective_stratification(), Stratification::ByFace);
    EXPECT_DOUBLE_EQ(s.hyperparams().r, default_hyperparams(Task::TargetFace).r);

    s.apply({{"task", "face-change"}});
    EXPECT_EQ(s.task, Task::FaceChange);
    EXPECT_EQ(s.effective_stratification(), Stratification::Pooled);
    EXPECT_DOUBLE_EQ(s.hyperparams().r, 8.0);
    EXPECT_DOUBLE_EQ(s.hyperparams().w, 0.0);

    s.apply({{"r", "5"}, {"w", "2.5"}, {"neighborhood", "by-face"}, {"angle_mode", "raw"}, {"policy", "mpc2"},
             {"max_impulses", "6"}, {"recovery_counts", "false"}, {"rollout_cap", "20"}, {"min_support", "4"},
             {"n_goals", "30"}, {"seed", "77"}, {"leaner_prob", "0.05"}});
    EXPECT_DOUBLE_EQ(s.hyperparams().r, 5.0);
    EXPECT_DOUBLE_EQ(s.hyperparams().w, 2.5);
    EXPECT_EQ(s.effective_stratification(), Stratification::ByFace);
    EXPECT_EQ(s.angle_mode, AngleMode::Raw);
    EXPECT_EQ(s.policy, "mpc2");
    EXPECT_EQ(s.max_impulses, 6);
    EXPECT_FALSE(s.recovery_counts);
    EXPECT_EQ(s.rollout_cap, 20u);
    EXPECT_EQ(s.min_support, 4u);
    EXPECT_EQ(s.n_goals, 30u);
    EXPECT_EQ(s.seed, 77u);
    EXPECT_DOUBLE_EQ(s.plate.leaner_prob, 0.05);
}

TEST(Settings, Errors)
{
    HarnessSettings s;
    EXPECT_THROW(s.apply({{"bogus_key", "1"}}), ConfigError);
    EXPECT_THROW(s.apply({{"max_impulses", "ten"}}), ConfigError);
    EXPECT_THROW(s.apply({{"task", "juggle"}}), ConfigError);
    EXPECT_THROW(s.apply({{"neighborhood", "everything"}}), ConfigError);
    EXPECT_THROW(s.apply({{"leaner_prob", "1.5"}}), ConfigError);
    try {
        s.apply({{"bogus_key", "1"}});
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("bogus_key"), std::string::npos);
    }

    EXPECT_THROW(load_settings("/nonexistent/run.cfg"), FileError);
    const auto path = (std::filesystem::temp_directory_path() / "thumper_settings.cfg").string();
    std::ofstream(path) << "# plate\ntask = face-change\nseed = 4\nleaner_prob = 0.01\n";
    const HarnessSettings loaded = load_settings(path);
    EXPECT_EQ(loaded.task, Task::FaceChange);
    EXPECT_EQ(loaded.seed, 4u);
    EXPECT_DOUBLE_EQ(loaded.plate.leaner_prob, 0.01);
    std::filesystem::remove(path);
}

TEST(Settings, MakePolicy)
{
    HarnessSettings s;
    s.rollout_cap = 7;
    EXPECT_EQ(policy_name(make_policy("random", nullptr, s)), "random");
    EXPECT_THROW(make_policy("greedy", nullptr, s), std::invalid_argument);
    EXPECT_THROW(make_policy("mpc2", nullptr, s), std::invalid_argument);
    EXPECT_THROW(make_policy("oracle", lying_model(), s), std::invalid_argument);
    const PolicyKind m = make_policy("mpc2", lying_model(), s);
    ASSERT_TRUE(std::holds_alternative<Mpc2Policy>(m));
    EXPECT_EQ(std::get<Mpc2Policy>(m).rollout_cap, 7u);
    EXPECT_EQ(policy_name(make_policy("greedy", lying_model(), s)), "greedy");
}

TEST(Seeds, DerivedStreamsDiffer)
{
    EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
    EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}

#include "thumper/simulator.hpp"
#include "thumper/trial_store.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace thumper;

namespace {

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

DieState at(double x, double y, double theta, int face = 3) { return DieState(DieFace(face), Pose::make(x, y, theta)); }

}  // namespace

TEST(PlateConfig, DefaultLayout)
{
    const PlateConfig c = default_config();
    EXPECT_EQ(c.solenoid_xy[2], (Point2{0.0, 0.0}));
    EXPECT_NEAR(c.solenoid_xy[0].x, -60.0, 1e-12);
    EXPECT_NEAR(c.solenoid_xy[0].y, 0.0, 1e-12);
    for (int i = 0; i < kNumSolenoids; ++i) {
        if (i == kCenterSolenoid)
            continue;
        EXPECT_NEAR(dist(c.solenoid_xy[i], c.solenoid_xy[2]), 60.0, 1e-9);
        double nearest = 1e9;
        for (int j = 0; j < kNumSolenoids; ++j)
            if (j != i && j != kCenterSolenoid)
                nearest = std::min(nearest, dist(c.solenoid_xy[i], c.solenoid_xy[j]));
        EXPECT_NEAR(nearest, 60.0, 1e-9) << "solenoid " << i;
    }
    // Counterclockwise numbering 0, 1, 3, 4, 5, 6.
    const int ring[] = {0, 1, 3, 4, 5, 6};
    for (int k = 0; k < 6; ++k) {
        const Point2 p = c.solenoid_xy[ring[k]];
        const double expected = std::fmod(180.0 + 60.0 * k, 360.0);
        EXPECT_NEAR(normalize_degrees(std::atan2(p.y, p.x) * 180.0 / M_PI), expected, 1e-9);
    }
    EXPECT_GT(c.corral_inradius, 60.0);
    for (double p : {c.wall_restitution, c.double_roll_prob, c.leaner_prob, c.roll_prob_cap})
        EXPECT_TRUE(p >= 0.0 && p <= 1.0);
    EXPECT_NO_THROW(c.validate());
}

TEST(PlateConfig, RejectsBadValues)
{
    PlateConfig c = default_config();
    c.leaner_prob = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = default_config();
    c.solenoid_xy[4] = {200.0, 0.0};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = default_config();
    c.roll_annulus_sd = 0.0;
    EXPECT_THROW(Simulator{c}, std::invalid_argument);
}

TEST(PlateConfig, KeyValueRoundTrip)
{
    PlateConfig c = default_config();
    c.leaner_prob = 0.125;
    c.solenoid_xy[5] = {1.5, -2.25};
    PlateConfig back = default_config();
    EXPECT_TRUE(back.apply_key_values(c.to_key_values()).empty());
    EXPECT_EQ(back, c);
    EXPECT_EQ(back.digest(), c.digest());
    EXPECT_NE(default_config().digest(), c.digest());

    auto unknown = back.apply_key_values({{"no_such_key", "1"}, {"leaner_prob", "0.5"}});
    ASSERT_EQ(unknown.size(), 1u);
    EXPECT_EQ(unknown[0], "no_such_key");
    EXPECT_DOUBLE_EQ(back.leaner_prob, 0.5);
}

TEST(Corral, Geometry)
{
    const Corral k(90.0);
    EXPECT_NEAR(k.area(), 2.0 * std::sqrt(3.0) * 90.0 * 90.0, 1e-6);
    EXPECT_NEAR(k.wall_distance({0, 0}), 90.0, 1e-12);
    EXPECT_NEAR(k.wall_distance({80, 0}), 10.0, 1e-12);
    EXPECT_EQ(k.nearest_wall({80, 0}), 0);
    EXPECT_EQ(k.nearest_wall({40, 69}), 1);
    EXPECT_EQ(k.nearest_wall({-80, -5}), 3);
    EXPECT_FALSE(k.contains({95, 0}));
    const Point2 inside{10, 20};
    EXPECT_EQ(k.reflect(inside, 0.3), inside);
    const Point2 r = k.reflect({100, 0}, 0.5);
    EXPECT_NEAR(r.x, 85.0, 1e-9);
    EXPECT_NEAR(r.y, 0.0, 1e-9);
    EXPECT_NEAR(k.reflect({100, 0}, 0.0).x, 90.0, 1e-9);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i)
        EXPECT_TRUE(k.contains(k.reflect(k.sample_uniform(rng), 0.3)));
    // Far outside in a corner still lands inside.
    EXPECT_TRUE(k.contains(k.reflect({400, 350}, 1.0)));
}

TEST(Kinematics, EdgeTowardHeading)
{
    for (double theta : {0.0, 33.0, 271.0}) {
        EXPECT_EQ(edge_toward(theta, theta), RollDirection::East);
        EXPECT_EQ(edge_toward(theta + 90.0, theta), RollDirection::North);
        EXPECT_EQ(edge_toward(theta + 180.0, theta), RollDirection::West);
        EXPECT_EQ(edge_toward(theta + 270.0 + 30.0, theta), RollDirection::South);
        EXPECT_EQ(edge_toward(theta - 40.0, theta), RollDirection::East);
    }
}

TEST(Kinematics, CanonicalizeKeepsBody)
{
    for (const auto& o : CubeOrientation::all()) {
        for (double theta : {0.0, 17.0, 300.0}) {
            const DieState s = canonicalize(o, {1, 2}, theta);
            EXPECT_EQ(s.orientation(), CubeOrientation::upright(o.top()));
            EXPECT_EQ(s.face(), o.top());
            // Same physical body: heading moves by whole quarter turns only.
            const double turn = std::fmod(normalize_degrees(s.pose().theta - theta), 90.0);
            EXPECT_TRUE(turn < 1e-9 || turn > 90.0 - 1e-9);
        }
    }
}

TEST(Step, ShortestImpulseNeverRolls)
{
    const Simulator sim(default_config());
    SimState st(at(-30, 10, 45), 3);
    for (int i = 0; i < 2000; ++i) {
        const DieState before = st.truth();
        StepTrace tr;
        const Observation obs = sim.step(st, Action{i % 7, kMinDurationMs}, &tr);
        EXPECT_EQ(tr.roll_prob, 0.0);
        if (tr.leaner)
            continue;
        ASSERT_FALSE(obs.is_leaner());
        EXPECT_EQ(st.truth().face(), before.face());
        // Only the noise terms move it.
        EXPECT_LT(std::hypot(st.truth().pose().x - before.pose().x, st.truth().pose().y - before.pose().y), 12.0);
    }
}

TEST(Step, Deterministic)
{
    const Simulator sim(default_config());
    SimState a(at(10, -20, 100), 42), b(at(10, -20, 100), 42);
    for (int i = 0; i < 500; ++i) {
        const Action act{i % 7, 8.0 + (i % 18)};
        const Observation oa = sim.step(a, act), ob = sim.step(b, act);
        ASSERT_EQ(oa.state, ob.state);
        ASSERT_EQ(a, b);
    }
}

TEST(Step, RejectsInvalidAction)
{
    const Simulator sim(default_config());
    SimState st(at(0, 0, 0), 1);
    EXPECT_THROW(sim.step(st, Action{7, 10}), std::invalid_argument);
    EXPECT_THROW(sim.step(st, Action{1, 30}), std::invalid_argument);
}

TEST(Step, RollFrequencyMatchesClosedForm)
{
    const Simulator sim(default_config());
    const DieState start = at(-35, 0, 0);
    const Action act{0, 20.0};
    const double expected = sim.roll_probability(start, act);
    // Hand-evaluated kernel: 1.5 * (12/17) * exp(-(25-50)^2 / (2*30^2)).
    EXPECT_NEAR(expected, 1.5 * (12.0 / 17.0) * std::exp(-625.0 / 1800.0), 1e-12);
    SimState st(start, 9);
    int changed = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        st.set_truth(start);
        const Observation obs = sim.step(st, act);
        ASSERT_FALSE(obs.is_leaner());  // 55 mm from the nearest wall
        changed += obs.state->face() != start.face() ? 1 : 0;
    }
    EXPECT_NEAR(static_cast<double>(changed) / n, expected, 0.02);
}

TEST(Step, CenterSolenoidIsWeaker)
{
    const Simulator sim(default_config());
    // Same distance from solenoid 2 and from solenoid 0, short enough to stay below the cap.
    const double weak = sim.roll_probability(at(30, 0, 0), Action{kCenterSolenoid, 12});
    const double strong = sim.roll_probability(at(-30, 0, 0), Action{0, 12});
    ASSERT_LT(strong, default_config().roll_prob_cap);
    EXPECT_NEAR(weak, 0.5 * strong, 1e-12);
}

TEST(Observe, NoiseLevels)
{
    PlateConfig quiet = default_config();
    quiet.obs_noise_xy = 0.0;
    quiet.obs_noise_theta = 0.0;
    SimState st(at(12.5, -7.25, 33), 5);
    const Observation exact = Simulator(quiet).observe(st);
    EXPECT_EQ(*exact.state, st.truth());

    const Simulator sim(default_config());
    double sx = 0, sxx = 0, st_ = 0, stt = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const DieState s = *sim.observe(st).state;
        EXPECT_EQ(s.face(), st.truth().face());
        const double dx = s.pose().x - 12.5;
        const double dt = s.pose().theta - 33.0;
        sx += dx;
        sxx += dx * dx;
        st_ += dt;
        stt += dt * dt;
    }
    const double sd_x = std::sqrt(sxx / n - (sx / n) * (sx / n));
    const double sd_t = std::sqrt(stt / n - (st_ / n) * (st_ / n));
    EXPECT_NEAR(sd_x, 0.5, 0.1);
    EXPECT_NEAR(sd_t, 0.5, 0.1);
}

TEST(Oracle, Cases)
{
    const Simulator sim(default_config());
    const DieState s = at(-35, 0, 0);
    EXPECT_EQ(sim.oracle_success_prob(s, Action{0, 8}, AnyOtherFace{DieFace(3)}, 2000), 0.0);
    EXPECT_THROW(sim.oracle_success_prob(s, Action{0, 8}, AnyOtherFace{DieFace(3)}, 0), std::invalid_argument);

    // Pinned regression value, and within sampling error of the closed form (no leaners this far from a wall).
    const int n = 20000;
    const double any = sim.oracle_success_prob(s, Action{0, 20}, AnyOtherFace{DieFace(3)}, n);
    EXPECT_DOUBLE_EQ(any, 0.7535);
    EXPECT_NEAR(any, sim.roll_probability(s, Action{0, 20}), 3.0 * 0.5 / std::sqrt(n));

    const double se = 0.5 / std::sqrt(double(n));
    for (int f : {1, 2, 5, 6}) {
        const double t = sim.oracle_success_prob(s, Action{0, 20}, TargetFace{DieFace(f)}, n, 11);
        EXPECT_LE(t, any + 2.0 * se);
    }
}

TEST(Invariants, ContainmentAndFaceConsistency)
{
    const Simulator sim(default_config());
    SimState st = SimState::dropped(default_config(), 77);
    Rng rng(78);
    const Corral& k = sim.corral();
    for (int i = 0; i < 20000; ++i) {
        const Observation obs = sim.step(st, random_action(rng));
        ASSERT_TRUE(k.contains({st.truth().pose().x, st.truth().pose().y}));
        if (obs.is_leaner())
            continue;
        ASSERT_TRUE(k.contains({obs.state->pose().x, obs.state->pose().y}));
        ASSERT_EQ(obs.state->orientation().top(), obs.state->face());
        ASSERT_GE(obs.state->pose().theta, 0.0);
        ASSERT_LT(obs.state->pose().theta, 360.0);
    }
}

TEST(Invariants, EdgeBiasAndWeakCenter)
{
    const Dataset d = collect(default_config(), 20000, 2024);
    EXPECT_GE(edge_center_density_ratio(d, Corral(90.0)), 2.0);
    double fired[kNumSolenoids] = {}, changed[kNumSolenoids] = {}, rates[kNumSolenoids] = {};
    for (const auto& t : d.trials) {
        if (!t.valid)
            continue;
        fired[t.action.solenoid] += 1;
        changed[t.action.solenoid] += t.after.face() != t.before.face() ? 1 : 0;
    }
    for (int s = 0; s < kNumSolenoids; ++s)
        rates[s] = changed[s] / fired[s];
    double peripheral = 0.0;
    for (int s = 0; s < kNumSolenoids; ++s)
        if (s != kCenterSolenoid)
            peripheral += rates[s] / 6.0;
    EXPECT_LT(rates[kCenterSolenoid], peripheral);
}

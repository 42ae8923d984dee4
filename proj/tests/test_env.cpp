#include <doctest.h>

#include <cmath>

#include "crossway/curriculum.hpp"
#include "crossway/env.hpp"
#include "crossway/errors.hpp"
#include "crossway/rng.hpp"

using namespace crossway;

namespace {

ScenarioSpec zero_traffic_scenario(std::uint64_t seed = 1) {
    GenerationConfig cfg;
    cfg.num_targets = 0;
    cfg.goal_branch = GoalBranch::Straight;  // keeps the whole path straight
    return generate_four_way(seed, cfg);
}

}  // namespace

TEST_CASE("reset observation basics") {
    const ScenarioSpec spec = zero_traffic_scenario();
    Environment env(spec);
    const Observation obs = env.reset();

    // ego at rest: v, prev accel, prev steer all zero
    CHECK(obs.values[obs_idx::kSpeed] == 0.0);
    CHECK(obs.values[obs_idx::kPrevAccel] == 0.0);
    CHECK(obs.values[obs_idx::kPrevSteer] == 0.0);

    // zero traffic: whole target block zero-padded
    for (int k = obs_idx::kTargets; k < kObsDim; ++k) {
        CHECK(obs.values[k] == 0.0);
    }

    // lane-aligned centerline spawn
    CHECK(obs.values[obs_idx::kPathHeadingErr] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(obs.values[obs_idx::kCenterOffset] == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(obs.values[obs_idx::kTimeRemaining] == doctest::Approx(1.0));
}

TEST_CASE("stationary ego earns zero reward and keeps running") {
    Environment env(zero_traffic_scenario());
    env.reset();
    const StepOutcome out = env.step({0.0, 0.0});
    CHECK(out.reward == doctest::Approx(0.0));
    CHECK_FALSE(out.done);
    CHECK(out.termination == Termination::Running);
}

TEST_CASE("forward progress is rewarded at rho1 per metre") {
    Environment env(zero_traffic_scenario());
    env.reset();
    // accelerate straight along the lane; sum of rewards ~ rho1 * distance
    double total = 0.0;
    double v = 0.0;
    double dist = 0.0;
    for (int k = 0; k < 20; ++k) {
        const StepOutcome out = env.step({2.0, 0.0});
        total += out.reward;
        dist += v * 0.1 + 0.5 * 2.0 * 0.01;
        v += 0.2;
    }
    CHECK(total == doctest::Approx(10.0 * dist).epsilon(1e-3));
}

TEST_CASE("constraint violation terminates without advancing state") {
    Environment env(zero_traffic_scenario());
    env.reset();
    const EgoState before = env.ego();
    const StepOutcome out = env.step({0.0, 0.9});  // steer rate breach
    CHECK(out.done);
    CHECK(out.termination == Termination::ConstraintViolation);
    CHECK(out.reward == doctest::Approx(-50.0));
    CHECK(env.ego().x == before.x);
    CHECK(env.ego().v == before.v);
    CHECK_THROWS_AS(env.step({0.0, 0.0}), EpisodeFinished);
}

TEST_CASE("timeout adds sigma2") {
    GenerationConfig cfg;
    cfg.num_targets = 0;
    cfg.timeout_steps = 5;
    const ScenarioSpec spec = generate_four_way(1, cfg);
    Environment env(spec);
    env.reset();
    StepOutcome out;
    for (int k = 0; k < 5; ++k) out = env.step({0.0, 0.0});
    CHECK(out.done);
    CHECK(out.termination == Termination::Timeout);
    CHECK(out.reward == doctest::Approx(-30.0));
}

TEST_CASE("check_goal center containment and heading tolerance") {
    GoalRegion goal;
    goal.center = {10.0, 5.0};
    goal.half_extents = {5.0, 1.75};
    goal.orientation = M_PI / 2;

    EgoState ego;
    ego.x = 10.0;
    ego.y = 5.0;
    ego.theta = M_PI / 2;
    CHECK(check_goal(ego, goal));

    ego.theta = M_PI / 2 + 0.25;  // beyond the 0.1999 rad tolerance
    CHECK_FALSE(check_goal(ego, goal));

    ego.theta = M_PI / 2;
    ego.x = 10.0 + 1.75 + 0.01;  // just outside the short side
    CHECK_FALSE(check_goal(ego, goal));
}

TEST_CASE("collision examples") {
    OrientedRect a{{0, 0}, 2.254, 0.805, 0.0};
    CHECK(collide(a, a));
    OrientedRect far{{10, 0}, 2.254, 0.805, 0.0};
    CHECK_FALSE(collide(a, far));
}

TEST_CASE("off-road detection") {
    const ScenarioSpec spec = zero_traffic_scenario();
    Environment env(spec);
    env.reset();
    CHECK_FALSE(off_road(env.ego_footprint(), spec.network));
    OrientedRect shifted = env.ego_footprint();
    shifted.center = shifted.center + Vec2{2 * 3.5, 0.0}.rotated(
                                          env.ego().theta + M_PI / 2);
    CHECK(off_road(shifted, spec.network));
}

TEST_CASE("ego-frame transform maps a co-located target to (0,0,v,0)") {
    GenerationConfig cfg;
    cfg.num_targets = 1;
    ScenarioSpec spec = generate_four_way(2, cfg);
    // overwrite the target with a constant state equal to the ego pose
    TargetTrajectory t;
    t.spawn_step = 0;
    TargetState s;
    s.x = spec.ego_init.x;
    s.y = spec.ego_init.y;
    s.theta = spec.ego_init.theta;
    s.v = 4.2;
    t.states.assign(spec.timeout_steps + 1, s);
    spec.targets = {t};
    Environment env(spec);
    const Observation obs = env.reset();
    CHECK(obs.values[obs_idx::target(0, 0, 0)] == doctest::Approx(0.0));
    CHECK(obs.values[obs_idx::target(0, 0, 1)] == doctest::Approx(0.0));
    CHECK(obs.values[obs_idx::target(0, 0, 2)] == doctest::Approx(4.2));
    CHECK(obs.values[obs_idx::target(0, 0, 3)] == doctest::Approx(0.0));
}

TEST_CASE("collision with a co-located target terminates with sigma1") {
    GenerationConfig cfg;
    cfg.num_targets = 1;
    ScenarioSpec spec = generate_four_way(2, cfg);
    TargetTrajectory t;
    t.spawn_step = 0;
    TargetState s;
    s.x = spec.ego_init.x;
    s.y = spec.ego_init.y;
    s.theta = spec.ego_init.theta;
    s.v = 0.0;
    t.states.assign(spec.timeout_steps + 1, s);
    spec.targets = {t};
    Environment env(spec);
    env.reset();
    const StepOutcome out = env.step({0.0, 0.0});
    CHECK(out.done);
    CHECK(out.termination == Termination::Collision);
    CHECK(out.reward == doctest::Approx(-50.0));
}

TEST_CASE("masking future step k zeroes exactly its 20 indices") {
    Rng rng(6);
    Observation obs;
    for (double& v : obs.values) v = rng.uniform(0.5, 1.5);
    for (int k = 1; k <= 4; ++k) {
        Observation masked = obs;
        mask_future_step(masked, k);
        int zeros = 0;
        for (int i = 0; i < kObsDim; ++i) {
            if (masked.values[i] == 0.0) {
                ++zeros;
                const int rel = i - obs_idx::kTargets;
                CHECK(rel >= 0);
                CHECK((rel % 20) / 4 == k);
            } else {
                CHECK(masked.values[i] == obs.values[i]);
            }
        }
        CHECK(zeros == 20);
    }
    CHECK(static_cast<int>(obs.values.size()) == 129);
}

TEST_CASE("episode trace is deterministic in scenario and actions") {
    const ScenarioSpec spec = zero_traffic_scenario(9);
    Rng rng(1);
    std::vector<ControlAction> actions;
    for (int k = 0; k < 50; ++k) {
        actions.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-0.03, 0.03)});
    }
    const auto run = [&] {
        Environment env(spec);
        env.reset();
        std::vector<double> xs;
        for (const auto& a : actions) {
            if (env.done()) break;
            const StepOutcome out = env.step(a);
            xs.push_back(env.ego().x);
            xs.push_back(out.reward);
        }
        return xs;
    };
    CHECK(run() == run());
}

#include <doctest.h>

#include <cmath>

#include "crossway/dynamics.hpp"
#include "crossway/geometry.hpp"
#include "crossway/rng.hpp"

using namespace crossway;

TEST_CASE("check_constraints rules") {
    VehicleParams p;
    EgoState rest;
    CHECK_FALSE(check_constraints({0.0, 0.0}, rest, p, 0.1));
    CHECK(check_constraints({0.0, p.steer_max + 0.01}, rest, p, 0.1));

    VehicleParams slow_steer = p;
    slow_steer.steer_rate_max = 1.0;
    EgoState s;
    s.prev_steer = 0.0;
    CHECK(check_constraints({0.0, 0.2}, s, slow_steer, 0.1));  // rate 2 > 1
    CHECK_FALSE(check_constraints({0.0, 0.05}, s, slow_steer, 0.1));

    CHECK(check_constraints({p.accel_max + 0.1, 0.0}, rest, p, 0.1));
    CHECK(check_constraints({-p.decel_max - 0.1, 0.0}, rest, p, 0.1));

    EgoState fast;
    fast.v = p.v_max - 0.1;
    CHECK(check_constraints({2.0, 0.0}, fast, p, 0.1));  // v would exceed v_max
    // over-braking past standstill is clamped, not a violation
    EgoState crawling;
    crawling.v = 0.5;
    CHECK_FALSE(check_constraints({-8.0, 0.0}, crawling, p, 0.1));
}

TEST_CASE("straight-line step is exact") {
    VehicleParams p;
    EgoState s;
    s.v = 10.0;
    const EgoState out = step_ks1(s, {0.0, 0.0}, p, 0.1);
    CHECK(out.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.theta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out.v == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("constant acceleration matches analytic kinematics") {
    VehicleParams p;
    EgoState s;
    for (int k = 0; k < 10; ++k) s = step_ks1(s, {2.0, 0.0}, p, 0.1);
    CHECK(std::abs(s.v - 2.0) < 1e-9);
    CHECK(std::abs(s.x - 1.0) < 1e-9);  // 0.5 * 2 * 1^2
    CHECK(s.prev_accel == doctest::Approx(2.0));
}

TEST_CASE("constant steer traces the analytic turning circle") {
    VehicleParams p;
    const double steer = 0.3;
    const double radius = p.wheelbase / std::tan(steer);
    EgoState s;
    s.v = 5.0;
    // circle center is at distance `radius` to the left of the start pose
    const Vec2 center{0.0, radius};
    double max_err = 0.0;
    for (int k = 0; k < 100; ++k) {
        s = step_ks1(s, {0.0, steer}, p, 0.1);
        const double r = (Vec2{s.x, s.y} - center).norm();
        max_err = std::max(max_err, std::abs(r - radius));
    }
    CHECK(max_err < 1e-6);
}

TEST_CASE("state stays in bounds and stepping is deterministic") {
    VehicleParams p;
    Rng rng(3);
    EgoState s;
    s.v = 3.0;
    for (int k = 0; k < 500; ++k) {
        ControlAction a{rng.uniform(-p.decel_max, p.accel_max),
                        rng.uniform(-p.steer_max, p.steer_max)};
        const EgoState n1 = step_ks1(s, a, p, 0.1);
        const EgoState n2 = step_ks1(s, a, p, 0.1);
        CHECK(n1.x == n2.x);
        CHECK(n1.v == n2.v);
        CHECK(n1.theta == n2.theta);
        CHECK(n1.v >= 0.0);
        CHECK(n1.v <= p.v_max);
        CHECK(n1.theta > -M_PI - 1e-12);
        CHECK(n1.theta <= M_PI + 1e-12);
        s = n1;
    }
}

TEST_CASE("braking to a stop clamps at standstill") {
    VehicleParams p;
    EgoState s;
    s.v = 1.0;
    for (int k = 0; k < 10; ++k) s = step_ks1(s, {-5.0, 0.0}, p, 0.1);
    CHECK(s.v == doctest::Approx(0.0));
}

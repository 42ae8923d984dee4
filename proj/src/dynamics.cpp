#include "crossway/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "crossway/geometry.hpp"

namespace crossway {

bool check_constraints(const ControlAction& action, const EgoState& state,
                       const VehicleParams& params, double dt) {
    if (action.accel > params.accel_max || action.accel < -params.decel_max) {
        return true;
    }
    if (std::abs(action.steer) > params.steer_max) return true;
    if (std::abs(action.steer - state.prev_steer) / dt > params.steer_rate_max) {
        return true;
    }
    if (state.v + action.accel * dt > params.v_max) return true;
    return false;
}

namespace {

struct Deriv {
    double dx, dy, dtheta, dv;
};

Deriv derivative(double v, double theta, double accel, double steer,
                 double wheelbase) {
    // Standstill under braking: hold, do not integrate backwards.
    const double vv = std::max(v, 0.0);
    double dv = accel;
    if (v <= 0.0 && accel < 0.0) dv = 0.0;
    return {vv * std::cos(theta), vv * std::sin(theta),
            vv * std::tan(steer) / wheelbase, dv};
}

}  // namespace

EgoState step_ks1(const EgoState& state, const ControlAction& action,
                  const VehicleParams& params, double dt) {
    const double a = action.accel;
    const double s = action.steer;
    const double L = params.wheelbase;

    const Deriv k1 = derivative(state.v, state.theta, a, s, L);
    const Deriv k2 = derivative(state.v + 0.5 * dt * k1.dv,
                                state.theta + 0.5 * dt * k1.dtheta, a, s, L);
    const Deriv k3 = derivative(state.v + 0.5 * dt * k2.dv,
                                state.theta + 0.5 * dt * k2.dtheta, a, s, L);
    const Deriv k4 =
        derivative(state.v + dt * k3.dv, state.theta + dt * k3.dtheta, a, s, L);

    EgoState next = state;
    next.x += dt / 6.0 * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
    next.y += dt / 6.0 * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
    next.theta = wrap_angle(state.theta + dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta +
                                                      2.0 * k3.dtheta + k4.dtheta));
    next.v = std::clamp(
        state.v + dt / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv), 0.0,
        params.v_max);
    next.prev_accel = a;
    next.prev_steer = s;
    return next;
}

}  // namespace crossway

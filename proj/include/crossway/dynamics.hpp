#pragma once

namespace crossway {

struct EgoState {
    double x = 0.0;
    double y = 0.0;
    double v = 0.0;      // >= 0, reverse driving excluded
    double theta = 0.0;  // (-pi, pi]
    double prev_accel = 0.0;
    double prev_steer = 0.0;
};

struct VehicleParams {
    double wheelbase = 2.578;
    double steer_max = 0.91;
    double steer_rate_max = 0.4;
    double accel_max = 11.5;
    double decel_max = 11.5;  // positive magnitude
    double v_max = 50.8;
    double length = 4.508;
    double width = 1.610;
};

struct ControlAction {
    double accel = 0.0;
    double steer = 0.0;  // commanded steering angle
    double pred = 0.0;   // in [0, 1], used only under curriculum 2
};

// True iff the action breaches an actuation bound: acceleration outside
// [-decel_max, accel_max], |steer| > steer_max, steering rate above
// steer_rate_max, or the resulting speed above v_max. Braking past
// standstill is clamped by step_ks1, not a violation.
bool check_constraints(const ControlAction& action, const EgoState& state,
                       const VehicleParams& params, double dt);

// Kinematic bicycle model (single-track), integrated with RK4:
//   x' = v cos(theta), y' = v sin(theta),
//   theta' = v tan(steer) / wheelbase, v' = accel.
EgoState step_ks1(const EgoState& state, const ControlAction& action,
                  const VehicleParams& params, double dt);

}  // namespace crossway

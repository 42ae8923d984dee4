#pragma once

#include <vector>

#include "crossway/dynamics.hpp"
#include "crossway/road_network.hpp"
#include "crossway/scenario.hpp"

namespace crossway {

struct TtcConfig {
    double gap_threshold = 2.5;  // s
    double cruise_speed = 8.0;   // m/s
    double comfort_decel = 4.0;  // m/s^2, also the cruise-profile accel
    double lookahead = 6.0;      // m, pure-pursuit gain

    void validate() const;  // throws ConfigError
};

// Rule-based time-to-collision policy: pure-pursuit steering on the
// reference path plus a constant-velocity conflict-point yield rule.
// The returned action always passes check_constraints.
ControlAction ttc_action(const EgoState& ego,
                         const std::vector<TargetState>& targets,
                         const ReferencePath& path, const TtcConfig& cfg,
                         const VehicleParams& vehicle = {}, double dt = 0.1);

}  // namespace crossway

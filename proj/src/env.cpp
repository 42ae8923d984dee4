#include "crossway/env.hpp"

#include <algorithm>
#include <cmath>

#include "crossway/errors.hpp"

namespace crossway {

void RewardParams::validate() const {
    if (rho1 <= 0.0 || rho2 <= 0.0 || phi <= 0.0) {
        throw InvalidConfig("rho1, rho2 and phi must be positive");
    }
    if (sigma1 >= 0.0 || sigma2 >= 0.0) {
        throw InvalidConfig("sigma1 and sigma2 must be negative");
    }
}

const char* termination_name(Termination t) {
    switch (t) {
        case Termination::Running: return "running";
        case Termination::Goal: return "goal";
        case Termination::Collision: return "collision";
        case Termination::OffRoad: return "offroad";
        case Termination::ConstraintViolation: return "constraint_violation";
        case Termination::Timeout: return "timeout";
    }
    return "unknown";
}

Termination termination_from_name(const std::string& name) {
    for (Termination t : {Termination::Running, Termination::Goal,
                          Termination::Collision, Termination::OffRoad,
                          Termination::ConstraintViolation, Termination::Timeout}) {
        if (name == termination_name(t)) return t;
    }
    throw ParseError("unknown termination: " + name);
}

bool check_goal(const EgoState& ego, const GoalRegion& goal) {
    const Vec2 rel = Vec2{ego.x, ego.y} - goal.center;
    const Vec2 local = rel.rotated(-goal.orientation);
    if (std::abs(local.x) > goal.half_extents.x ||
        std::abs(local.y) > goal.half_extents.y) {
        return false;
    }
    return std::abs(wrap_angle(ego.theta - goal.orientation)) <=
           goal.orientation_tolerance;
}

bool off_road(const OrientedRect& footprint, const LaneletNetwork& network) {
    for (const Vec2& corner : footprint.corners()) {
        bool covered = false;
        for (const Lanelet& l : network.lanelets()) {
            if (point_in_polygon(corner, l.polygon())) {
                covered = true;
                break;
            }
        }
        if (!covered) return true;
    }
    return false;
}

Environment::Environment(ScenarioSpec spec, VehicleParams vehicle,
                         RewardParams reward, double dt)
    : spec_(std::move(spec)), vehicle_(vehicle), reward_(reward), dt_(dt) {
    reward_.validate();
    if (dt_ <= 0.0) throw InvalidConfig("dt must be positive");
}

Observation Environment::reset() {
    path_ = plan_reference_path(spec_.network, spec_.ego_start_lanelet,
                                spec_.ego_goal_lanelet);
    ego_ = spec_.ego_init;
    step_count_ = 0;
    done_ = false;
    started_ = true;
    termination_ = Termination::Running;
    const CurvilinearPose pose = project(path_, ego_.x, ego_.y, ego_.theta);
    prev_s_ = pose.s;
    prev_d_ = pose.d;
    last_dlong_ = 0.0;
    last_dlat_ = 0.0;
    return observation();
}

OrientedRect Environment::ego_footprint() const {
    return {{ego_.x, ego_.y}, vehicle_.length / 2.0, vehicle_.width / 2.0,
            ego_.theta};
}

StepOutcome Environment::step(const ControlAction& action) {
    if (!started_ || done_) throw EpisodeFinished();

    StepOutcome out;

    if (check_constraints(action, ego_, vehicle_, dt_)) {
        // Episode ends on the spot; the state is not advanced.
        out.reward = reward_.sigma1;
        out.termination = Termination::ConstraintViolation;
        out.done = true;
        done_ = true;
        termination_ = out.termination;
        out.obs = observation();
        return out;
    }

    ego_ = step_ks1(ego_, action, vehicle_, dt_);
    ++step_count_;

    const CurvilinearPose pose = project(path_, ego_.x, ego_.y, ego_.theta);
    last_dlong_ = pose.s - prev_s_;
    last_dlat_ = std::abs(prev_d_) - std::abs(pose.d);
    prev_s_ = pose.s;
    prev_d_ = pose.d;
    out.reward = reward_.rho1 * last_dlong_ + reward_.rho2 * last_dlat_;

    const OrientedRect ego_rect = ego_footprint();
    bool collided = false;
    for (const TargetTrajectory& t : spec_.targets) {
        if (!t.active_at(step_count_)) continue;
        const TargetState& s = t.state_at(step_count_);
        const OrientedRect target_rect{{s.x, s.y}, vehicle_.length / 2.0,
                                       vehicle_.width / 2.0, s.theta};
        if (collide(ego_rect, target_rect)) {
            collided = true;
            break;
        }
    }

    if (collided) {
        out.reward += reward_.sigma1;
        out.termination = Termination::Collision;
    } else if (off_road(ego_rect, spec_.network)) {
        out.reward += reward_.sigma1;
        out.termination = Termination::OffRoad;
    } else if (check_goal(ego_, spec_.goal)) {
        out.reward += reward_.phi;
        out.termination = Termination::Goal;
    } else if (step_count_ >= spec_.timeout_steps) {
        out.reward += reward_.sigma2;
        out.termination = Termination::Timeout;
    }

    out.done = out.termination != Termination::Running;
    done_ = out.done;
    termination_ = out.termination;
    out.obs = observation();
    return out;
}

Observation Environment::observation() const {
    Observation obs;
    auto& v = obs.values;

    v[obs_idx::kSpeed] = ego_.v;
    v[obs_idx::kPrevAccel] = ego_.prev_accel;
    v[obs_idx::kPrevSteer] = ego_.prev_steer;
    v[obs_idx::kHeading] = ego_.theta;

    const Vec2 ego_pos{ego_.x, ego_.y};
    const auto to_ego_frame = [&](const Vec2& p) {
        return (p - ego_pos).rotated(-ego_.theta);
    };

    const CurvilinearPose pose = project(path_, ego_.x, ego_.y, ego_.theta);
    for (size_t i = 0; i < kWaypointLookahead.size(); ++i) {
        const double s = std::min(pose.s + kWaypointLookahead[i],
                                  path_.total_length());
        const Vec2 wp = to_ego_frame(path_.point_at(s));
        v[obs_idx::kWaypoints + 3 * i + 0] = wp.x;
        v[obs_idx::kWaypoints + 3 * i + 1] = wp.y;
        v[obs_idx::kWaypoints + 3 * i + 2] =
            wrap_angle(path_.heading_at(s) - ego_.theta);
    }

    v[obs_idx::kPathHeadingErr] = pose.theta_err;
    v[obs_idx::kDLong] = last_dlong_;
    v[obs_idx::kDLat] = last_dlat_;
    v[obs_idx::kTimeRemaining] =
        static_cast<double>(spec_.timeout_steps - step_count_) /
        static_cast<double>(spec_.timeout_steps);

    try {
        const BoundaryObservations b =
            boundary_observations(spec_.network, ego_.x, ego_.y);
        v[obs_idx::kCurvature] = b.curvature;
        v[obs_idx::kCenterOffset] = b.center_offset;
        v[obs_idx::kRoadLeft] = b.road_left;
        v[obs_idx::kRoadRight] = b.road_right;
        v[obs_idx::kLaneLeft] = b.lane_left;
        v[obs_idx::kLaneRight] = b.lane_right;
    } catch (const OffRoad&) {
        // Terminal off-road state, lane observations stay zero.
    }

    // Five nearest active targets, nearest first, ties by target index.
    std::vector<std::pair<double, size_t>> order;
    for (size_t i = 0; i < spec_.targets.size(); ++i) {
        const TargetTrajectory& t = spec_.targets[i];
        if (!t.active_at(step_count_)) continue;
        const TargetState& s = t.state_at(step_count_);
        order.emplace_back((Vec2{s.x, s.y} - ego_pos).squared_norm(), i);
    }
    std::sort(order.begin(), order.end());

    const int slots = std::min<int>(kTargetSlots, static_cast<int>(order.size()));
    for (int j = 0; j < slots; ++j) {
        const TargetTrajectory& t = spec_.targets[order[j].second];
        for (int k = 0; k <= kFutureSteps; ++k) {
            const TargetState& s = t.state_at_clamped(step_count_ + k);
            const Vec2 rel = to_ego_frame({s.x, s.y});
            v[obs_idx::target(j, k, 0)] = rel.x;
            v[obs_idx::target(j, k, 1)] = rel.y;
            v[obs_idx::target(j, k, 2)] = s.v;
            v[obs_idx::target(j, k, 3)] = wrap_angle(s.theta - ego_.theta);
        }
    }
    return obs;
}

}  // namespace crossway

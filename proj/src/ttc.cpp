#include "crossway/ttc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "crossway/errors.hpp"

namespace crossway {

void TtcConfig::validate() const {
    if (gap_threshold <= 0.0 || cruise_speed <= 0.0 || comfort_decel <= 0.0 ||
        lookahead <= 0.0) {
        throw ConfigError("TTC parameters must be positive");
    }
}

namespace {

// First intersection of the ray p + t*u (t >= 0) with the path polyline.
// Returns {path arc length, ray time} or nullopt.
struct Conflict {
    double path_s = 0.0;
    double ray_t = 0.0;
};

bool ray_path_conflict(const Vec2& p, const Vec2& u, const ReferencePath& path,
                       Conflict& out) {
    bool found = false;
    double best_s = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < path.points.size(); ++i) {
        const Vec2 a = path.points[i];
        const Vec2 ab = path.points[i + 1] - a;
        const double det = u.x * (-ab.y) - u.y * (-ab.x);
        if (std::abs(det) < 1e-12) continue;  // parallel
        const Vec2 ap = a - p;
        const double t = (ap.x * (-ab.y) - ap.y * (-ab.x)) / det;
        const double s = (u.x * ap.y - u.y * ap.x) / -det;
        if (t < 0.0 || s < 0.0 || s > 1.0) continue;
        const double arc = path.cum_arclength[i] + s * ab.norm();
        if (arc < best_s) {
            best_s = arc;
            out = Conflict{arc, t};
            found = true;
        }
    }
    return found;
}

// Time to cover distance d starting at speed v0 with a trapezoidal
// accelerate-then-cruise profile (accel a up to speed c).
double arrival_time(double d, double v0, double c, double a) {
    if (d <= 0.0) return 0.0;
    if (v0 >= c) return d / v0;
    const double d_acc = (c * c - v0 * v0) / (2.0 * a);
    if (d <= d_acc) {
        return (-v0 + std::sqrt(v0 * v0 + 2.0 * a * d)) / a;
    }
    return (c - v0) / a + (d - d_acc) / c;
}

}  // namespace

ControlAction ttc_action(const EgoState& ego,
                         const std::vector<TargetState>& targets,
                         const ReferencePath& path, const TtcConfig& cfg,
                         const VehicleParams& vehicle, double dt) {
    cfg.validate();
    ControlAction action;

    // Pure-pursuit steering towards the point `lookahead` metres further
    // along the reference path, clamped into the feasible rate window.
    const CurvilinearPose pose = project(path, ego.x, ego.y, ego.theta);
    const Vec2 target_pt = path.point_at(
        std::min(pose.s + cfg.lookahead, path.total_length()));
    const Vec2 rel = target_pt - Vec2{ego.x, ego.y};
    const double alpha = wrap_angle(std::atan2(rel.y, rel.x) - ego.theta);
    double steer =
        std::atan(2.0 * vehicle.wheelbase * std::sin(alpha) / cfg.lookahead);
    const double window = vehicle.steer_rate_max * dt * 0.999;
    steer = std::clamp(steer, ego.prev_steer - window, ego.prev_steer + window);
    steer = std::clamp(steer, -vehicle.steer_max, vehicle.steer_max);
    action.steer = steer;

    // Yield rule: brake if any target's constant-velocity ray crosses the
    // ego path with an arrival-time gap below the threshold.
    bool must_yield = false;
    const double remaining = path.total_length() - pose.s;
    for (const TargetState& t : targets) {
        if (t.v < 0.1) continue;
        const Vec2 u{t.v * std::cos(t.theta), t.v * std::sin(t.theta)};
        Conflict c;
        if (!ray_path_conflict(Vec2{t.x, t.y}, u, path, c)) continue;
        const double ego_dist = c.path_s - pose.s;
        if (ego_dist <= -vehicle.length || ego_dist > remaining) continue;
        const double t_ego = arrival_time(ego_dist, std::max(ego.v, 0.0),
                                          cfg.cruise_speed, cfg.comfort_decel);
        if (std::abs(c.ray_t - t_ego) < cfg.gap_threshold) {
            must_yield = true;
            break;
        }
    }

    // Cap speed ahead of curvature so the rate-limited steering can build
    // up the turn angle and lateral acceleration stays comfortable.
    double curvature_ahead = 0.0;
    for (double ds = 0.0; ds <= 15.0; ds += 1.0) {
        const double s0 = pose.s + ds;
        if (s0 + 1.0 > path.total_length()) break;
        const double dh =
            wrap_angle(path.heading_at(s0 + 1.0) - path.heading_at(s0));
        curvature_ahead = std::max(curvature_ahead, std::abs(dh));
    }
    constexpr double kLatAccelMax = 2.5;  // m/s^2
    double v_des = cfg.cruise_speed;
    if (curvature_ahead > 1e-6) {
        v_des = std::min(v_des, std::sqrt(kLatAccelMax / curvature_ahead));
    }

    double accel;
    if (must_yield) {
        accel = -cfg.comfort_decel;
        accel = std::max(accel, -ego.v / dt);  // floor so v stays >= 0
    } else {
        accel = 1.0 * (v_des - ego.v);  // proportional tracking
    }
    const double margin = 1e-9;
    accel = std::clamp(accel, -vehicle.decel_max + margin,
                       vehicle.accel_max - margin);
    accel = std::min(accel, (vehicle.v_max - ego.v) / dt - margin);
    action.accel = accel;
    return action;
}

}  // namespace crossway

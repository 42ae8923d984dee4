#include "crossway/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crossway/errors.hpp"
#include "crossway/rng.hpp"

namespace crossway {

namespace {

using nlohmann::json;

struct SampledLine {
    std::vector<Vec2> pts;
    std::vector<double> headings;
};

SampledLine sample_straight(const Vec2& a, const Vec2& b, double step) {
    const double len = (b - a).norm();
    const int n = std::max(2, static_cast<int>(std::ceil(len / step)) + 1);
    SampledLine line;
    const double heading = std::atan2(b.y - a.y, b.x - a.x);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        line.pts.push_back(a + (b - a) * t);
        line.headings.push_back(heading);
    }
    return line;
}

// Arc around `center` from angle phi0 to phi1 (either direction).
SampledLine sample_arc(const Vec2& center, double radius, double phi0,
                       double phi1, double step) {
    const double arc_len = radius * std::abs(phi1 - phi0);
    const int n = std::max(3, static_cast<int>(std::ceil(arc_len / step)) + 1);
    const double tangent_offset = (phi1 > phi0) ? M_PI / 2.0 : -M_PI / 2.0;
    SampledLine line;
    for (int i = 0; i < n; ++i) {
        const double phi = phi0 + (phi1 - phi0) * i / (n - 1);
        line.pts.push_back(center + Vec2{std::cos(phi), std::sin(phi)} * radius);
        line.headings.push_back(wrap_angle(phi + tangent_offset));
    }
    return line;
}

SampledLine rotated(const SampledLine& line, double angle) {
    SampledLine out;
    for (const Vec2& p : line.pts) out.pts.push_back(p.rotated(angle));
    for (double h : line.headings) out.headings.push_back(wrap_angle(h + angle));
    return out;
}

Lanelet make_lanelet(int id, const SampledLine& line, double width,
                     std::vector<int> successors) {
    Lanelet l;
    l.id = id;
    l.lane_width = width;
    l.successors = std::move(successors);
    l.centerline = line.pts;
    for (size_t i = 0; i < line.pts.size(); ++i) {
        const Vec2 left_n = Vec2{1.0, 0.0}.rotated(line.headings[i]).perp();
        l.left_boundary.push_back(line.pts[i] + left_n * (width / 2.0));
        l.right_boundary.push_back(line.pts[i] - left_n * (width / 2.0));
    }
    return l;
}

constexpr int kApproachBase = 1;
constexpr int kExitBase = 5;
constexpr int kConnectorBase = 10;

int approach_id(int leg) { return kApproachBase + leg; }
int exit_id(int leg) { return kExitBase + leg; }
int connector_id(int leg, int kind) { return kConnectorBase + 3 * leg + kind; }
// kind 0=left, 1=straight, 2=right; destination leg of a connector.
int dest_leg(int leg, int kind) { return (leg + 3 - kind) % 4; }

LaneletNetwork build_intersection(const GenerationConfig& cfg,
                                  const std::vector<int>& legs) {
    if (cfg.lane_width <= 0.0 || cfg.leg_length <= 0.0 ||
        cfg.connector_step <= 0.0 || cfg.leg_step <= 0.0) {
        throw InvalidConfig("non-positive geometry parameter");
    }
    const double w = cfg.lane_width;
    const double h = 1.5 * w;  // junction half-size
    const double L = cfg.leg_length;

    const auto has_leg = [&](int leg) {
        return std::find(legs.begin(), legs.end(), leg) != legs.end();
    };

    std::vector<Lanelet> lanelets;
    for (int leg : legs) {
        const double rho = leg * M_PI / 2.0;

        std::vector<int> approach_succ;
        for (int kind = 0; kind < 3; ++kind) {
            if (has_leg(dest_leg(leg, kind))) {
                approach_succ.push_back(connector_id(leg, kind));
            }
        }
        lanelets.push_back(make_lanelet(
            approach_id(leg),
            rotated(sample_straight({w / 2.0, -(h + L)}, {w / 2.0, -h}, cfg.leg_step),
                    rho),
            w, approach_succ));
        lanelets.push_back(make_lanelet(
            exit_id(leg),
            rotated(sample_straight({-w / 2.0, -h}, {-w / 2.0, -(h + L)}, cfg.leg_step),
                    rho),
            w, {}));

        for (int kind = 0; kind < 3; ++kind) {
            if (!has_leg(dest_leg(leg, kind))) continue;
            SampledLine line;
            switch (kind) {
                case 0:  // left, counterclockwise quarter arc
                    line = sample_arc({-h, -h}, h + w / 2.0, 0.0, M_PI / 2.0,
                                      cfg.connector_step);
                    break;
                case 1:  // straight through
                    line = sample_straight({w / 2.0, -h}, {w / 2.0, h},
                                           cfg.connector_step);
                    break;
                default:  // right, clockwise quarter arc
                    line = sample_arc({h, -h}, h - w / 2.0, M_PI, M_PI / 2.0,
                                      cfg.connector_step);
                    break;
            }
            lanelets.push_back(make_lanelet(connector_id(leg, kind),
                                            rotated(line, rho), w,
                                            {exit_id(dest_leg(leg, kind))}));
        }
    }
    return LaneletNetwork(std::move(lanelets));
}

ReferencePath lane_path(const LaneletNetwork& network, int lanelet) {
    return build_reference_path(network, {lanelet});
}

GoalRegion place_goal(const LaneletNetwork& network, int goal_lanelet,
                      const GenerationConfig& cfg) {
    const ReferencePath exit_path = lane_path(network, goal_lanelet);
    const double s = std::min(15.0, std::max(0.0, cfg.leg_length - 5.0));
    GoalRegion goal;
    goal.center = exit_path.point_at(s);
    goal.orientation = exit_path.heading_at(s);
    goal.half_extents = {5.0, cfg.lane_width / 2.0};
    return goal;
}

void check_generation_config(const GenerationConfig& cfg) {
    if (cfg.num_targets < 0 || cfg.num_targets > 5) {
        throw InvalidConfig("num_targets must be in [0, 5]");
    }
    if (cfg.timeout_steps <= 0) throw InvalidConfig("timeout_steps must be positive");
    if (cfg.target_speed_min <= 0.0 || cfg.target_speed_max < cfg.target_speed_min) {
        throw InvalidConfig("invalid target speed range");
    }
    if (cfg.dt <= 0.0) throw InvalidConfig("dt must be positive");
}

void spawn_targets(ScenarioSpec& spec, const GenerationConfig& cfg,
                   const std::vector<int>& target_legs, Rng& rng) {
    const auto& network = spec.network;
    for (int j = 0; j < cfg.num_targets; ++j) {
        const int leg = target_legs[j % target_legs.size()];
        const double spawn_s = rng.uniform(1.0, std::max(1.5, cfg.leg_length - 2.0));
        const double speed = rng.uniform(cfg.target_speed_min, cfg.target_speed_max);
        const auto& succ = network.lanelet(approach_id(leg)).successors;
        const int connector = succ[rng.uniform_int(0, static_cast<int>(succ.size()) - 1)];
        const int kind = (connector - kConnectorBase) % 3;
        const std::vector<int> route = {approach_id(leg), connector,
                                        exit_id(dest_leg(leg, kind))};
        const ReferencePath approach = lane_path(network, approach_id(leg));
        TargetState spawn;
        spawn.x = approach.point_at(spawn_s).x;
        spawn.y = approach.point_at(spawn_s).y;
        spawn.theta = approach.heading_at(spawn_s);
        spawn.v = speed;
        spec.targets.push_back(
            synthesize_target_trajectory(network, spawn, speed, route, 0, cfg.dt));
    }
}

}  // namespace

LaneletNetwork build_four_way_network(const GenerationConfig& cfg) {
    return build_intersection(cfg, {0, 1, 2, 3});
}

LaneletNetwork build_t_junction_network(const GenerationConfig& cfg) {
    return build_intersection(cfg, {0, 1, 3});
}

ScenarioSpec generate_four_way(std::uint64_t seed, const GenerationConfig& cfg) {
    check_generation_config(cfg);
    ScenarioSpec spec;
    spec.seed = seed;
    spec.id = "fourway_" + std::to_string(seed);
    spec.timeout_steps = cfg.timeout_steps;
    spec.network = build_intersection(cfg, {0, 1, 2, 3});

    Rng rng(seed);

    // Ego in lane 1 (south approach), at rest, lane-aligned.
    spec.ego_start_lanelet = approach_id(0);
    const ReferencePath ego_lane = lane_path(spec.network, spec.ego_start_lanelet);
    const double ego_s = rng.uniform(2.0, std::max(2.5, cfg.leg_length - 5.0));
    spec.ego_init.x = ego_lane.point_at(ego_s).x;
    spec.ego_init.y = ego_lane.point_at(ego_s).y;
    spec.ego_init.theta = ego_lane.heading_at(ego_s);
    spec.ego_init.v = 0.0;

    GoalBranch branch = cfg.goal_branch;
    if (branch == GoalBranch::Random) {
        const int pick = rng.uniform_int(0, 2);
        branch = pick == 0 ? GoalBranch::Left
                           : (pick == 1 ? GoalBranch::Straight : GoalBranch::Right);
    }
    const int kind = branch == GoalBranch::Left ? 0
                     : branch == GoalBranch::Straight ? 1 : 2;
    spec.ego_goal_lanelet = exit_id(dest_leg(0, kind));
    spec.goal = place_goal(spec.network, spec.ego_goal_lanelet, cfg);

    spawn_targets(spec, cfg, {1, 2, 3}, rng);
    spec.validate();
    return spec;
}

ScenarioSpec generate_t_junction(std::uint64_t seed, const GenerationConfig& cfg) {
    check_generation_config(cfg);
    if (cfg.goal_branch == GoalBranch::Straight) {
        throw InvalidConfig("T-junction has no straight branch from the ego leg");
    }
    ScenarioSpec spec;
    spec.seed = seed;
    spec.id = "tjunction_" + std::to_string(seed);
    spec.timeout_steps = cfg.timeout_steps;
    spec.network = build_intersection(cfg, {0, 1, 3});

    Rng rng(seed);

    spec.ego_start_lanelet = approach_id(0);
    const ReferencePath ego_lane = lane_path(spec.network, spec.ego_start_lanelet);
    const double ego_s = rng.uniform(2.0, std::max(2.5, cfg.leg_length - 5.0));
    spec.ego_init.x = ego_lane.point_at(ego_s).x;
    spec.ego_init.y = ego_lane.point_at(ego_s).y;
    spec.ego_init.theta = ego_lane.heading_at(ego_s);
    spec.ego_init.v = rng.uniform(cfg.tj_ego_speed_min, cfg.tj_ego_speed_max);

    GoalBranch branch = cfg.goal_branch;
    if (branch == GoalBranch::Random) {
        branch = rng.uniform_int(0, 1) == 0 ? GoalBranch::Left : GoalBranch::Right;
    }
    const int kind = branch == GoalBranch::Left ? 0 : 2;
    spec.ego_goal_lanelet = exit_id(dest_leg(0, kind));
    spec.goal = place_goal(spec.network, spec.ego_goal_lanelet, cfg);

    spawn_targets(spec, cfg, {1, 3}, rng);
    spec.validate();
    return spec;
}

TargetTrajectory synthesize_target_trajectory(const LaneletNetwork& network,
                                              const TargetState& spawn,
                                              double speed,
                                              const std::vector<int>& route,
                                              int spawn_step, double dt) {
    if (route.empty()) throw InvalidRoute("empty route");
    if (speed <= 0.0) throw InvalidRoute("target speed must be positive");
    for (size_t i = 0; i + 1 < route.size(); ++i) {
        const auto& succ = network.lanelet(route[i]).successors;
        if (std::find(succ.begin(), succ.end(), route[i + 1]) == succ.end()) {
            throw InvalidRoute("lanelet " + std::to_string(route[i + 1]) +
                               " is not a successor of " + std::to_string(route[i]));
        }
    }
    const ReferencePath path = build_reference_path(network, route);
    const CurvilinearPose pose = project(path, spawn.x, spawn.y, spawn.theta);
    if (std::abs(pose.d) > 1.0) throw InvalidRoute("spawn pose is off the route");

    TargetTrajectory traj;
    traj.spawn_step = spawn_step;
    traj.from_route = true;
    traj.route = route;
    traj.speed = speed;
    traj.spawn = spawn;
    const double total = path.total_length();
    for (int k = 0;; ++k) {
        const double s = pose.s + k * speed * dt;
        if (s > total) break;
        const Vec2 p = path.point_at(s);
        traj.states.push_back({p.x, p.y, speed, path.heading_at(s)});
    }
    if (traj.states.empty()) {
        traj.states.push_back({spawn.x, spawn.y, speed, spawn.theta});
    }
    return traj;
}

void ScenarioSpec::validate() const {
    if (timeout_steps <= 0) throw InvalidConfig("timeout_steps must be positive");
    network.validate();
    if (!network.has_lanelet(ego_start_lanelet) ||
        !network.has_lanelet(ego_goal_lanelet)) {
        throw InvalidConfig("ego route references an unknown lanelet");
    }
    if (ego_init.v < 0.0) throw InvalidConfig("ego initial speed must be >= 0");
    if (!point_in_polygon({ego_init.x, ego_init.y},
                          network.lanelet(ego_start_lanelet).polygon())) {
        throw InvalidConfig("ego spawn lies outside its start lanelet");
    }
    if (goal.half_extents.x <= 0.0 || goal.half_extents.y <= 0.0) {
        throw InvalidConfig("goal half extents must be positive");
    }
    if (goal.orientation_tolerance <= 0.0) {
        throw InvalidConfig("goal orientation tolerance must be positive");
    }

    int max_active = 0;
    for (int step : {0, timeout_steps / 2, timeout_steps - 1}) {
        int active = 0;
        for (const auto& t : targets) active += t.active_at(step) ? 1 : 0;
        max_active = std::max(max_active, active);
    }
    if (max_active > 5) throw InvalidConfig("more than 5 targets active at once");

    for (const auto& t : targets) {
        if (t.states.empty()) throw InvalidConfig("target trajectory is empty");
        for (const auto& s : t.states) {
            if (s.v < 0.0) throw InvalidConfig("target speed must be >= 0");
        }
        const double dt = 0.1;
        for (size_t i = 0; i + 1 < t.states.size(); ++i) {
            const auto& a = t.states[i];
            const auto& b = t.states[i + 1];
            const double step_speed = std::hypot(b.x - a.x, b.y - a.y) / dt;
            if (a.v > 0.1 &&
                (step_speed < 0.8 * a.v || step_speed > 1.2 * a.v)) {
                throw InvalidConfig("target positions inconsistent with speed");
            }
        }
        const int spawn_lane = network.lanelet_at(
            {t.states.front().x, t.states.front().y});
        if (spawn_lane < 0) throw InvalidConfig("target spawn lies off-road");
    }
}

namespace {

json vec2_to_json(const Vec2& v) { return json::array({v.x, v.y}); }

json polyline_to_json(const std::vector<Vec2>& pts) {
    json arr = json::array();
    for (const Vec2& p : pts) arr.push_back(vec2_to_json(p));
    return arr;
}

const json& require(const json& j, const char* field) {
    const auto it = j.find(field);
    if (it == j.end()) throw ParseError(std::string("missing field: ") + field);
    return *it;
}

Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw ParseError("expected [x, y] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

std::vector<Vec2> polyline_from_json(const json& j) {
    std::vector<Vec2> pts;
    for (const auto& p : j) pts.push_back(vec2_from_json(p));
    return pts;
}

}  // namespace

std::string save_scenario(const ScenarioSpec& spec) {
    json j;
    j["version"] = 1;
    j["id"] = spec.id;
    j["seed"] = spec.seed;
    j["timeout_steps"] = spec.timeout_steps;

    json lanelets = json::array();
    for (const Lanelet& l : spec.network.lanelets()) {
        json jl;
        jl["id"] = l.id;
        jl["centerline"] = polyline_to_json(l.centerline);
        jl["left"] = polyline_to_json(l.left_boundary);
        jl["right"] = polyline_to_json(l.right_boundary);
        jl["successors"] = l.successors;
        jl["width"] = l.lane_width;
        lanelets.push_back(jl);
    }
    j["network"]["lanelets"] = lanelets;

    j["ego"]["init"] = {{"x", spec.ego_init.x},
                        {"y", spec.ego_init.y},
                        {"v", spec.ego_init.v},
                        {"theta", spec.ego_init.theta}};
    j["ego"]["route"] = {spec.ego_start_lanelet, spec.ego_goal_lanelet};

    json targets = json::array();
    for (const TargetTrajectory& t : spec.targets) {
        json jt;
        jt["spawn_step"] = t.spawn_step;
        if (t.from_route) {
            jt["spawn"] = {{"x", t.spawn.x},
                           {"y", t.spawn.y},
                           {"v", t.spawn.v},
                           {"theta", t.spawn.theta}};
            jt["speed"] = t.speed;
            jt["route"] = t.route;
        } else {
            json states = json::array();
            for (const TargetState& s : t.states) {
                states.push_back(json::array({s.x, s.y, s.v, s.theta}));
            }
            jt["states"] = states;
        }
        targets.push_back(jt);
    }
    j["targets"] = targets;

    j["goal"] = {{"center", vec2_to_json(spec.goal.center)},
                 {"half_extents", vec2_to_json(spec.goal.half_extents)},
                 {"orientation", spec.goal.orientation},
                 {"tol", spec.goal.orientation_tolerance}};

    return j.dump(1) + "\n";
}

ScenarioSpec load_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed scenario file: ") + e.what());
    }
    try {
        ScenarioSpec spec;
        spec.id = require(j, "id").get<std::string>();
        spec.seed = require(j, "seed").get<std::uint64_t>();
        spec.timeout_steps = require(j, "timeout_steps").get<int>();

        std::vector<Lanelet> lanelets;
        for (const auto& jl : require(require(j, "network"), "lanelets")) {
            Lanelet l;
            l.id = require(jl, "id").get<int>();
            l.centerline = polyline_from_json(require(jl, "centerline"));
            l.left_boundary = polyline_from_json(require(jl, "left"));
            l.right_boundary = polyline_from_json(require(jl, "right"));
            l.successors = require(jl, "successors").get<std::vector<int>>();
            l.lane_width = require(jl, "width").get<double>();
            lanelets.push_back(std::move(l));
        }
        spec.network = LaneletNetwork(std::move(lanelets));

        const json& ego = require(j, "ego");
        const json& init = require(ego, "init");
        spec.ego_init.x = require(init, "x").get<double>();
        spec.ego_init.y = require(init, "y").get<double>();
        spec.ego_init.v = require(init, "v").get<double>();
        spec.ego_init.theta = require(init, "theta").get<double>();
        const auto route = require(ego, "route").get<std::vector<int>>();
        if (route.size() != 2) throw ParseError("ego.route must be [start, goal]");
        spec.ego_start_lanelet = route[0];
        spec.ego_goal_lanelet = route[1];

        for (const auto& jt : require(j, "targets")) {
            const int spawn_step = require(jt, "spawn_step").get<int>();
            if (jt.contains("route")) {
                const json& sp = require(jt, "spawn");
                TargetState spawn{require(sp, "x").get<double>(),
                                  require(sp, "y").get<double>(),
                                  require(sp, "v").get<double>(),
                                  require(sp, "theta").get<double>()};
                const double speed = require(jt, "speed").get<double>();
                if (speed <= 0.0) throw ParseError("target speed must be positive");
                spec.targets.push_back(synthesize_target_trajectory(
                    spec.network, spawn, speed, require(jt, "route").get<std::vector<int>>(),
                    spawn_step));
            } else {
                TargetTrajectory t;
                t.spawn_step = spawn_step;
                for (const auto& js : require(jt, "states")) {
                    if (!js.is_array() || js.size() != 4) {
                        throw ParseError("target state must be [x, y, v, theta]");
                    }
                    const double v = js[2].get<double>();
                    if (v < 0.0) throw ParseError("target speed must be >= 0");
                    t.states.push_back({js[0].get<double>(), js[1].get<double>(), v,
                                        js[3].get<double>()});
                }
                spec.targets.push_back(std::move(t));
            }
        }

        const json& goal = require(j, "goal");
        spec.goal.center = vec2_from_json(require(goal, "center"));
        spec.goal.half_extents = vec2_from_json(require(goal, "half_extents"));
        spec.goal.orientation = require(goal, "orientation").get<double>();
        spec.goal.orientation_tolerance = require(goal, "tol").get<double>();

        try {
            spec.validate();
        } catch (const InvalidConfig& e) {
            throw ParseError(std::string("invalid scenario: ") + e.what());
        }
        return spec;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed scenario field: ") + e.what());
    }
}

void save_scenario_file(const ScenarioSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << save_scenario(spec);
}

ScenarioSpec load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

}  // namespace crossway

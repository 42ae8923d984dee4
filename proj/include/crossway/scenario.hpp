#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossway/dynamics.hpp"
#include "crossway/road_network.hpp"

namespace crossway {

struct TargetState {
    double x = 0.0;
    double y = 0.0;
    double v = 0.0;
    double theta = 0.0;
};

// Scripted, non-reactive vehicle trajectory sampled at the simulation
// step. Outside [spawn_step, spawn_step + states.size()) the vehicle is
// parked off-map and excluded from collision checks and observations.
struct TargetTrajectory {
    std::vector<TargetState> states;
    int spawn_step = 0;

    // Generator triple, kept when the trajectory was synthesized from a
    // route so scenario files can stay compact and exact.
    bool from_route = false;
    std::vector<int> route;
    double speed = 0.0;
    TargetState spawn;

    bool active_at(int step) const {
        return step >= spawn_step &&
               step < spawn_step + static_cast<int>(states.size());
    }
    const TargetState& state_at(int step) const {
        return states[static_cast<size_t>(step - spawn_step)];
    }
    // Clamped lookup for future-state observations of an active vehicle.
    const TargetState& state_at_clamped(int step) const {
        const int last = spawn_step + static_cast<int>(states.size()) - 1;
        if (step < spawn_step) step = spawn_step;
        if (step > last) step = last;
        return state_at(step);
    }
};

struct GoalRegion {
    Vec2 center;
    Vec2 half_extents;
    double orientation = 0.0;
    double orientation_tolerance = 0.1999;  // +- 11.45 degrees
};

enum class GoalBranch { Random, Left, Straight, Right };

struct GenerationConfig {
    double lane_width = 3.5;
    double leg_length = 50.0;
    int num_targets = 3;  // one per non-ego approach by default, max 5
    GoalBranch goal_branch = GoalBranch::Random;
    int timeout_steps = 1500;
    double connector_step = 0.5;  // arc sampling resolution
    double leg_step = 5.0;
    double target_speed_min = 5.0;
    double target_speed_max = 10.0;
    double tj_ego_speed_min = 0.0;
    double tj_ego_speed_max = 8.0;
    double dt = 0.1;
};

struct ScenarioSpec {
    std::string id;
    std::uint64_t seed = 0;
    LaneletNetwork network;
    EgoState ego_init;
    int ego_start_lanelet = 0;
    int ego_goal_lanelet = 0;
    std::vector<TargetTrajectory> targets;
    GoalRegion goal;
    int timeout_steps = 1500;

    void validate() const;  // throws InvalidConfig on violated invariants
};

// Intersection road networks. Legs are indexed 0=south, 1=east, 2=north,
// 3=west; approach lanelet id = 1 + leg, exit id = 5 + leg, connector id
// = 10 + 3*leg + kind (0=left, 1=straight, 2=right).
LaneletNetwork build_four_way_network(const GenerationConfig& config);
LaneletNetwork build_t_junction_network(const GenerationConfig& config);

ScenarioSpec generate_four_way(std::uint64_t seed, const GenerationConfig& config);
ScenarioSpec generate_t_junction(std::uint64_t seed, const GenerationConfig& config);

// Constant-speed traversal of the concatenated route centerline starting
// at the spawn pose. Throws InvalidRoute for a broken successor chain or
// a spawn pose off the route.
TargetTrajectory synthesize_target_trajectory(const LaneletNetwork& network,
                                              const TargetState& spawn,
                                              double speed,
                                              const std::vector<int>& route,
                                              int spawn_step = 0,
                                              double dt = 0.1);

std::string save_scenario(const ScenarioSpec& spec);
ScenarioSpec load_scenario(const std::string& text);
void save_scenario_file(const ScenarioSpec& spec, const std::string& path);
ScenarioSpec load_scenario_file(const std::string& path);

}  // namespace crossway

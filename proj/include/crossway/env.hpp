#pragma once

#include <array>

#include "crossway/dynamics.hpp"
#include "crossway/scenario.hpp"

namespace crossway {

constexpr int kObsDim = 129;
constexpr int kTargetSlots = 5;
constexpr int kFutureSteps = 4;  // N

// Index layout of the observation vector.
namespace obs_idx {
constexpr int kSpeed = 0;
constexpr int kPrevAccel = 1;
constexpr int kPrevSteer = 2;
constexpr int kHeading = 3;
constexpr int kWaypoints = 4;  // 5 waypoints x (x, y, theta), ego frame
constexpr int kPathHeadingErr = 19;
constexpr int kDLong = 20;
constexpr int kDLat = 21;
constexpr int kTimeRemaining = 22;
constexpr int kCurvature = 23;
constexpr int kCenterOffset = 24;
constexpr int kRoadLeft = 25;
constexpr int kRoadRight = 26;
constexpr int kLaneLeft = 27;
constexpr int kLaneRight = 28;
constexpr int kTargets = 29;  // 5 vehicles x 5 time steps x (x, y, v, theta)

constexpr int target(int vehicle, int time_step, int field) {
    return kTargets + 20 * vehicle + 4 * time_step + field;
}
}  // namespace obs_idx

struct Observation {
    std::array<double, kObsDim> values{};
};

// Arc-length lookahead of the five reference waypoints.
constexpr std::array<double, 5> kWaypointLookahead = {2.0, 5.0, 10.0, 15.0, 20.0};

struct RewardParams {
    double rho1 = 10.0;    // longitudinal progress weight
    double rho2 = 3.0;     // lateral convergence weight
    double sigma1 = -50.0; // collision / off-road / constraint violation
    double sigma2 = -30.0; // timeout
    double phi = 200.0;    // goal bonus

    void validate() const;
};

enum class Termination {
    Running,
    Goal,
    Collision,
    OffRoad,
    ConstraintViolation,
    Timeout,
};

const char* termination_name(Termination t);
Termination termination_from_name(const std::string& name);

struct StepOutcome {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    Termination termination = Termination::Running;
};

// Ego center inside the goal rectangle (goal-frame axis aligned, boundary
// inclusive) with heading within the orientation tolerance.
bool check_goal(const EgoState& ego, const GoalRegion& goal);

// Separating-axis overlap check; touching counts as collision.
inline bool collide(const OrientedRect& a, const OrientedRect& b) {
    return rects_overlap(a, b);
}

// True iff any footprint corner lies outside the union of lanelet polygons.
bool off_road(const OrientedRect& footprint, const LaneletNetwork& network);

// Episodic intersection environment. One instance per rollout worker.
class Environment {
  public:
    explicit Environment(ScenarioSpec spec, VehicleParams vehicle = {},
                         RewardParams reward = {}, double dt = 0.1);

    Observation reset();
    StepOutcome step(const ControlAction& action);  // throws EpisodeFinished

    const EgoState& ego() const { return ego_; }
    int step_count() const { return step_count_; }
    bool done() const { return done_; }
    Termination termination() const { return termination_; }
    const ReferencePath& reference_path() const { return path_; }
    const ScenarioSpec& scenario() const { return spec_; }
    const VehicleParams& vehicle_params() const { return vehicle_; }
    double dt() const { return dt_; }

    OrientedRect ego_footprint() const;
    Observation observation() const;

  private:
    ScenarioSpec spec_;
    VehicleParams vehicle_;
    RewardParams reward_;
    double dt_;
    ReferencePath path_;

    EgoState ego_;
    int step_count_ = 0;
    bool done_ = false;
    bool started_ = false;
    Termination termination_ = Termination::Running;
    double prev_s_ = 0.0;
    double prev_d_ = 0.0;
    double last_dlong_ = 0.0;
    double last_dlat_ = 0.0;
};

}  // namespace crossway

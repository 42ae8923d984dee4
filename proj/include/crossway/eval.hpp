#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crossway/env.hpp"
#include "crossway/ppo.hpp"
#include "crossway/ttc.hpp"

namespace crossway {

// Per-step policy: masked observation in, physical control out.
using Policy =
    std::function<ControlAction(const Observation&, const Environment&)>;

// Mean-action (no sampling) policy from a trained checkpoint. Vehicle
// parameters and dt are taken from the environment at call time.
Policy make_checkpoint_policy(const Checkpoint& ckpt);

Policy make_ttc_policy(const TtcConfig& cfg);

struct EvalRow {
    std::string scenario_id;
    Termination termination = Termination::Running;
    int steps = 0;
    double total_reward = 0.0;
    double mean_pred = 0.0;  // 0 unless the policy emits a pred action
};

struct EvalReport {
    std::vector<EvalRow> rows;  // ordered by scenario id
    double success_rate = 0.0;
    double collision_rate = 0.0;
    double offroad_rate = 0.0;
    double timeout_rate = 0.0;
    double constraint_rate = 0.0;
    double mean_reward = 0.0;
};

// Rolls out one episode with every target-future observation entry
// zero-masked at every step. Appends trace lines if trace is non-null:
// "step x y theta v accel steer pred reward termination".
EvalRow evaluate_episode(const ScenarioSpec& spec, const Policy& policy,
                         const VehicleParams& vehicle = {},
                         const RewardParams& reward = {}, double dt = 0.1,
                         std::string* trace = nullptr);

// Evaluates every scenario once; rows sorted by scenario id; rates sum to 1.
EvalReport evaluate(const std::vector<ScenarioSpec>& scenarios,
                    const Policy& policy, const VehicleParams& vehicle = {},
                    const RewardParams& reward = {}, double dt = 0.1,
                    int n_threads = 1);

std::string report_to_text(const EvalReport& report);

}  // namespace crossway

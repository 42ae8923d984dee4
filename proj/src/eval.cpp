#include "crossway/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <memory>
#include <thread>

#include "crossway/curriculum.hpp"

namespace crossway {

Policy make_checkpoint_policy(const Checkpoint& ckpt) {
    auto actor = std::make_shared<Mlp>(ckpt.actor_spec);
    auto params = std::make_shared<std::vector<double>>(ckpt.actor_params);
    const int action_dim = ckpt.action_dim;
    const SteerMode steer_mode = ckpt.steer_mode;
    return [actor, params, action_dim, steer_mode](
               const Observation& obs, const Environment& env) {
        Matrix input(1, kObsDim);
        for (int k = 0; k < kObsDim; ++k) input(0, k) = obs.values[k];
        const Matrix mean = actor->forward(
            std::span<const double>(params->data(),
                                    static_cast<size_t>(actor->param_count())),
            input);
        const ActionMapper mapper{env.vehicle_params(), env.dt(), steer_mode};
        return mapper.to_control(mean.row(0).data(), action_dim, env.ego());
    };
}

Policy make_ttc_policy(const TtcConfig& cfg) {
    return [cfg](const Observation&, const Environment& env) {
        std::vector<TargetState> current;
        for (const TargetTrajectory& t : env.scenario().targets) {
            if (t.active_at(env.step_count())) {
                current.push_back(t.state_at(env.step_count()));
            }
        }
        return ttc_action(env.ego(), current, env.reference_path(), cfg,
                          env.vehicle_params(), env.dt());
    };
}

EvalRow evaluate_episode(const ScenarioSpec& spec, const Policy& policy,
                         const VehicleParams& vehicle,
                         const RewardParams& reward, double dt,
                         std::string* trace) {
    Environment env(spec, vehicle, reward, dt);
    Observation obs = env.reset();
    mask_all_futures(obs, kFutureSteps);

    EvalRow row;
    row.scenario_id = spec.id;
    double pred_sum = 0.0;
    char line[256];
    while (!env.done()) {
        const ControlAction action = policy(obs, env);
        const StepOutcome outcome = env.step(action);
        row.total_reward += outcome.reward;
        pred_sum += action.pred;
        ++row.steps;
        if (trace) {
            const EgoState& e = env.ego();
            std::snprintf(line, sizeof(line),
                          "%d %.10g %.10g %.10g %.10g %.10g %.10g %.10g %.10g %s\n",
                          row.steps, e.x, e.y, e.theta, e.v, action.accel,
                          action.steer, action.pred, outcome.reward,
                          termination_name(outcome.termination));
            *trace += line;
        }
        obs = outcome.obs;
        mask_all_futures(obs, kFutureSteps);
        if (outcome.done) row.termination = outcome.termination;
    }
    row.mean_pred = row.steps > 0 ? pred_sum / row.steps : 0.0;
    return row;
}

EvalReport evaluate(const std::vector<ScenarioSpec>& scenarios,
                    const Policy& policy, const VehicleParams& vehicle,
                    const RewardParams& reward, double dt, int n_threads) {
    EvalReport report;
    report.rows.resize(scenarios.size());
    const auto worker_body = [&](size_t i) {
        report.rows[i] = evaluate_episode(scenarios[i], policy, vehicle,
                                          reward, dt, nullptr);
    };
    if (n_threads <= 1 || scenarios.size() <= 1) {
        for (size_t i = 0; i < scenarios.size(); ++i) worker_body(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        const size_t workers =
            std::min<size_t>(n_threads, scenarios.size());
        for (size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < scenarios.size();
                     i = next.fetch_add(1)) {
                    worker_body(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    std::sort(report.rows.begin(), report.rows.end(),
              [](const EvalRow& a, const EvalRow& b) {
                  return a.scenario_id < b.scenario_id;
              });

    const double n = static_cast<double>(report.rows.size());
    for (const EvalRow& row : report.rows) {
        report.mean_reward += row.total_reward;
        switch (row.termination) {
            case Termination::Goal: report.success_rate += 1.0; break;
            case Termination::Collision: report.collision_rate += 1.0; break;
            case Termination::OffRoad: report.offroad_rate += 1.0; break;
            case Termination::Timeout: report.timeout_rate += 1.0; break;
            case Termination::ConstraintViolation:
                report.constraint_rate += 1.0;
                break;
            case Termination::Running: break;
        }
    }
    if (n > 0) {
        report.success_rate /= n;
        report.collision_rate /= n;
        report.offroad_rate /= n;
        report.timeout_rate /= n;
        report.constraint_rate /= n;
        report.mean_reward /= n;
    }
    return report;
}

std::string report_to_text(const EvalReport& report) {
    std::string out = "# scenario_id termination steps total_reward mean_pred\n";
    char line[256];
    for (const EvalRow& row : report.rows) {
        std::snprintf(line, sizeof(line), "%s %s %d %.10g %.10g\n",
                      row.scenario_id.c_str(),
                      termination_name(row.termination), row.steps,
                      row.total_reward, row.mean_pred);
        out += line;
    }
    out +=
        "# success_rate collision_rate offroad_rate timeout_rate "
        "constraint_rate mean_reward\n";
    std::snprintf(line, sizeof(line), "%.10g %.10g %.10g %.10g %.10g %.10g\n",
                  report.success_rate, report.collision_rate,
                  report.offroad_rate, report.timeout_rate,
                  report.constraint_rate, report.mean_reward);
    out += line;
    return out;
}

}  // namespace crossway

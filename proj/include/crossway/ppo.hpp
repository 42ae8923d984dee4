#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crossway/curriculum.hpp"
#include "crossway/env.hpp"
#include "crossway/mlp.hpp"

namespace crossway {

enum class CurriculumMode { Standard, C1, C2 };

const char* curriculum_mode_name(CurriculumMode mode);
CurriculumMode curriculum_mode_from_name(const std::string& name);

inline int action_dim_for(CurriculumMode mode) {
    return mode == CurriculumMode::C2 ? 3 : 2;
}

// How the raw steering action maps to a commanded angle. Absolute maps
// tanh output onto [-steer_max, steer_max]; RateWindow maps it onto the
// rate-feasible window around the previous command, which keeps every
// sampled action feasible.
enum class SteerMode { Absolute, RateWindow };

const char* steer_mode_name(SteerMode mode);
SteerMode steer_mode_from_name(const std::string& name);

struct ActionMapper {
    VehicleParams vehicle;
    double dt = 0.1;
    SteerMode steer_mode = SteerMode::RateWindow;

    ControlAction to_control(const double* raw, int action_dim,
                             const EgoState& ego) const;
};

struct PpoConfig {
    double gamma = 0.99;
    double gae_lambda = 0.95;
    double clip = 0.2;
    double learning_rate = 0.0005;
    int n_envs = 32;
    int horizon = 512;
    int batch = 16384;  // must equal horizon * n_envs
    int iterations = 650;
    int epochs_per_update = 10;
    int minibatch_size = 2048;
    double value_coef = 0.5;
    double entropy_coef = 0.0;
    double max_grad_norm = 0.5;
    double log_std_init = -0.5;

    void validate() const;  // throws ConfigError
};

// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
// A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;  // advantages + values
};

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones,
                      double bootstrap_value, double gamma, double lambda);

// Diagonal Gaussian log density, summed over action dims.
double gaussian_log_prob(const double* action, const double* mean,
                         const double* log_std, int dim);
double gaussian_entropy(const double* log_std, int dim);

struct RolloutBuffer {
    int n_envs = 0, horizon = 0, obs_dim = 0, action_dim = 0;
    Matrix obs;      // (horizon*n_envs) x obs_dim, row = t * n_envs + e
    Matrix actions;  // raw (pre-squash) sampled actions
    std::vector<double> log_probs, rewards, values, advantages, returns;
    std::vector<std::uint8_t> dones;
    std::vector<double> bootstrap_values;  // per env

    void resize(int n_envs_, int horizon_, int obs_dim_, int action_dim_);
    int size() const { return n_envs * horizon; }
    int index(int t, int e) const { return t * n_envs + e; }

    // GAE over every env stream, then advantage normalization over the
    // whole batch (mean 0, std 1, eps 1e-8).
    void compute_advantages(double gamma, double lambda);
};

struct LossSpec {
    double clip = 0.2;
    double value_coef = 0.5;
    double entropy_coef = 0.0;
};

// Gathered minibatch. Advantages are expected to be normalized already.
struct MiniBatch {
    Matrix obs;
    Matrix actions;
    std::vector<double> old_log_probs;
    std::vector<double> advantages;
    std::vector<double> returns;

    int size() const { return static_cast<int>(obs.rows()); }
};

// Clipped-surrogate PPO loss:
//   -mean(min(ratio*A, clamp(ratio, 1-clip, 1+clip)*A))
//   + value_coef * mean((V - return)^2) - entropy_coef * entropy
// Actor params carry the trailing per-dimension log_std.
double ppo_loss(const Mlp& actor, std::span<const double> actor_params,
                const Mlp& critic, std::span<const double> critic_params,
                const MiniBatch& batch, const LossSpec& spec);

// Same loss, plus exact analytic gradients (overwritten, not accumulated).
double ppo_loss_and_grad(const Mlp& actor, std::span<const double> actor_params,
                         const Mlp& critic, std::span<const double> critic_params,
                         const MiniBatch& batch, const LossSpec& spec,
                         std::span<double> actor_grad,
                         std::span<double> critic_grad);

struct Checkpoint {
    MlpSpec actor_spec;
    MlpSpec critic_spec;
    int action_dim = 2;
    CurriculumMode mode = CurriculumMode::Standard;
    SteerMode steer_mode = SteerMode::Absolute;
    std::uint64_t step_count = 0;
    std::vector<double> actor_params;  // MLP params + trailing log_std
    std::vector<double> critic_params;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct CurvePoint {
    int iteration = 0;
    long long steps = 0;
    double mean_episode_reward = 0.0;
    double moving_avg_10 = 0.0;
    double success_rate_train = 0.0;
    double phase_or_mean_pred = 0.0;
};

std::string curve_to_text(const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> curve_from_text(const std::string& text);

struct TrainOptions {
    PpoConfig ppo;
    CurriculumMode mode = CurriculumMode::Standard;
    Curriculum1Config c1;  // boundaries default to an equal split
    Curriculum2Config c2;
    VehicleParams vehicle;
    RewardParams reward;
    SteerMode steer_mode = SteerMode::RateWindow;
    double dt = 0.1;
    std::uint64_t seed = 0;
    int n_threads = 1;
    std::string checkpoint_path;   // empty = keep in memory only
    int checkpoint_interval = 0;   // 0 = final checkpoint only
    std::string curve_path;        // empty = no incremental curve file
};

struct TrainResult {
    std::vector<CurvePoint> curve;
    Checkpoint checkpoint;
};

TrainResult train(const std::vector<ScenarioSpec>& scenarios,
                  const TrainOptions& options,
                  const std::function<void(const CurvePoint&)>& on_iteration = {});

}  // namespace crossway

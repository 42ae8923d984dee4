#include "crossway/ppo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

#include "crossway/errors.hpp"

namespace crossway {

const char* curriculum_mode_name(CurriculumMode mode) {
    switch (mode) {
        case CurriculumMode::Standard: return "standard";
        case CurriculumMode::C1: return "c1";
        case CurriculumMode::C2: return "c2";
    }
    return "unknown";
}

CurriculumMode curriculum_mode_from_name(const std::string& name) {
    if (name == "standard" || name == "none") return CurriculumMode::Standard;
    if (name == "c1") return CurriculumMode::C1;
    if (name == "c2") return CurriculumMode::C2;
    throw ConfigError("unknown curriculum mode: " + name);
}

const char* steer_mode_name(SteerMode mode) {
    return mode == SteerMode::Absolute ? "absolute" : "rate_window";
}

SteerMode steer_mode_from_name(const std::string& name) {
    if (name == "absolute") return SteerMode::Absolute;
    if (name == "rate_window") return SteerMode::RateWindow;
    throw ConfigError("unknown steer mode: " + name);
}

ControlAction ActionMapper::to_control(const double* raw, int action_dim,
                                       const EgoState& ego) const {
    ControlAction a;
    const double accel_center = (vehicle.accel_max - vehicle.decel_max) / 2.0;
    const double accel_half = (vehicle.accel_max + vehicle.decel_max) / 2.0;
    a.accel = accel_center + accel_half * std::tanh(raw[0]);
    if (steer_mode == SteerMode::Absolute) {
        a.steer = vehicle.steer_max * std::tanh(raw[1]);
    } else {
        const double window = vehicle.steer_rate_max * dt;
        a.steer = std::clamp(ego.prev_steer + window * std::tanh(raw[1]),
                             -vehicle.steer_max, vehicle.steer_max);
    }
    if (action_dim >= 3) a.pred = std::clamp(raw[2], 0.0, 1.0);
    return a;
}

void PpoConfig::validate() const {
    if (batch != horizon * n_envs) {
        throw ConfigError("batch size must equal horizon * n_envs");
    }
    if (n_envs <= 0 || horizon <= 0 || iterations <= 0 ||
        epochs_per_update <= 0 || minibatch_size <= 0) {
        throw ConfigError("PPO counts must be positive");
    }
    if (gamma <= 0.0 || gamma > 1.0 || gae_lambda < 0.0 || gae_lambda > 1.0) {
        throw ConfigError("invalid gamma or lambda");
    }
    if (clip <= 0.0 || learning_rate <= 0.0) {
        throw ConfigError("clip and learning_rate must be positive");
    }
    if (minibatch_size > batch) {
        throw ConfigError("minibatch_size must not exceed the batch size");
    }
}

GaeResult compute_gae(const std::vector<double>& rewards,
                      const std::vector<double>& values,
                      const std::vector<std::uint8_t>& dones,
                      double bootstrap_value, double gamma, double lambda) {
    const size_t n = rewards.size();
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double next_adv = 0.0;
    for (size_t i = n; i-- > 0;) {
        const double not_done = dones[i] ? 0.0 : 1.0;
        const double next_value = (i + 1 < n) ? values[i + 1] : bootstrap_value;
        const double delta =
            rewards[i] + gamma * next_value * not_done - values[i];
        next_adv = delta + gamma * lambda * not_done * next_adv;
        out.advantages[i] = next_adv;
        out.returns[i] = next_adv + values[i];
    }
    return out;
}

double gaussian_log_prob(const double* action, const double* mean,
                         const double* log_std, int dim) {
    constexpr double kLogSqrt2Pi = 0.9189385332046727;  // 0.5 * ln(2*pi)
    double lp = 0.0;
    for (int d = 0; d < dim; ++d) {
        const double inv_std = std::exp(-log_std[d]);
        const double z = (action[d] - mean[d]) * inv_std;
        lp += -0.5 * z * z - log_std[d] - kLogSqrt2Pi;
    }
    return lp;
}

double gaussian_entropy(const double* log_std, int dim) {
    constexpr double kHalfLog2PiE = 1.4189385332046727;  // 0.5 * ln(2*pi*e)
    double h = 0.0;
    for (int d = 0; d < dim; ++d) h += log_std[d] + kHalfLog2PiE;
    return h;
}

void RolloutBuffer::resize(int n_envs_, int horizon_, int obs_dim_,
                           int action_dim_) {
    n_envs = n_envs_;
    horizon = horizon_;
    obs_dim = obs_dim_;
    action_dim = action_dim_;
    const int n = n_envs * horizon;
    obs.setZero(n, obs_dim);
    actions.setZero(n, action_dim);
    log_probs.assign(n, 0.0);
    rewards.assign(n, 0.0);
    values.assign(n, 0.0);
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
    dones.assign(n, 0);
    bootstrap_values.assign(n_envs, 0.0);
}

void RolloutBuffer::compute_advantages(double gamma, double lambda) {
    std::vector<double> r(horizon), v(horizon);
    std::vector<std::uint8_t> d(horizon);
    for (int e = 0; e < n_envs; ++e) {
        for (int t = 0; t < horizon; ++t) {
            const int i = index(t, e);
            r[t] = rewards[i];
            v[t] = values[i];
            d[t] = dones[i];
        }
        const GaeResult res =
            compute_gae(r, v, d, bootstrap_values[e], gamma, lambda);
        for (int t = 0; t < horizon; ++t) {
            const int i = index(t, e);
            advantages[i] = res.advantages[t];
            returns[i] = res.returns[t];
        }
    }
    // Batch normalization of advantages.
    const int n = size();
    double mean = 0.0;
    for (double a : advantages) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : advantages) var += (a - mean) * (a - mean);
    const double std = std::sqrt(var / n);
    for (double& a : advantages) a = (a - mean) / (std + 1e-8);
}

namespace {

double loss_impl(const Mlp& actor, std::span<const double> actor_params,
                 const Mlp& critic, std::span<const double> critic_params,
                 const MiniBatch& batch, const LossSpec& spec,
                 std::span<double> actor_grad, std::span<double> critic_grad,
                 bool with_grad) {
    const int n = batch.size();
    const int act_dim = actor.spec().output_dim;
    const double* log_std = actor_params.data() + actor.param_count();
    const std::span<const double> actor_mlp =
        actor_params.first(static_cast<size_t>(actor.param_count()));

    Mlp::Cache actor_cache, critic_cache;
    const Matrix means =
        actor.forward(actor_mlp, batch.obs, with_grad ? &actor_cache : nullptr);
    const Matrix values = critic.forward(critic_params, batch.obs,
                                         with_grad ? &critic_cache : nullptr);

    Matrix dmeans;
    Matrix dvalues;
    std::vector<double> dlog_std(act_dim, 0.0);
    if (with_grad) {
        dmeans.setZero(n, act_dim);
        dvalues.setZero(n, 1);
    }

    double policy_loss = 0.0;
    double value_loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double lp = gaussian_log_prob(
            batch.actions.row(i).data(), means.row(i).data(), log_std, act_dim);
        const double ratio = std::exp(lp - batch.old_log_probs[i]);
        const double adv = batch.advantages[i];
        const double unclipped = ratio * adv;
        const double clipped =
            std::clamp(ratio, 1.0 - spec.clip, 1.0 + spec.clip) * adv;
        policy_loss -= std::min(unclipped, clipped);

        const double verr = values(i, 0) - batch.returns[i];
        value_loss += verr * verr;

        if (with_grad) {
            if (unclipped <= clipped) {
                const double coeff = -adv * ratio / n;
                for (int d = 0; d < act_dim; ++d) {
                    const double inv_var = std::exp(-2.0 * log_std[d]);
                    const double diff =
                        batch.actions(i, d) - means(i, d);
                    dmeans(i, d) = coeff * diff * inv_var;
                    dlog_std[d] += coeff * (diff * diff * inv_var - 1.0);
                }
            }
            dvalues(i, 0) = 2.0 * spec.value_coef * verr / n;
        }
    }
    policy_loss /= n;
    value_loss = spec.value_coef * value_loss / n;
    const double entropy = gaussian_entropy(log_std, act_dim);
    const double loss = policy_loss + value_loss - spec.entropy_coef * entropy;

    if (with_grad) {
        std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
        std::fill(critic_grad.begin(), critic_grad.end(), 0.0);
        actor.backward(actor_mlp, actor_cache, dmeans,
                       actor_grad.first(static_cast<size_t>(actor.param_count())));
        for (int d = 0; d < act_dim; ++d) {
            actor_grad[actor.param_count() + d] =
                dlog_std[d] - spec.entropy_coef;
        }
        critic.backward(critic_params, critic_cache, dvalues, critic_grad);
    }
    return loss;
}

}  // namespace

double ppo_loss(const Mlp& actor, std::span<const double> actor_params,
                const Mlp& critic, std::span<const double> critic_params,
                const MiniBatch& batch, const LossSpec& spec) {
    return loss_impl(actor, actor_params, critic, critic_params, batch, spec,
                     {}, {}, false);
}

double ppo_loss_and_grad(const Mlp& actor, std::span<const double> actor_params,
                         const Mlp& critic, std::span<const double> critic_params,
                         const MiniBatch& batch, const LossSpec& spec,
                         std::span<double> actor_grad,
                         std::span<double> critic_grad) {
    return loss_impl(actor, actor_params, critic, critic_params, batch, spec,
                     actor_grad, critic_grad, true);
}

// ---------------------------------------------------------------------------
// Checkpoint I/O
// ---------------------------------------------------------------------------

namespace {

constexpr char kCheckpointMagic[8] = {'C', 'W', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IncompatibleCheckpoint("truncated checkpoint file");
    return value;
}

void write_spec(std::ofstream& out, const MlpSpec& spec) {
    write_pod<std::uint32_t>(out, spec.input_dim);
    write_pod<std::uint32_t>(out, spec.hidden_layers);
    write_pod<std::uint32_t>(out, spec.hidden_units);
    write_pod<std::uint32_t>(out, spec.output_dim);
}

MlpSpec read_spec(std::ifstream& in) {
    MlpSpec spec;
    spec.input_dim = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.hidden_layers = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.hidden_units = static_cast<int>(read_pod<std::uint32_t>(in));
    spec.output_dim = static_cast<int>(read_pod<std::uint32_t>(in));
    return spec;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_spec(out, ckpt.actor_spec);
    write_spec(out, ckpt.critic_spec);
    write_pod<std::uint32_t>(out, ckpt.action_dim);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.mode));
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.steer_mode));
    write_pod<std::uint64_t>(out, ckpt.step_count);
    write_pod<std::uint64_t>(out, ckpt.actor_params.size());
    write_pod<std::uint64_t>(out, ckpt.critic_params.size());
    out.write(reinterpret_cast<const char*>(ckpt.actor_params.data()),
              static_cast<std::streamsize>(ckpt.actor_params.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(ckpt.critic_params.data()),
              static_cast<std::streamsize>(ckpt.critic_params.size() * sizeof(double)));
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IncompatibleCheckpoint("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw IncompatibleCheckpoint("bad checkpoint magic in " + path);
    }
    Checkpoint ckpt;
    ckpt.actor_spec = read_spec(in);
    ckpt.critic_spec = read_spec(in);
    ckpt.action_dim = static_cast<int>(read_pod<std::uint32_t>(in));
    ckpt.mode = static_cast<CurriculumMode>(read_pod<std::uint32_t>(in));
    ckpt.steer_mode = static_cast<SteerMode>(read_pod<std::uint32_t>(in));
    ckpt.step_count = read_pod<std::uint64_t>(in);
    const auto n_actor = read_pod<std::uint64_t>(in);
    const auto n_critic = read_pod<std::uint64_t>(in);
    const Mlp actor(ckpt.actor_spec);
    const Mlp critic(ckpt.critic_spec);
    if (n_actor != static_cast<std::uint64_t>(actor.param_count() +
                                              ckpt.actor_spec.output_dim) ||
        n_critic != static_cast<std::uint64_t>(critic.param_count())) {
        throw IncompatibleCheckpoint("parameter count mismatch in " + path);
    }
    if (ckpt.action_dim != ckpt.actor_spec.output_dim) {
        throw IncompatibleCheckpoint("action dim mismatch in " + path);
    }
    ckpt.actor_params.resize(n_actor);
    ckpt.critic_params.resize(n_critic);
    in.read(reinterpret_cast<char*>(ckpt.actor_params.data()),
            static_cast<std::streamsize>(n_actor * sizeof(double)));
    in.read(reinterpret_cast<char*>(ckpt.critic_params.data()),
            static_cast<std::streamsize>(n_critic * sizeof(double)));
    if (!in) throw IncompatibleCheckpoint("truncated checkpoint file " + path);
    return ckpt;
}

// ---------------------------------------------------------------------------
// Training curve I/O
// ---------------------------------------------------------------------------

std::string curve_to_text(const std::vector<CurvePoint>& curve) {
    std::string out =
        "# iteration steps mean_episode_reward moving_avg_10 "
        "success_rate_train phase_or_mean_pred\n";
    char line[256];
    for (const CurvePoint& p : curve) {
        std::snprintf(line, sizeof(line), "%d %lld %.10g %.10g %.10g %.10g\n",
                      p.iteration, p.steps, p.mean_episode_reward,
                      p.moving_avg_10, p.success_rate_train,
                      p.phase_or_mean_pred);
        out += line;
    }
    return out;
}

std::vector<CurvePoint> curve_from_text(const std::string& text) {
    std::vector<CurvePoint> curve;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        CurvePoint p;
        if (std::sscanf(line.c_str(), "%d %lld %lg %lg %lg %lg", &p.iteration,
                        &p.steps, &p.mean_episode_reward, &p.moving_avg_10,
                        &p.success_rate_train, &p.phase_or_mean_pred) != 6) {
            throw ParseError("malformed curve line: " + line);
        }
        curve.push_back(p);
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace {

struct EnvSlot {
    std::unique_ptr<Environment> env;
    Rng rng;
    Observation obs;  // masked policy input

    explicit EnvSlot(Rng r) : rng(r) {}
};

void run_chunks(int n_chunks, int n_threads,
                const std::function<void(int)>& body) {
    if (n_threads <= 1) {
        for (int c = 0; c < n_chunks; ++c) body(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(n_threads, n_chunks);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) {
                body(c);
            }
        });
    }
    for (auto& t : pool) t.join();
}

void fisher_yates(std::vector<int>& perm, Rng& rng) {
    for (int i = static_cast<int>(perm.size()) - 1; i > 0; --i) {
        const int j = rng.uniform_int(0, i);
        std::swap(perm[i], perm[j]);
    }
}

}  // namespace

TrainResult train(const std::vector<ScenarioSpec>& scenarios,
                  const TrainOptions& options,
                  const std::function<void(const CurvePoint&)>& on_iteration) {
    if (scenarios.empty()) throw ConfigError("training scenario set is empty");
    options.ppo.validate();
    options.reward.validate();

    const PpoConfig& cfg = options.ppo;
    const int action_dim = action_dim_for(options.mode);
    const int n_future = kFutureSteps;

    Curriculum1Config c1 = options.c1;
    if (options.mode == CurriculumMode::C1) {
        if (c1.phase_boundaries.empty()) {
            c1 = Curriculum1Config::equal_split(c1.n_future, cfg.iterations);
        }
        c1.total_iterations = cfg.iterations;
        c1.validate();
    }
    Curriculum2Config c2 = options.c2;
    if (options.mode == CurriculumMode::C2) c2.validate();

    const Mlp actor(MlpSpec{kObsDim, 8, 64, action_dim});
    const Mlp critic(MlpSpec{kObsDim, 8, 64, 1});

    Rng master(options.seed);
    Rng actor_rng = master.spawn(1);
    Rng critic_rng = master.spawn(2);
    Rng shuffle_rng = master.spawn(3);

    std::vector<double> actor_params(actor.param_count() + action_dim, 0.0);
    std::vector<double> critic_params(critic.param_count(), 0.0);
    actor.init_params(std::span<double>(actor_params.data(),
                                        static_cast<size_t>(actor.param_count())),
                      actor_rng, 0.01);
    critic.init_params(critic_params, critic_rng, 1.0);
    for (int d = 0; d < action_dim; ++d) {
        actor_params[actor.param_count() + d] = cfg.log_std_init;
    }

    const ActionMapper mapper{options.vehicle, options.dt, options.steer_mode};

    int phase = 0;
    const auto mask_for_mode = [&](Observation& obs, double pred) {
        switch (options.mode) {
            case CurriculumMode::Standard:
                mask_all_futures(obs, n_future);
                return 0.0;
            case CurriculumMode::C1:
                obs = dropout_c1(obs, phase, n_future);
                return 0.0;
            case CurriculumMode::C2: {
                auto [masked, bonus] = dropout_c2(obs, pred, c2);
                obs = masked;
                return bonus;
            }
        }
        return 0.0;
    };

    std::vector<EnvSlot> slots;
    slots.reserve(cfg.n_envs);
    const auto reset_slot = [&](EnvSlot& slot) {
        const int idx =
            slot.rng.uniform_int(0, static_cast<int>(scenarios.size()) - 1);
        slot.env = std::make_unique<Environment>(scenarios[idx], options.vehicle,
                                                 options.reward, options.dt);
        slot.obs = slot.env->reset();
        // Reset observations carry no pred action yet: curriculum 2 starts
        // the episode unmasked, curriculum 1 masks by phase.
        if (options.mode != CurriculumMode::C2) mask_for_mode(slot.obs, 0.0);
    };
    for (int e = 0; e < cfg.n_envs; ++e) {
        slots.emplace_back(master.spawn(100 + static_cast<std::uint64_t>(e)));
        reset_slot(slots.back());
    }

    RolloutBuffer buffer;
    buffer.resize(cfg.n_envs, cfg.horizon, kObsDim, action_dim);

    AdamState actor_adam(actor_params.size());
    AdamState critic_adam(critic_params.size());
    const LossSpec loss_spec{cfg.clip, cfg.value_coef, cfg.entropy_coef};

    constexpr int kGradChunks = 8;
    std::vector<std::vector<double>> chunk_actor_grads(
        kGradChunks, std::vector<double>(actor_params.size(), 0.0));
    std::vector<std::vector<double>> chunk_critic_grads(
        kGradChunks, std::vector<double>(critic_params.size(), 0.0));

    TrainResult result;
    std::ofstream curve_file;
    if (!options.curve_path.empty()) {
        curve_file.open(options.curve_path);
        curve_file << "# iteration steps mean_episode_reward moving_avg_10 "
                      "success_rate_train phase_or_mean_pred\n";
    }

    double last_mean_reward = 0.0;
    double last_success = 0.0;

    for (int iter = 0; iter < cfg.iterations; ++iter) {
        if (options.mode == CurriculumMode::C1) {
            phase = phase_for_iteration(iter, c1);
        }

        int episodes_done = 0;
        int episodes_goal = 0;
        double episodes_reward_sum = 0.0;
        double pred_sum = 0.0;
        std::vector<double> ep_reward(cfg.n_envs, 0.0);

        Matrix obs_batch(cfg.n_envs, kObsDim);
        for (int t = 0; t < cfg.horizon; ++t) {
            for (int e = 0; e < cfg.n_envs; ++e) {
                for (int k = 0; k < kObsDim; ++k) {
                    obs_batch(e, k) = slots[e].obs.values[k];
                }
            }
            const Matrix means = actor.forward(
                std::span<const double>(actor_params.data(),
                                        static_cast<size_t>(actor.param_count())),
                obs_batch);
            const Matrix values = critic.forward(critic_params, obs_batch);
            const double* log_std = actor_params.data() + actor.param_count();

            for (int e = 0; e < cfg.n_envs; ++e) {
                EnvSlot& slot = slots[e];
                const int row = buffer.index(t, e);
                buffer.obs.row(row) = obs_batch.row(e);
                buffer.values[row] = values(e, 0);

                std::array<double, 3> raw{};
                for (int d = 0; d < action_dim; ++d) {
                    raw[d] = means(e, d) +
                             std::exp(log_std[d]) * slot.rng.normal();
                    buffer.actions(row, d) = raw[d];
                }
                buffer.log_probs[row] = gaussian_log_prob(
                    raw.data(), means.row(e).data(), log_std, action_dim);

                const ControlAction control =
                    mapper.to_control(raw.data(), action_dim, slot.env->ego());
                if (action_dim >= 3) pred_sum += control.pred;

                StepOutcome outcome = slot.env->step(control);
                double reward = outcome.reward;
                reward += mask_for_mode(outcome.obs, control.pred);

                buffer.rewards[row] = reward;
                buffer.dones[row] = outcome.done ? 1 : 0;
                ep_reward[e] += reward;

                if (outcome.done) {
                    ++episodes_done;
                    if (outcome.termination == Termination::Goal) ++episodes_goal;
                    episodes_reward_sum += ep_reward[e];
                    ep_reward[e] = 0.0;
                    reset_slot(slot);
                } else {
                    slot.obs = outcome.obs;
                }
            }
        }

        for (int e = 0; e < cfg.n_envs; ++e) {
            for (int k = 0; k < kObsDim; ++k) {
                obs_batch(e, k) = slots[e].obs.values[k];
            }
        }
        const Matrix boot = critic.forward(critic_params, obs_batch);
        for (int e = 0; e < cfg.n_envs; ++e) buffer.bootstrap_values[e] = boot(e, 0);

        buffer.compute_advantages(cfg.gamma, cfg.gae_lambda);

        // Minibatch updates; gradient reduction over fixed chunks keeps the
        // result independent of the thread count.
        std::vector<int> perm(buffer.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<double> actor_grad(actor_params.size());
        std::vector<double> critic_grad(critic_params.size());
        for (int epoch = 0; epoch < cfg.epochs_per_update; ++epoch) {
            fisher_yates(perm, shuffle_rng);
            for (int start = 0; start + cfg.minibatch_size <= buffer.size();
                 start += cfg.minibatch_size) {
                const int mb = cfg.minibatch_size;
                std::vector<std::array<int, 2>> chunk_ranges(kGradChunks);
                for (int c = 0; c < kGradChunks; ++c) {
                    chunk_ranges[c] = {start + c * mb / kGradChunks,
                                       start + (c + 1) * mb / kGradChunks};
                }
                run_chunks(kGradChunks, options.n_threads, [&](int c) {
                    const auto [lo, hi] = chunk_ranges[c];
                    const int count = hi - lo;
                    if (count <= 0) return;
                    MiniBatch batch;
                    batch.obs.resize(count, kObsDim);
                    batch.actions.resize(count, action_dim);
                    batch.old_log_probs.resize(count);
                    batch.advantages.resize(count);
                    batch.returns.resize(count);
                    for (int i = 0; i < count; ++i) {
                        const int src = perm[lo + i];
                        batch.obs.row(i) = buffer.obs.row(src);
                        batch.actions.row(i) = buffer.actions.row(src);
                        batch.old_log_probs[i] = buffer.log_probs[src];
                        batch.advantages[i] = buffer.advantages[src];
                        batch.returns[i] = buffer.returns[src];
                    }
                    ppo_loss_and_grad(actor, actor_params, critic, critic_params,
                                      batch, loss_spec, chunk_actor_grads[c],
                                      chunk_critic_grads[c]);
                });
                std::fill(actor_grad.begin(), actor_grad.end(), 0.0);
                std::fill(critic_grad.begin(), critic_grad.end(), 0.0);
                for (int c = 0; c < kGradChunks; ++c) {
                    const auto [lo, hi] = chunk_ranges[c];
                    const double w = static_cast<double>(hi - lo) / mb;
                    for (size_t i = 0; i < actor_grad.size(); ++i) {
                        actor_grad[i] += w * chunk_actor_grads[c][i];
                    }
                    for (size_t i = 0; i < critic_grad.size(); ++i) {
                        critic_grad[i] += w * chunk_critic_grads[c][i];
                    }
                }
                if (cfg.max_grad_norm > 0.0) {
                    double sq = 0.0;
                    for (double g : actor_grad) sq += g * g;
                    for (double g : critic_grad) sq += g * g;
                    const double norm = std::sqrt(sq);
                    if (norm > cfg.max_grad_norm) {
                        const double scale = cfg.max_grad_norm / norm;
                        for (double& g : actor_grad) g *= scale;
                        for (double& g : critic_grad) g *= scale;
                    }
                }
                adam_step(actor_params, actor_grad, actor_adam, cfg.learning_rate);
                adam_step(critic_params, critic_grad, critic_adam,
                          cfg.learning_rate);
            }
        }

        CurvePoint point;
        point.iteration = iter + 1;
        point.steps = static_cast<long long>(iter + 1) * cfg.batch;
        if (episodes_done > 0) {
            last_mean_reward = episodes_reward_sum / episodes_done;
            last_success = static_cast<double>(episodes_goal) / episodes_done;
        }
        point.mean_episode_reward = last_mean_reward;
        point.success_rate_train = last_success;
        double avg = 0.0;
        const int lookback = std::min<int>(9, static_cast<int>(result.curve.size()));
        for (int k = 0; k < lookback; ++k) {
            avg += result.curve[result.curve.size() - 1 - k].mean_episode_reward;
        }
        point.moving_avg_10 = (avg + point.mean_episode_reward) / (lookback + 1);
        point.phase_or_mean_pred =
            options.mode == CurriculumMode::C1
                ? static_cast<double>(phase)
                : (options.mode == CurriculumMode::C2
                       ? pred_sum / cfg.batch
                       : 0.0);
        result.curve.push_back(point);
        if (curve_file.is_open()) {
            char line[256];
            std::snprintf(line, sizeof(line), "%d %lld %.10g %.10g %.10g %.10g\n",
                          point.iteration, point.steps, point.mean_episode_reward,
                          point.moving_avg_10, point.success_rate_train,
                          point.phase_or_mean_pred);
            curve_file << line << std::flush;
        }
        if (on_iteration) on_iteration(point);

        const bool periodic = options.checkpoint_interval > 0 &&
                              (iter + 1) % options.checkpoint_interval == 0;
        if (!options.checkpoint_path.empty() &&
            (periodic || iter + 1 == cfg.iterations)) {
            Checkpoint ckpt{actor.spec(),   critic.spec(),
                            action_dim,     options.mode,
                            options.steer_mode,
                            static_cast<std::uint64_t>(point.steps),
                            actor_params,   critic_params};
            save_checkpoint(ckpt, options.checkpoint_path);
        }
    }

    result.checkpoint =
        Checkpoint{actor.spec(),
                   critic.spec(),
                   action_dim,
                   options.mode,
                   options.steer_mode,
                   static_cast<std::uint64_t>(cfg.iterations) *
                       static_cast<std::uint64_t>(cfg.batch),
                   actor_params,
                   critic_params};
    return result;
}

}  // namespace crossway

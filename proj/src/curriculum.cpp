#include "crossway/curriculum.hpp"

#include <algorithm>

#include "crossway/errors.hpp"

namespace crossway {

Curriculum1Config Curriculum1Config::equal_split(int n_future,
                                                 int total_iterations) {
    Curriculum1Config cfg;
    cfg.n_future = n_future;
    cfg.total_iterations = total_iterations;
    for (int k = 1; k <= n_future; ++k) {
        cfg.phase_boundaries.push_back(
            static_cast<int>(static_cast<long long>(total_iterations) * k /
                             (n_future + 1)));
    }
    return cfg;
}

void Curriculum1Config::validate() const {
    if (n_future < 1 || n_future > kFutureSteps) {
        throw ConfigError("curriculum 1: n_future must be in [1, 4]");
    }
    if (static_cast<int>(phase_boundaries.size()) != n_future) {
        throw ConfigError("curriculum 1: need exactly n_future phase boundaries");
    }
    int prev = 0;
    for (int b : phase_boundaries) {
        if (b <= prev || b >= total_iterations) {
            throw ConfigError(
                "curriculum 1: phase boundaries must be strictly increasing "
                "within (0, total_iterations)");
        }
        prev = b;
    }
}

void Curriculum2Config::validate() const {
    const int n = n_future();
    if (n < 1 || n > kFutureSteps) {
        throw ConfigError("curriculum 2: psi must have 1 to 4 entries");
    }
    if (static_cast<int>(kappa.size()) != n) {
        throw ConfigError("curriculum 2: psi and kappa must have equal length");
    }
    for (int i = 0; i < n; ++i) {
        if (psi[i] <= 0.0) throw ConfigError("curriculum 2: psi must be positive");
        if (kappa[i] <= 0.0 || kappa[i] >= 1.0) {
            throw ConfigError("curriculum 2: kappa must lie in (0, 1)");
        }
        if (i > 0 && psi[i] >= psi[i - 1]) {
            throw ConfigError("curriculum 2: psi must be strictly decreasing");
        }
        if (i > 0 && kappa[i] >= kappa[i - 1]) {
            throw ConfigError("curriculum 2: kappa must be strictly decreasing");
        }
    }
}

int phase_for_iteration(int iteration, const Curriculum1Config& cfg) {
    int phase = 0;
    for (int b : cfg.phase_boundaries) {
        if (iteration >= b) ++phase;
    }
    return phase;
}

void mask_future_step(Observation& obs, int future_step) {
    for (int j = 0; j < kTargetSlots; ++j) {
        for (int f = 0; f < 4; ++f) {
            obs.values[obs_idx::target(j, future_step, f)] = 0.0;
        }
    }
}

void mask_all_futures(Observation& obs, int n_future) {
    for (int i = 1; i <= n_future; ++i) mask_future_step(obs, i);
}

Observation dropout_c1(Observation obs, int phase, int n_future) {
    for (int i = std::max(1, n_future - phase + 1); i <= n_future; ++i) {
        mask_future_step(obs, i);
    }
    return obs;
}

std::pair<Observation, double> dropout_c2(Observation obs, double pred,
                                          const Curriculum2Config& cfg) {
    double bonus = 0.0;
    for (int i = 1; i <= cfg.n_future(); ++i) {
        if (pred >= cfg.kappa[i - 1]) {
            mask_future_step(obs, i);
            bonus += cfg.psi[i - 1];
        }
    }
    return {obs, bonus};
}

}  // namespace crossway

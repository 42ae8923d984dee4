#pragma once

#include <utility>
#include <vector>

#include "crossway/env.hpp"

namespace crossway {

// Phase-scheduled dropout: training runs in n_future + 1 phases; phase p
// drops the last p future prediction steps from the observation.
struct Curriculum1Config {
    int n_future = kFutureSteps;
    int total_iterations = 650;
    std::vector<int> phase_boundaries;  // strictly increasing, length n_future

    static Curriculum1Config equal_split(int n_future, int total_iterations);
    void validate() const;
};

// Action-gated dropout: the pred action drops a suffix of future steps,
// each dropped step i paying a bonus psi[i-1]. psi and kappa are strictly
// decreasing (the incentive to drop more).
struct Curriculum2Config {
    std::vector<double> psi = {0.4, 0.3, 0.2, 0.1};
    std::vector<double> kappa = {0.8, 0.6, 0.4, 0.2};

    int n_future() const { return static_cast<int>(psi.size()); }
    void validate() const;
};

int phase_for_iteration(int iteration, const Curriculum1Config& cfg);

// Zeroes the 20 observation entries of future step i (1-based), all
// vehicle slots and fields. Current states (step 0) are never dropped.
void mask_future_step(Observation& obs, int future_step);
void mask_all_futures(Observation& obs, int n_future = kFutureSteps);

Observation dropout_c1(Observation obs, int phase, int n_future);

// Returns the masked observation and the reward bonus.
std::pair<Observation, double> dropout_c2(Observation obs, double pred,
                                          const Curriculum2Config& cfg);

}  // namespace crossway

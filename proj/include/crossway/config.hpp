#pragma once

#include <string>

#include "crossway/curriculum.hpp"
#include "crossway/env.hpp"
#include "crossway/ppo.hpp"
#include "crossway/ttc.hpp"

namespace crossway {

// Bundle of every tunable parameter, loadable from a JSON file. Missing
// keys keep their defaults; unknown top-level keys are rejected.
struct AppConfig {
    VehicleParams vehicle;
    RewardParams reward;
    PpoConfig ppo;
    Curriculum1Config c1;  // empty boundaries = equal split over iterations
    Curriculum2Config c2;
    TtcConfig ttc;
    SteerMode steer_mode = SteerMode::RateWindow;
    double dt = 0.1;

    void validate() const;
};

AppConfig load_app_config(const std::string& path);  // throws ConfigError
AppConfig app_config_from_json_text(const std::string& text);
std::string app_config_to_json_text(const AppConfig& cfg);
void save_app_config(const AppConfig& cfg, const std::string& path);

}  // namespace crossway

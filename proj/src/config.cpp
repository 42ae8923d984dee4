#include "crossway/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "crossway/errors.hpp"

namespace crossway {

namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                ok = true;
                break;
            }
        }
        if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("bad value for '") + key +
                              "': " + e.what());
        }
    }
}

}  // namespace

void AppConfig::validate() const {
    reward.validate();
    ppo.validate();
    c2.validate();
    ttc.validate();
    if (dt <= 0.0) throw ConfigError("dt must be positive");
    if (!c1.phase_boundaries.empty()) c1.validate();
}

AppConfig app_config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"vehicle", "reward", "ppo", "curriculum1", "curriculum2", "ttc",
                "steer_mode", "dt"},
               "config root");

    AppConfig cfg;
    if (j.contains("vehicle")) {
        const json& v = j["vehicle"];
        check_keys(v,
                   {"wheelbase", "steer_max", "steer_rate_max", "accel_max",
                    "decel_max", "v_max", "length", "width"},
                   "vehicle");
        read(v, "wheelbase", cfg.vehicle.wheelbase);
        read(v, "steer_max", cfg.vehicle.steer_max);
        read(v, "steer_rate_max", cfg.vehicle.steer_rate_max);
        read(v, "accel_max", cfg.vehicle.accel_max);
        read(v, "decel_max", cfg.vehicle.decel_max);
        read(v, "v_max", cfg.vehicle.v_max);
        read(v, "length", cfg.vehicle.length);
        read(v, "width", cfg.vehicle.width);
    }
    if (j.contains("reward")) {
        const json& r = j["reward"];
        check_keys(r, {"rho1", "rho2", "sigma1", "sigma2", "phi"}, "reward");
        read(r, "rho1", cfg.reward.rho1);
        read(r, "rho2", cfg.reward.rho2);
        read(r, "sigma1", cfg.reward.sigma1);
        read(r, "sigma2", cfg.reward.sigma2);
        read(r, "phi", cfg.reward.phi);
    }
    if (j.contains("ppo")) {
        const json& p = j["ppo"];
        check_keys(p,
                   {"gamma", "gae_lambda", "clip", "learning_rate", "n_envs",
                    "horizon", "batch", "iterations", "epochs_per_update",
                    "minibatch_size", "value_coef", "entropy_coef",
                    "max_grad_norm", "log_std_init"},
                   "ppo");
        read(p, "gamma", cfg.ppo.gamma);
        read(p, "gae_lambda", cfg.ppo.gae_lambda);
        read(p, "clip", cfg.ppo.clip);
        read(p, "learning_rate", cfg.ppo.learning_rate);
        read(p, "n_envs", cfg.ppo.n_envs);
        read(p, "horizon", cfg.ppo.horizon);
        read(p, "iterations", cfg.ppo.iterations);
        read(p, "epochs_per_update", cfg.ppo.epochs_per_update);
        read(p, "minibatch_size", cfg.ppo.minibatch_size);
        read(p, "value_coef", cfg.ppo.value_coef);
        read(p, "entropy_coef", cfg.ppo.entropy_coef);
        read(p, "max_grad_norm", cfg.ppo.max_grad_norm);
        read(p, "log_std_init", cfg.ppo.log_std_init);
        cfg.ppo.batch = cfg.ppo.n_envs * cfg.ppo.horizon;
        read(p, "batch", cfg.ppo.batch);
    }
    if (j.contains("curriculum1")) {
        const json& c = j["curriculum1"];
        check_keys(c, {"n_future", "phase_boundaries"}, "curriculum1");
        read(c, "n_future", cfg.c1.n_future);
        read(c, "phase_boundaries", cfg.c1.phase_boundaries);
    }
    if (j.contains("curriculum2")) {
        const json& c = j["curriculum2"];
        check_keys(c, {"psi", "kappa"}, "curriculum2");
        read(c, "psi", cfg.c2.psi);
        read(c, "kappa", cfg.c2.kappa);
    }
    if (j.contains("ttc")) {
        const json& t = j["ttc"];
        check_keys(t,
                   {"gap_threshold", "cruise_speed", "comfort_decel",
                    "lookahead"},
                   "ttc");
        read(t, "gap_threshold", cfg.ttc.gap_threshold);
        read(t, "cruise_speed", cfg.ttc.cruise_speed);
        read(t, "comfort_decel", cfg.ttc.comfort_decel);
        read(t, "lookahead", cfg.ttc.lookahead);
    }
    if (j.contains("steer_mode")) {
        cfg.steer_mode = steer_mode_from_name(j["steer_mode"].get<std::string>());
    }
    read(j, "dt", cfg.dt);

    // c1 boundaries are tied to the training length; fill defaults here so
    // the saved config is explicit.
    cfg.c1.total_iterations = cfg.ppo.iterations;
    cfg.validate();
    return cfg;
}

AppConfig load_app_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return app_config_from_json_text(text);
}

std::string app_config_to_json_text(const AppConfig& cfg) {
    json j;
    j["vehicle"] = {{"wheelbase", cfg.vehicle.wheelbase},
                    {"steer_max", cfg.vehicle.steer_max},
                    {"steer_rate_max", cfg.vehicle.steer_rate_max},
                    {"accel_max", cfg.vehicle.accel_max},
                    {"decel_max", cfg.vehicle.decel_max},
                    {"v_max", cfg.vehicle.v_max},
                    {"length", cfg.vehicle.length},
                    {"width", cfg.vehicle.width}};
    j["reward"] = {{"rho1", cfg.reward.rho1},
                   {"rho2", cfg.reward.rho2},
                   {"sigma1", cfg.reward.sigma1},
                   {"sigma2", cfg.reward.sigma2},
                   {"phi", cfg.reward.phi}};
    j["ppo"] = {{"gamma", cfg.ppo.gamma},
                {"gae_lambda", cfg.ppo.gae_lambda},
                {"clip", cfg.ppo.clip},
                {"learning_rate", cfg.ppo.learning_rate},
                {"n_envs", cfg.ppo.n_envs},
                {"horizon", cfg.ppo.horizon},
                {"batch", cfg.ppo.batch},
                {"iterations", cfg.ppo.iterations},
                {"epochs_per_update", cfg.ppo.epochs_per_update},
                {"minibatch_size", cfg.ppo.minibatch_size},
                {"value_coef", cfg.ppo.value_coef},
                {"entropy_coef", cfg.ppo.entropy_coef},
                {"max_grad_norm", cfg.ppo.max_grad_norm},
                {"log_std_init", cfg.ppo.log_std_init}};
    j["curriculum1"] = {{"n_future", cfg.c1.n_future},
                        {"phase_boundaries", cfg.c1.phase_boundaries}};
    j["curriculum2"] = {{"psi", cfg.c2.psi}, {"kappa", cfg.c2.kappa}};
    j["ttc"] = {{"gap_threshold", cfg.ttc.gap_threshold},
                {"cruise_speed", cfg.ttc.cruise_speed},
                {"comfort_decel", cfg.ttc.comfort_decel},
                {"lookahead", cfg.ttc.lookahead}};
    j["steer_mode"] = steer_mode_name(cfg.steer_mode);
    j["dt"] = cfg.dt;
    return j.dump(1);
}

void save_app_config(const AppConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << app_config_to_json_text(cfg) << "\n";
}

}  // namespace crossway

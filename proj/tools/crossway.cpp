#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crossway/config.hpp"
#include "crossway/errors.hpp"
#include "crossway/eval.hpp"
#include "crossway/ppo.hpp"
#include "crossway/scenario.hpp"

namespace fs = std::filesystem;
using namespace crossway;

namespace {

struct Manifest {
    std::string kind;
    std::vector<std::string> train_files;
    std::vector<std::string> test_files;
};

void write_manifest(const Manifest& m, const fs::path& path,
                    std::uint64_t seed, int count, double split) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path.string());
    out << "# kind=" << m.kind << " seed=" << seed << " count=" << count
        << " split=" << split << "\n";
    for (const auto& f : m.train_files) out << "train " << f << "\n";
    for (const auto& f : m.test_files) out << "test " << f << "\n";
}

Manifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open manifest: " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string split_name, file;
        ls >> split_name >> file;
        if (split_name == "train") {
            m.train_files.push_back(file);
        } else if (split_name == "test") {
            m.test_files.push_back(file);
        } else {
            throw ParseError("bad manifest line: " + line);
        }
    }
    return m;
}

std::vector<ScenarioSpec> load_split(const fs::path& manifest_path,
                                     const std::string& split) {
    const Manifest m = read_manifest(manifest_path);
    const auto& files = split == "train" ? m.train_files : m.test_files;
    if (split != "train" && split != "test") {
        throw ConfigError("split must be 'train' or 'test'");
    }
    const fs::path dir = manifest_path.parent_path();
    std::vector<ScenarioSpec> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_scenario_file((dir / f).string()));
    return out;
}

GoalBranch branch_from_name(const std::string& name) {
    if (name == "random") return GoalBranch::Random;
    if (name == "left") return GoalBranch::Left;
    if (name == "straight") return GoalBranch::Straight;
    if (name == "right") return GoalBranch::Right;
    throw ConfigError("unknown goal branch: " + name);
}

int cmd_gen(std::uint64_t seed, int count, const std::string& kind,
            double split, const std::string& out_dir, int num_targets,
            int timeout_steps, const std::string& branch) {
    if (count <= 0 || split <= 0.0 || split > 1.0) {
        throw InvalidConfig("count must be positive and split in (0, 1]");
    }
    GenerationConfig gen_cfg;
    gen_cfg.num_targets = num_targets;
    gen_cfg.timeout_steps = timeout_steps;
    gen_cfg.goal_branch = branch_from_name(branch);

    fs::create_directories(out_dir);
    Manifest manifest;
    manifest.kind = kind;
    const int n_train = static_cast<int>(count * split + 1e-9);
    for (int i = 0; i < count; ++i) {
        const std::uint64_t scen_seed = seed + static_cast<std::uint64_t>(i);
        const ScenarioSpec spec = kind == "fourway"
                                      ? generate_four_way(scen_seed, gen_cfg)
                                      : generate_t_junction(scen_seed, gen_cfg);
        const std::string file = spec.id + ".json";
        save_scenario_file(spec, (fs::path(out_dir) / file).string());
        (i < n_train ? manifest.train_files : manifest.test_files)
            .push_back(file);
    }
    write_manifest(manifest, fs::path(out_dir) / "manifest.txt", seed, count,
                   split);
    std::printf("wrote %d scenarios (%d train / %d test) to %s\n", count,
                n_train, count - n_train, out_dir.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& manifest,
              const std::string& mode_name, std::uint64_t seed,
              const std::string& checkpoint_path, const std::string& curve_path,
              int iterations_override, int n_threads, int checkpoint_interval) {
    AppConfig cfg;
    if (!config_path.empty()) cfg = load_app_config(config_path);
    if (iterations_override > 0) cfg.ppo.iterations = iterations_override;

    TrainOptions opts;
    opts.ppo = cfg.ppo;
    opts.mode = curriculum_mode_from_name(mode_name);
    opts.c1 = cfg.c1;
    opts.c2 = cfg.c2;
    opts.vehicle = cfg.vehicle;
    opts.reward = cfg.reward;
    opts.steer_mode = cfg.steer_mode;
    opts.dt = cfg.dt;
    opts.seed = seed;
    opts.n_threads = n_threads;
    opts.checkpoint_path = checkpoint_path;
    opts.checkpoint_interval = checkpoint_interval;
    opts.curve_path = curve_path;

    const auto scenarios = load_split(manifest, "train");
    train(scenarios, opts, [](const CurvePoint& p) {
        std::printf("iter %d steps %lld reward %.2f success %.2f\n",
                    p.iteration, p.steps, p.mean_episode_reward,
                    p.success_rate_train);
        std::fflush(stdout);
    });
    std::printf("done; checkpoint at %s\n", checkpoint_path.c_str());
    return 0;
}

int cmd_eval(const std::string& policy_name, const std::string& config_path,
             const std::string& manifest, const std::string& split,
             const std::string& out_path, int n_threads) {
    AppConfig cfg;
    if (!config_path.empty()) cfg = load_app_config(config_path);
    Policy policy;
    if (policy_name == "ttc") {
        policy = make_ttc_policy(cfg.ttc);
    } else {
        policy = make_checkpoint_policy(load_checkpoint(policy_name));
    }
    const auto scenarios = load_split(manifest, split);
    const EvalReport report =
        evaluate(scenarios, policy, cfg.vehicle, cfg.reward, cfg.dt, n_threads);
    const std::string text = report_to_text(report);
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        std::ofstream out(out_path);
        out << text;
    }
    std::printf("success_rate %.4f over %zu scenarios\n", report.success_rate,
                report.rows.size());
    return 0;
}

int cmd_replay(const std::string& policy_name, const std::string& config_path,
               const std::string& scenario_path, const std::string& out_path) {
    AppConfig cfg;
    if (!config_path.empty()) cfg = load_app_config(config_path);
    Policy policy;
    if (policy_name == "ttc") {
        policy = make_ttc_policy(cfg.ttc);
    } else {
        policy = make_checkpoint_policy(load_checkpoint(policy_name));
    }
    const ScenarioSpec spec = load_scenario_file(scenario_path);
    std::string trace = "# step x y theta v accel steer pred reward termination\n";
    const EvalRow row = evaluate_episode(spec, policy, cfg.vehicle, cfg.reward,
                                         cfg.dt, &trace);
    if (out_path.empty()) {
        std::fputs(trace.c_str(), stdout);
    } else {
        std::ofstream out(out_path);
        out << trace;
    }
    std::printf("scenario %s: %s after %d steps, reward %.2f\n",
                row.scenario_id.c_str(), termination_name(row.termination),
                row.steps, row.total_reward);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsignalized-intersection driving simulator and RL stack"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a scenario dataset");
    std::uint64_t gen_seed = 0;
    int gen_count = 100;
    std::string gen_kind = "fourway";
    double gen_split = 0.7;
    std::string gen_out = "dataset";
    int gen_targets = 3;
    int gen_timeout = 1500;
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--count", gen_count, "Number of scenarios");
    gen->add_option("--kind", gen_kind, "fourway or tjunction")
        ->check(CLI::IsMember({"fourway", "tjunction"}));
    gen->add_option("--split", gen_split, "Train fraction (default 0.7)");
    gen->add_option("--out", gen_out, "Output directory");
    gen->add_option("--targets", gen_targets, "Target vehicles per scenario");
    gen->add_option("--timeout", gen_timeout, "Episode timeout in steps");
    std::string gen_branch = "random";
    gen->add_option("--branch", gen_branch, "Ego goal branch")
        ->check(CLI::IsMember({"random", "left", "straight", "right"}));

    // train
    auto* tr = app.add_subcommand("train", "Train a PPO agent");
    std::string tr_config, tr_manifest, tr_mode = "standard";
    std::string tr_ckpt = "checkpoint.bin", tr_curve = "curve.txt";
    std::uint64_t tr_seed = 0;
    int tr_iters = 0, tr_threads = 1, tr_ckpt_every = 0;
    tr->add_option("--config", tr_config, "JSON config file");
    tr->add_option("--dataset", tr_manifest, "Path to manifest.txt")
        ->required();
    tr->add_option("--mode", tr_mode, "standard, c1 or c2")
        ->check(CLI::IsMember({"standard", "c1", "c2"}));
    tr->add_option("--seed", tr_seed, "Training seed");
    tr->add_option("--checkpoint", tr_ckpt, "Checkpoint output path");
    tr->add_option("--curve", tr_curve, "Training-curve output path");
    tr->add_option("--iterations", tr_iters, "Override iteration count");
    tr->add_option("--threads", tr_threads, "Worker threads");
    tr->add_option("--checkpoint-interval", tr_ckpt_every,
                   "Checkpoint every k iterations (0 = final only)");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint or TTC");
    std::string ev_policy, ev_config, ev_manifest, ev_split = "test", ev_out;
    int ev_threads = 1;
    ev->add_option("--policy", ev_policy, "Checkpoint path or 'ttc'")
        ->required();
    ev->add_option("--config", ev_config, "JSON config file");
    ev->add_option("--dataset", ev_manifest, "Path to manifest.txt")
        ->required();
    ev->add_option("--split", ev_split, "train or test");
    ev->add_option("--out", ev_out, "Report output path (default stdout)");
    ev->add_option("--threads", ev_threads, "Worker threads");

    // replay
    auto* rp = app.add_subcommand("replay", "Write a per-step episode trace");
    std::string rp_policy, rp_config, rp_scenario, rp_out;
    rp->add_option("--policy", rp_policy, "Checkpoint path or 'ttc'")
        ->required();
    rp->add_option("--config", rp_config, "JSON config file");
    rp->add_option("--scenario", rp_scenario, "Scenario JSON file")
        ->required();
    rp->add_option("--out", rp_out, "Trace output path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            return cmd_gen(gen_seed, gen_count, gen_kind, gen_split, gen_out,
                           gen_targets, gen_timeout, gen_branch);
        }
        if (tr->parsed()) {
            return cmd_train(tr_config, tr_manifest, tr_mode, tr_seed, tr_ckpt,
                             tr_curve, tr_iters, tr_threads, tr_ckpt_every);
        }
        if (ev->parsed()) {
            return cmd_eval(ev_policy, ev_config, ev_manifest, ev_split,
                            ev_out, ev_threads);
        }
        if (rp->parsed()) {
            return cmd_replay(rp_policy, rp_config, rp_scenario, rp_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

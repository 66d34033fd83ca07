#include "sgrl/errors.hpp"
#include "sgrl/io/checkpoint.hpp"
#include "sgrl/io/format.hpp"
#include "sgrl/io/config.hpp"
#include "sgrl/io/trajectory.hpp"
#include "sgrl/selftest.hpp"
#include "sgrl/train/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

json summary_json(const sgrl::io::Config& cfg, const sgrl::train::TrainResult& res) {
    json evals = json::array();
    for (const auto& ev : res.eval_log)
        evals.push_back({{"step", ev.step},
                         {"mean_return", ev.mean_return},
                         {"catastrophes", ev.catastrophes}});
    json init = {{"loaded", res.init.loaded},
                 {"kept", res.init.kept},
                 {"gp_candidates", res.init.gp_candidates},
                 {"gp_inserted", res.init.gp_inserted},
                 {"gp_removed_correlated", res.init.gp_removed_correlated},
                 {"gp_evicted", res.init.gp_evicted},
                 {"initial_beta", res.init.initial_beta}};
    return {{"config", sgrl::io::config_to_json(cfg)},
            {"result",
             {{"total_steps", res.total_steps},
              {"episodes", res.episodes},
              {"catastrophes", res.catastrophes},
              {"catastrophe_episodes", res.catastrophe_episodes},
              {"best_eval_return", res.best_eval_return},
              {"best_eval_step", res.best_eval_step},
              {"final_beta", res.final_beta},
              {"gp_size", res.gp_size},
              {"wall_seconds", res.wall_seconds},
              {"init", init},
              {"evals", evals}}}};
}

void apply_beta_spec(sgrl::io::Config& cfg, const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string mode = spec.substr(0, colon);
    if (mode == "fixed") {
        cfg.beta.mode = "fixed";
        if (colon != std::string::npos)
            cfg.beta.fixed_value = sgrl::io::parse_double(spec.substr(colon + 1));
    } else if (mode == "online") {
        cfg.beta.mode = "online";
        if (colon != std::string::npos)
            cfg.beta.delta = sgrl::io::parse_double(spec.substr(colon + 1));
    } else {
        throw sgrl::ParseError("--beta expects fixed[:value] or online[:delta], got '" +
                               spec + "'");
    }
}

int cmd_train(sgrl::io::Config cfg) {
    sgrl::train::TrainHooks hooks;
    hooks.on_episode = [](const sgrl::train::EpisodeStats& es) {
        if (es.episode % 25 == 0)
            std::cerr << "episode " << es.episode << " step " << es.step << " return "
                      << es.episode_return << " catastrophes "
                      << es.cumulative_catastrophes << " gp " << es.gp_size << " beta "
                      << es.beta_value << "\n";
    };
    hooks.on_eval = [](const sgrl::train::EvalStats& ev) {
        std::cerr << "eval @" << ev.step << ": mean return " << ev.mean_return
                  << ", catastrophes " << ev.catastrophes << "\n";
    };

    const sgrl::train::TrainResult res = sgrl::train::train(cfg, hooks);
    const json summary = summary_json(cfg, res);
    if (!cfg.run.dir.empty()) {
        std::ofstream out(cfg.run.dir + "/summary.json", std::ios::binary);
        if (!out)
            throw sgrl::ParseError("cannot write summary.json");
        out << summary.dump(2) << "\n";
    }
    std::cout << summary.dump(2) << std::endl;
    std::cerr << "training finished: " << res.episodes << " episodes, " << res.catastrophes
              << " catastrophes, best eval return " << res.best_eval_return << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, int episodes, std::uint64_t seed,
             const std::string& trajectory_out) {
    sgrl::io::LoadedCheckpoint ck = sgrl::io::load_checkpoint(checkpoint_path);

    sgrl::env::PendulumParams ep;
    ep.reset_angle = ck.config.env.reset_angle;
    ep.reset_speed = ck.config.env.reset_speed;
    ep.max_torque = ck.config.env.max_torque;
    const sgrl::env::Pendulum env(ep);

    sgrl::Rng rng(seed);
    std::vector<sgrl::rl::Transition> log;
    double total = 0.0;
    int catastrophes = 0;
    for (int e = 0; e < episodes; ++e) {
        Eigen::Vector2d s = env.reset(rng);
        for (int t = 0; t < ck.config.episode_steps; ++t) {
            const Eigen::VectorXd a = ck.agent->policy(s);
            const sgrl::env::StepResult res = env.step(s, a(0));
            total += res.reward;
            if (res.catastrophe)
                ++catastrophes;
            if (!trajectory_out.empty()) {
                sgrl::rl::Transition tr;
                tr.state = s;
                tr.action = a;
                tr.reward = res.reward;
                tr.cost = res.cost;
                tr.next_state = res.next;
                tr.done = (t == ck.config.episode_steps - 1);
                log.push_back(std::move(tr));
            }
            s = res.next;
        }
    }
    if (!trajectory_out.empty())
        sgrl::io::write_trajectory(trajectory_out, log);

    const json out = {{"episodes", episodes},
                      {"mean_return", episodes > 0 ? total / episodes : 0.0},
                      {"catastrophes", catastrophes},
                      {"checkpoint_step", ck.meta.step}};
    std::cout << out.dump(2) << std::endl;
    std::cerr << "eval: mean return " << (episodes > 0 ? total / episodes : 0.0)
              << ", catastrophes " << catastrophes << "\n";
    return 0;
}

int cmd_record(const std::string& policy, int episodes, int steps, double noise,
               std::uint64_t seed, const std::string& out_path) {
    sgrl::env::Pendulum env;
    sgrl::Rng rng(seed);
    std::vector<sgrl::rl::Transition> traj;
    if (policy == "scripted") {
        traj = sgrl::train::record_scripted(env, episodes, steps, noise, rng);
    } else {
        // Anything else is a checkpoint path; roll its policy.
        sgrl::io::LoadedCheckpoint ck = sgrl::io::load_checkpoint(policy);
        const double limit = env.params().max_torque;
        for (int e = 0; e < episodes; ++e) {
            Eigen::Vector2d s = env.reset(rng);
            for (int t = 0; t < steps; ++t) {
                Eigen::VectorXd a = ck.agent->policy(s);
                if (noise > 0.0)
                    a(0) = std::clamp(a(0) + rng.normal(0.0, noise), -limit, limit);
                const sgrl::env::StepResult res = env.step(s, a(0));
                sgrl::rl::Transition tr;
                tr.state = s;
                tr.action = a;
                tr.reward = res.reward;
                tr.cost = res.cost;
                tr.next_state = res.next;
                tr.done = (t == steps - 1);
                traj.push_back(std::move(tr));
                s = res.next;
            }
        }
    }
    sgrl::io::write_trajectory(out_path, traj);

    double total = 0.0;
    long catastrophes = 0;
    for (const auto& t : traj) {
        total += t.reward;
        if (sgrl::env::Pendulum::crossed_bottom(t.state(0), t.next_state(0)))
            ++catastrophes;
    }
    const json out = {{"transitions", traj.size()},
                      {"episodes", episodes},
                      {"catastrophes", catastrophes},
                      {"mean_return", episodes > 0 ? total / episodes : 0.0}};
    std::cout << out.dump(2) << std::endl;
    std::cerr << "recorded " << traj.size() << " transitions to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"safe exploration toolkit: guarded actor-critic on a torque-limited pendulum"};
    app.require_subcommand(1);

    // train
    auto* t = app.add_subcommand("train", "train an agent and write metrics");
    std::string t_config, t_out;
    std::vector<std::string> t_sets;
    std::uint64_t t_seed = 0;
    long t_steps = 0;
    int t_capacity = 0;
    std::string t_gp_mode, t_beta, t_init;
    bool t_vanilla = false;
    t->add_option("--config", t_config, "JSON config file (flat dotted keys)");
    auto* t_seed_o = t->add_option("--seed", t_seed, "random seed");
    auto* t_steps_o = t->add_option("--steps", t_steps, "total environment steps");
    auto* t_cap_o = t->add_option("--gp.capacity", t_capacity, "GP data set capacity");
    auto* t_mode_o =
        t->add_option("--gp-mode", t_gp_mode, "GP data handling: online or fixed")
            ->check(CLI::IsMember({"online", "fixed"}));
    auto* t_beta_o =
        t->add_option("--beta", t_beta, "confidence scale: fixed[:value] or online[:delta]");
    auto* t_init_o = t->add_option("--init-trajectory", t_init, "seed trajectory CSV");
    t->add_flag("--vanilla", t_vanilla, "disable GP guidance (plain actor-critic)");
    t->add_option("--set", t_sets, "config override key=value (repeatable)");
    t->add_option("--out", t_out, "output directory (metrics.csv, summary.json, checkpoint.json)");

    // eval
    auto* e = app.add_subcommand("eval", "evaluate a checkpointed policy without noise");
    std::string e_ckpt, e_traj;
    int e_episodes = 5;
    std::uint64_t e_seed = 0;
    e->add_option("--checkpoint", e_ckpt, "checkpoint file")->required();
    e->add_option("--episodes", e_episodes, "evaluation episodes");
    e->add_option("--seed", e_seed, "random seed for resets");
    e->add_option("--trajectory", e_traj, "also write the rollout as a trajectory CSV");

    // record
    auto* r = app.add_subcommand("record", "roll a policy and write a trajectory CSV");
    std::string r_policy = "scripted", r_out;
    int r_episodes = 5, r_steps = 200;
    double r_noise = 0.0;
    std::uint64_t r_seed = 0;
    r->add_option("--policy", r_policy, "'scripted' or a checkpoint path");
    r->add_option("--episodes", r_episodes, "episodes to roll");
    r->add_option("--steps", r_steps, "steps per episode");
    r->add_option("--noise", r_noise, "torque noise stddev");
    r->add_option("--seed", r_seed, "random seed");
    r->add_option("--out", r_out, "output CSV path")->required();

    // gp-selftest
    auto* s = app.add_subcommand("gp-selftest", "numerical self-checks of the GP stack");
    int s_trials = 20;
    std::uint64_t s_seed = 0;
    bool s_fault = false;
    s->add_option("--trials", s_trials, "random problems per check");
    s->add_option("--seed", s_seed, "random seed");
    s->add_flag("--inject-fault", s_fault)->group(""); // hidden: exercises the failure path

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (t->parsed()) {
            sgrl::io::Config cfg =
                t_config.empty() ? sgrl::io::Config{} : sgrl::io::load_config(t_config);
            for (const std::string& ov : t_sets) {
                const auto eq = ov.find('=');
                if (eq == std::string::npos)
                    throw sgrl::ParseError("--set expects key=value, got '" + ov + "'");
                sgrl::io::apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
            }
            if (t_seed_o->count())
                sgrl::io::apply_override(cfg, "seed", std::to_string(t_seed));
            if (t_steps_o->count())
                sgrl::io::apply_override(cfg, "total_steps", std::to_string(t_steps));
            if (t_cap_o->count())
                sgrl::io::apply_override(cfg, "gp.capacity", std::to_string(t_capacity));
            if (t_mode_o->count())
                sgrl::io::apply_override(cfg, "gp.mode", t_gp_mode);
            if (t_init_o->count())
                sgrl::io::apply_override(cfg, "init.trajectory", t_init);
            if (t_beta_o->count())
                apply_beta_spec(cfg, t_beta);
            if (t_vanilla)
                cfg.vanilla = true;
            if (!t_out.empty()) {
                std::filesystem::create_directories(t_out);
                cfg.run.dir = t_out;
            }
            cfg.validate();
            return cmd_train(std::move(cfg));
        }
        if (e->parsed())
            return cmd_eval(e_ckpt, e_episodes, e_seed, e_traj);
        if (r->parsed())
            return cmd_record(r_policy, r_episodes, r_steps, r_noise, r_seed, r_out);
        if (s->parsed())
            return sgrl::run_gp_selftest(s_trials, s_seed, s_fault, std::cout, std::cerr);
    } catch (const sgrl::ParseError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 2;
}

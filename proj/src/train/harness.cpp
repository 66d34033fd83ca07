#include "sgrl/train/harness.hpp"

#include "sgrl/gp/sparsify.hpp"
#include "sgrl/io/trajectory.hpp"
#include "sgrl/io/checkpoint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

namespace sgrl::train {

rl::AgentConfig agent_config_from(const io::Config& cfg) {
    rl::AgentConfig a;
    a.state_dim = 2;
    a.action_dim = 1;
    a.action_limit = cfg.env.max_torque;
    a.hidden = cfg.agent.hidden;
    a.discount = cfg.agent.discount;
    a.tau = cfg.agent.tau;
    a.penalty = cfg.vanilla ? 0.0 : cfg.agent.penalty;
    a.actor_lr = cfg.agent.actor_lr;
    a.critic_lr = cfg.agent.critic_lr;
    a.guard_lr = cfg.agent.guard_lr;
    a.gp_noise_std = cfg.gp.noise_std;
    a.beta.mode = (cfg.beta.mode == "fixed") ? gp::BetaMode::Fixed : gp::BetaMode::Online;
    a.beta.fixed_value = cfg.beta.fixed_value;
    a.beta.delta = cfg.beta.delta;
    a.beta.rkhs_floor = cfg.beta.rkhs_floor;
    a.use_guard_gp = !cfg.vanilla;
    return a;
}

double scripted_torque(const Eigen::Vector2d& state, double max_torque) {
    return std::clamp(-(16.0 * state(0) + 4.0 * state(1)), -max_torque, max_torque);
}

namespace {

double exploration_noise(const io::Config& cfg, long step) {
    const double half = static_cast<double>(cfg.total_steps) / 2.0;
    const double frac = static_cast<double>(step) / half;
    return cfg.agent.noise * std::max(0.0, 1.0 - frac);
}

Eigen::VectorXd gp_input(const Eigen::VectorXd& state, const Eigen::VectorXd& action) {
    Eigen::VectorXd z(state.size() + action.size());
    z << state, action;
    return z;
}

} // namespace

EvalOutcome evaluate(const rl::SafeDdpgAgent& agent, const env::Pendulum& env,
                     int episodes, int steps, Rng& rng) {
    EvalOutcome out;
    double total = 0.0;
    for (int e = 0; e < episodes; ++e) {
        Eigen::Vector2d s = env.reset(rng);
        for (int t = 0; t < steps; ++t) {
            const Eigen::VectorXd a = agent.policy(s);
            const env::StepResult res = env.step(s, a(0));
            total += res.reward;
            if (res.catastrophe)
                ++out.catastrophes;
            s = res.next;
        }
    }
    out.mean_return = episodes > 0 ? total / episodes : 0.0;
    return out;
}

std::vector<rl::Transition> record_scripted(const env::Pendulum& env, int episodes,
                                            int steps, double noise_std, Rng& rng) {
    std::vector<rl::Transition> out;
    out.reserve(static_cast<std::size_t>(episodes) * static_cast<std::size_t>(steps));
    const double limit = env.params().max_torque;
    for (int e = 0; e < episodes; ++e) {
        Eigen::Vector2d s = env.reset(rng);
        for (int t = 0; t < steps; ++t) {
            double u = scripted_torque(s, limit);
            if (noise_std > 0.0)
                u = std::clamp(u + rng.normal(0.0, noise_std), -limit, limit);
            const env::StepResult res = env.step(s, u);
            rl::Transition tr;
            tr.state = s;
            tr.action = Eigen::VectorXd::Constant(1, u);
            tr.reward = res.reward;
            tr.cost = res.cost;
            tr.next_state = res.next;
            tr.done = (t == steps - 1);
            out.push_back(std::move(tr));
            s = res.next;
        }
    }
    return out;
}

TrainResult train(const io::Config& cfg, const TrainHooks& hooks) {
    const auto t_start = std::chrono::steady_clock::now();
    cfg.validate();

    env::PendulumParams ep;
    ep.reset_angle = cfg.env.reset_angle;
    ep.reset_speed = cfg.env.reset_speed;
    ep.max_torque = cfg.env.max_torque;
    const env::Pendulum env(ep);

    Rng rng(cfg.seed);
    rl::SafeDdpgAgent agent(agent_config_from(cfg), rng);
    rl::ReplayBuffer replay(2, 1, cfg.agent.replay_capacity);

    const bool gp_online = !cfg.vanilla && cfg.gp.mode == "online";
    const bool gp_enabled = !cfg.vanilla;

    std::unique_ptr<io::MetricsWriter> own_metrics;
    io::MetricsWriter* metrics = hooks.metrics;
    if (!metrics && !cfg.run.dir.empty()) {
        own_metrics = std::make_unique<io::MetricsWriter>(cfg.run.dir + "/metrics.csv");
        metrics = own_metrics.get();
    }

    TrainResult result;

    // ---- Initialization from the seed trajectory -------------------------
    if (!cfg.init.trajectory.empty()) {
        const std::vector<rl::Transition> seed = io::read_trajectory(cfg.init.trajectory);
        result.init.loaded = static_cast<long>(seed.size());
        for (const rl::Transition& t : seed) {
            if (t.cost < -cfg.init.cost_threshold)
                continue; // too costly to trust as a safe demonstration
            replay.push(t);
            ++result.init.kept;
            if (!gp_enabled)
                continue;
            // Without a trained guard yet, the step cost stands in for the
            // guard difference.  By construction it passes the plausibility
            // filter; the storage filter still drops near-zero entries.
            const double ghat = -t.cost;
            ++result.init.gp_candidates;
            if (!agent.filter_measurement(ghat, t.cost))
                throw std::logic_error("init: seed measurement failed the plausibility filter");
            if (agent.storage_filter(ghat)) {
                agent.gp().data().add(gp_input(t.state, t.action), ghat);
                ++result.init.gp_inserted;
            }
        }
        if (gp_enabled && std::as_const(agent).gp().data().size() > 0) {
            result.init.gp_removed_correlated = gp::remove_correlated(
                agent.gp().data(), agent.gp().kernel(), cfg.gp.rel_threshold);
            result.init.gp_evicted = gp::evict_to_capacity(
                agent.gp().data(), agent.gp().kernel(), cfg.gp.capacity);
        }
    }
    if (gp_enabled && std::as_const(agent).gp().data().size() > 0 && cfg.gp.fit_steps > 0) {
        gp::FitOptions fo;
        fo.max_steps = cfg.gp.fit_steps;
        agent.gp().fit_hyperparams(fo);
    }
    result.init.initial_beta = agent.recompute_beta();

    // ---- Pretraining on the seed data ------------------------------------
    if (cfg.agent.init_updates > 0 &&
        replay.size() >= static_cast<std::size_t>(cfg.agent.batch)) {
        for (int i = 0; i < cfg.agent.init_updates; ++i) {
            agent.update_critic(replay.sample(cfg.agent.batch, rng));
            agent.update_guard(replay.sample(cfg.agent.batch, rng));
        }
        for (int i = 0; i < cfg.agent.init_updates; ++i)
            agent.update_actor(replay.sample(cfg.agent.batch, rng));
    }

    // ---- Main loop --------------------------------------------------------
    long step = 0;
    int episode = 0;
    long next_eval = cfg.eval_interval;
    int eval_blocks = 0;

    while (step < cfg.total_steps) {
        ++episode;
        Eigen::Vector2d s = env.reset(rng);
        const int T = static_cast<int>(
            std::min<long>(cfg.episode_steps, cfg.total_steps - step));

        std::vector<Eigen::VectorXd> staged_inputs;
        std::vector<double> staged_targets;
        double ep_return = 0.0;
        int ep_catastrophes = 0;
        double critic_loss_sum = 0.0, guard_loss_sum = 0.0;
        long value_updates = 0;

        for (int t = 0; t < T; ++t) {
            const double noise = exploration_noise(cfg, step);
            const Eigen::VectorXd a = agent.select_action(s, noise, rng);
            const env::StepResult res = env.step(s, a(0));
            const bool done = (t == T - 1);

            rl::Transition tr;
            tr.state = s;
            tr.action = a;
            tr.reward = res.reward;
            tr.cost = res.cost;
            tr.next_state = res.next;
            tr.done = done;
            replay.push(tr);

            ep_return += res.reward;
            if (res.catastrophe) {
                ++ep_catastrophes;
                ++result.catastrophes;
            }

            if (gp_online) {
                const double ghat = agent.measurement(s, a, res.next);
                if (agent.filter_measurement(ghat, res.cost) && agent.storage_filter(ghat)) {
                    staged_inputs.push_back(gp_input(s, a));
                    staged_targets.push_back(ghat);
                }
            }

            if (replay.size() >= static_cast<std::size_t>(cfg.agent.batch)) {
                for (int u = 0; u < cfg.agent.updates_per_step; ++u) {
                    critic_loss_sum += agent.update_critic(replay.sample(cfg.agent.batch, rng));
                    guard_loss_sum += agent.update_guard(replay.sample(cfg.agent.batch, rng));
                    ++value_updates;
                }
            }

            s = res.next;
            ++step;
        }

        if (ep_catastrophes > 0)
            ++result.catastrophe_episodes;

        // GP maintenance: fold the episode's staged measurements in, prune,
        // refit, and refresh the confidence scale.
        if (gp_online && !staged_inputs.empty()) {
            for (std::size_t i = 0; i < staged_inputs.size(); ++i)
                agent.gp().data().add(staged_inputs[i], staged_targets[i]);
            gp::remove_correlated(agent.gp().data(), agent.gp().kernel(), cfg.gp.rel_threshold);
            gp::evict_to_capacity(agent.gp().data(), agent.gp().kernel(), cfg.gp.capacity);
            if (cfg.gp.fit_steps > 0) {
                gp::FitOptions fo;
                fo.max_steps = cfg.gp.fit_steps;
                agent.gp().fit_hyperparams(fo);
            }
            agent.recompute_beta();
        }

        // Policy updates happen once per episode, in a burst matching the
        // number of steps just taken.
        double actor_obj_sum = 0.0;
        long actor_updates = 0;
        if (replay.size() >= static_cast<std::size_t>(cfg.agent.batch)) {
            for (int i = 0; i < T; ++i) {
                actor_obj_sum += agent.update_actor(replay.sample(cfg.agent.batch, rng));
                ++actor_updates;
            }
        }

        EpisodeStats es;
        es.episode = episode;
        es.step = step;
        es.episode_return = ep_return;
        es.catastrophes = ep_catastrophes;
        es.cumulative_catastrophes = result.catastrophes;
        es.catastrophe_episodes = result.catastrophe_episodes;
        es.gp_size = std::as_const(agent).gp().data().size();
        es.beta_value = agent.beta_value();
        es.critic_loss = value_updates > 0 ? critic_loss_sum / value_updates : 0.0;
        es.guard_loss = value_updates > 0 ? guard_loss_sum / value_updates : 0.0;
        es.actor_objective = actor_updates > 0 ? actor_obj_sum / actor_updates : 0.0;
        result.episode_log.push_back(es);

        if (metrics) {
            io::EpisodeRecord rec;
            rec.step = es.step;
            rec.episode = es.episode;
            rec.episode_return = es.episode_return;
            rec.cumulative_catastrophes = es.cumulative_catastrophes;
            rec.catastrophe_episodes = es.catastrophe_episodes;
            rec.gp_size = es.gp_size;
            rec.beta_value = es.beta_value;
            rec.guard_loss = es.guard_loss;
            rec.critic_loss = es.critic_loss;
            rec.actor_objective = es.actor_objective;
            metrics->write(rec);
        }
        if (hooks.on_episode)
            hooks.on_episode(es);

        while (next_eval <= step && cfg.eval_episodes > 0) {
            ++eval_blocks;
            // Isolated stream so evaluation cannot perturb training draws.
            Rng eval_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL ^
                         static_cast<std::uint64_t>(next_eval));
            const EvalOutcome eo =
                evaluate(agent, env, cfg.eval_episodes, cfg.episode_steps, eval_rng);
            EvalStats ev;
            ev.step = next_eval;
            ev.episode = episode;
            ev.mean_return = eo.mean_return;
            ev.catastrophes = eo.catastrophes;
            result.eval_log.push_back(ev);
            if (eo.mean_return > result.best_eval_return) {
                result.best_eval_return = eo.mean_return;
                result.best_eval_step = next_eval;
            }
            if (metrics) {
                io::EvalRecord rec;
                rec.step = next_eval;
                rec.episode = episode;
                rec.mean_return = eo.mean_return;
                rec.cumulative_catastrophes = result.catastrophes;
                rec.catastrophe_episodes = result.catastrophe_episodes;
                rec.gp_size = std::as_const(agent).gp().data().size();
                rec.beta_value = agent.beta_value();
                rec.eval_catastrophes = eo.catastrophes;
                metrics->write(rec);
            }
            if (hooks.on_eval)
                hooks.on_eval(ev);
            next_eval += cfg.eval_interval;
        }
    }

    result.total_steps = step;
    result.episodes = episode;
    result.final_beta = agent.beta_value();
    result.gp_size = std::as_const(agent).gp().data().size();

    if (!cfg.run.dir.empty()) {
        io::CheckpointMeta meta;
        meta.step = step;
        meta.episode = episode;
        io::save_checkpoint(cfg.run.dir + "/checkpoint.json", agent, cfg, meta);
    }

    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

} // namespace sgrl::train

#pragma once

#include "sgrl/env/pendulum.hpp"
#include "sgrl/io/config.hpp"
#include "sgrl/io/metrics.hpp"
#include "sgrl/rl/agent.hpp"
#include "sgrl/rl/replay.hpp"
#include "sgrl/util/rng.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace sgrl::train {

// Map a run configuration onto the agent's own configuration.
rl::AgentConfig agent_config_from(const io::Config& cfg);

// Hand-written PD controller toward upright: u = -sat(16 theta + 4 thetadot).
// Stabilizes every state the default reset distribution can produce without
// ever approaching the bottom, which makes it a safe source of seed
// trajectories.
double scripted_torque(const Eigen::Vector2d& state, double max_torque);

struct EpisodeStats {
    int episode = 0;          // 1-based
    long step = 0;            // total env steps at episode end
    double episode_return = 0.0;
    int catastrophes = 0;     // within this episode
    long cumulative_catastrophes = 0;
    int catastrophe_episodes = 0;
    long gp_size = 0;
    double beta_value = 0.0;
    double guard_loss = 0.0;  // episode means over updates (0 when no updates ran)
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

struct EvalStats {
    long step = 0;
    int episode = 0;
    double mean_return = 0.0;
    int catastrophes = 0; // within the evaluation rollouts
};

// What happened while ingesting the seed trajectory.
struct InitAudit {
    long loaded = 0;             // rows in the seed file
    long kept = 0;               // rows surviving the cost threshold
    long gp_candidates = 0;      // kept rows offered to the GP
    long gp_inserted = 0;        // rows that passed both measurement filters
    long gp_removed_correlated = 0;
    long gp_evicted = 0;
    double initial_beta = 0.0;
};

struct TrainResult {
    long total_steps = 0;
    int episodes = 0;
    long catastrophes = 0;
    int catastrophe_episodes = 0;
    double best_eval_return = -std::numeric_limits<double>::infinity();
    long best_eval_step = -1;
    double final_beta = 0.0;
    long gp_size = 0;
    double wall_seconds = 0.0;
    InitAudit init;
    std::vector<EpisodeStats> episode_log;
    std::vector<EvalStats> eval_log;
};

struct TrainHooks {
    io::MetricsWriter* metrics = nullptr; // optional CSV sink
    std::function<void(const EpisodeStats&)> on_episode;
    std::function<void(const EvalStats&)> on_eval;
};

// Full training run.  When cfg.run.dir is set, metrics.csv and
// checkpoint.json are written there (the directory must exist).
TrainResult train(const io::Config& cfg, const TrainHooks& hooks = {});

struct EvalOutcome {
    double mean_return = 0.0;
    int catastrophes = 0;
};

// Noise-free rollouts of the current policy.
EvalOutcome evaluate(const rl::SafeDdpgAgent& agent, const env::Pendulum& env,
                     int episodes, int steps, Rng& rng);

// Roll the scripted controller to produce a seed trajectory.  noise_std adds
// Gaussian torque noise before clipping, for deliberately degraded data.
std::vector<rl::Transition> record_scripted(const env::Pendulum& env, int episodes,
                                            int steps, double noise_std, Rng& rng);

} // namespace sgrl::train

#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

namespace sgrl::io {

// Run configuration.  The on-disk format is a JSON object with flat dotted
// keys ("gp.capacity": 200); unknown keys are rejected so typos fail loudly.
struct Config {
    std::uint64_t seed = 0;
    long total_steps = 60000;
    int episode_steps = 200;
    long eval_interval = 1000; // environment steps between evaluation blocks
    int eval_episodes = 5;

    struct {
        double reset_angle = 0.2;
        double reset_speed = 0.3;
        double max_torque = 2.0;
    } env;

    struct {
        double discount = 0.99;
        double tau = 0.005;
        double penalty = 20.0;
        int batch = 64;
        int updates_per_step = 1;
        int init_updates = 2000; // pretraining updates before episode 1
        int hidden = 64;
        double actor_lr = 1e-4;
        double critic_lr = 1e-3;
        double guard_lr = 1e-3;
        double noise = 0.1; // exploration noise, decays to 0 over the first half
        std::size_t replay_capacity = 200000;
    } agent;

    struct {
        std::string mode = "online"; // "online" or "fixed"
        int capacity = 2000;
        double noise_std = 0.1;
        int fit_steps = 10;
        double rel_threshold = 1e-8;
    } gp;

    struct {
        std::string mode = "online"; // "online" or "fixed"
        double fixed_value = 2.0;
        double delta = 0.1;
        double rkhs_floor = 1.0;
    } beta;

    struct {
        std::string trajectory;       // path to a seed trajectory CSV; may be empty
        double cost_threshold = 5.0;  // drop seed transitions with cost < -threshold
    } init;

    bool vanilla = false; // plain actor-critic objective, no GP guidance

    struct {
        std::string dir; // output directory for metrics.csv / summary.json / checkpoint.json
    } run;

    void validate() const; // throws ParseError on out-of-range values
};

// Parse from a flat-key JSON object.  Missing keys keep defaults; unknown
// keys throw ParseError.
Config config_from_json(const nlohmann::json& j);

Config load_config(const std::string& path);

// Apply "key=value" with the same key names as the JSON format.
void apply_override(Config& cfg, const std::string& key, const std::string& value);

// Serialize back to the flat-key JSON form (every field, defaults included).
nlohmann::json config_to_json(const Config& cfg);

} // namespace sgrl::io

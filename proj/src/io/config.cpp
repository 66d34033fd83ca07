#include "sgrl/io/config.hpp"

#include "sgrl/errors.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace sgrl::io {

namespace {

using Setter = std::function<void(Config&, const nlohmann::json&)>;

template <typename T>
T as(const nlohmann::json& v, const char* key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("config: bad value for '") + key + "'");
    }
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](Config& c, const nlohmann::json& v) { c.seed = as<std::uint64_t>(v, "seed"); }},
        {"total_steps", [](Config& c, const nlohmann::json& v) { c.total_steps = as<long>(v, "total_steps"); }},
        {"episode_steps", [](Config& c, const nlohmann::json& v) { c.episode_steps = as<int>(v, "episode_steps"); }},
        {"eval_interval", [](Config& c, const nlohmann::json& v) { c.eval_interval = as<long>(v, "eval_interval"); }},
        {"eval_episodes", [](Config& c, const nlohmann::json& v) { c.eval_episodes = as<int>(v, "eval_episodes"); }},
        {"env.reset_angle", [](Config& c, const nlohmann::json& v) { c.env.reset_angle = as<double>(v, "env.reset_angle"); }},
        {"env.reset_speed", [](Config& c, const nlohmann::json& v) { c.env.reset_speed = as<double>(v, "env.reset_speed"); }},
        {"env.max_torque", [](Config& c, const nlohmann::json& v) { c.env.max_torque = as<double>(v, "env.max_torque"); }},
        {"agent.discount", [](Config& c, const nlohmann::json& v) { c.agent.discount = as<double>(v, "agent.discount"); }},
        {"agent.tau", [](Config& c, const nlohmann::json& v) { c.agent.tau = as<double>(v, "agent.tau"); }},
        {"agent.penalty", [](Config& c, const nlohmann::json& v) { c.agent.penalty = as<double>(v, "agent.penalty"); }},
        {"agent.batch", [](Config& c, const nlohmann::json& v) { c.agent.batch = as<int>(v, "agent.batch"); }},
        {"agent.updates_per_step", [](Config& c, const nlohmann::json& v) { c.agent.updates_per_step = as<int>(v, "agent.updates_per_step"); }},
        {"agent.init_updates", [](Config& c, const nlohmann::json& v) { c.agent.init_updates = as<int>(v, "agent.init_updates"); }},
        {"agent.hidden", [](Config& c, const nlohmann::json& v) { c.agent.hidden = as<int>(v, "agent.hidden"); }},
        {"agent.actor_lr", [](Config& c, const nlohmann::json& v) { c.agent.actor_lr = as<double>(v, "agent.actor_lr"); }},
        {"agent.critic_lr", [](Config& c, const nlohmann::json& v) { c.agent.critic_lr = as<double>(v, "agent.critic_lr"); }},
        {"agent.guard_lr", [](Config& c, const nlohmann::json& v) { c.agent.guard_lr = as<double>(v, "agent.guard_lr"); }},
        {"agent.noise", [](Config& c, const nlohmann::json& v) { c.agent.noise = as<double>(v, "agent.noise"); }},
        {"agent.replay_capacity", [](Config& c, const nlohmann::json& v) { c.agent.replay_capacity = as<std::size_t>(v, "agent.replay_capacity"); }},
        {"gp.mode", [](Config& c, const nlohmann::json& v) { c.gp.mode = as<std::string>(v, "gp.mode"); }},
        {"gp.capacity", [](Config& c, const nlohmann::json& v) { c.gp.capacity = as<int>(v, "gp.capacity"); }},
        {"gp.noise_std", [](Config& c, const nlohmann::json& v) { c.gp.noise_std = as<double>(v, "gp.noise_std"); }},
        {"gp.fit_steps", [](Config& c, const nlohmann::json& v) { c.gp.fit_steps = as<int>(v, "gp.fit_steps"); }},
        {"gp.rel_threshold", [](Config& c, const nlohmann::json& v) { c.gp.rel_threshold = as<double>(v, "gp.rel_threshold"); }},
        {"beta.mode", [](Config& c, const nlohmann::json& v) { c.beta.mode = as<std::string>(v, "beta.mode"); }},
        {"beta.fixed_value", [](Config& c, const nlohmann::json& v) { c.beta.fixed_value = as<double>(v, "beta.fixed_value"); }},
        {"beta.delta", [](Config& c, const nlohmann::json& v) { c.beta.delta = as<double>(v, "beta.delta"); }},
        {"beta.rkhs_floor", [](Config& c, const nlohmann::json& v) { c.beta.rkhs_floor = as<double>(v, "beta.rkhs_floor"); }},
        {"init.trajectory", [](Config& c, const nlohmann::json& v) { c.init.trajectory = as<std::string>(v, "init.trajectory"); }},
        {"init.cost_threshold", [](Config& c, const nlohmann::json& v) { c.init.cost_threshold = as<double>(v, "init.cost_threshold"); }},
        {"vanilla", [](Config& c, const nlohmann::json& v) { c.vanilla = as<bool>(v, "vanilla"); }},
        {"run.dir", [](Config& c, const nlohmann::json& v) { c.run.dir = as<std::string>(v, "run.dir"); }},
    };
    return table;
}

} // namespace

void Config::validate() const {
    auto fail = [](const std::string& msg) { throw ParseError("config: " + msg); };
    if (total_steps < 1) fail("total_steps must be >= 1");
    if (episode_steps < 1) fail("episode_steps must be >= 1");
    if (eval_interval < 1) fail("eval_interval must be >= 1");
    if (eval_episodes < 0) fail("eval_episodes must be >= 0");
    if (!(env.max_torque > 0.0)) fail("env.max_torque must be > 0");
    if (!(agent.discount >= 0.0 && agent.discount < 1.0)) fail("agent.discount must be in [0, 1)");
    if (!(agent.tau > 0.0 && agent.tau <= 1.0)) fail("agent.tau must be in (0, 1]");
    if (agent.penalty < 0.0) fail("agent.penalty must be >= 0");
    if (agent.batch < 1) fail("agent.batch must be >= 1");
    if (agent.updates_per_step < 0) fail("agent.updates_per_step must be >= 0");
    if (agent.init_updates < 0) fail("agent.init_updates must be >= 0");
    if (agent.hidden < 1) fail("agent.hidden must be >= 1");
    if (!(agent.actor_lr > 0.0 && agent.critic_lr > 0.0 && agent.guard_lr > 0.0))
        fail("learning rates must be > 0");
    if (agent.noise < 0.0) fail("agent.noise must be >= 0");
    if (agent.replay_capacity < 1) fail("agent.replay_capacity must be >= 1");
    if (gp.mode != "online" && gp.mode != "fixed") fail("gp.mode must be 'online' or 'fixed'");
    if (gp.capacity < 1) fail("gp.capacity must be >= 1");
    if (!(gp.noise_std > 0.0)) fail("gp.noise_std must be > 0");
    if (gp.fit_steps < 0) fail("gp.fit_steps must be >= 0");
    if (!(gp.rel_threshold > 0.0)) fail("gp.rel_threshold must be > 0");
    if (beta.mode != "online" && beta.mode != "fixed") fail("beta.mode must be 'online' or 'fixed'");
    if (!(beta.delta > 0.0 && beta.delta < 1.0)) fail("beta.delta must be in (0, 1)");
    if (beta.rkhs_floor < 0.0) fail("beta.rkhs_floor must be >= 0");
    if (init.cost_threshold < 0.0) fail("init.cost_threshold must be >= 0");
}

Config config_from_json(const nlohmann::json& j) {
    if (!j.is_object())
        throw ParseError("config: top level must be a JSON object");
    Config cfg;
    const auto& table = setters();
    for (const auto& [key, value] : j.items()) {
        const auto it = table.find(key);
        if (it == table.end())
            throw ParseError("config: unknown key '" + key + "'");
        it->second(cfg, value);
    }
    cfg.validate();
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("config: invalid JSON in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

void apply_override(Config& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end())
        throw ParseError("config: unknown key '" + key + "'");
    // Reuse the JSON pathway so overrides and file values parse identically.
    nlohmann::json v;
    try {
        v = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
        v = value; // bare strings (e.g. paths, "online") arrive unquoted
    }
    it->second(cfg, v);
    cfg.validate();
}

nlohmann::json config_to_json(const Config& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["total_steps"] = cfg.total_steps;
    j["episode_steps"] = cfg.episode_steps;
    j["eval_interval"] = cfg.eval_interval;
    j["eval_episodes"] = cfg.eval_episodes;
    j["env.reset_angle"] = cfg.env.reset_angle;
    j["env.reset_speed"] = cfg.env.reset_speed;
    j["env.max_torque"] = cfg.env.max_torque;
    j["agent.discount"] = cfg.agent.discount;
    j["agent.tau"] = cfg.agent.tau;
    j["agent.penalty"] = cfg.agent.penalty;
    j["agent.batch"] = cfg.agent.batch;
    j["agent.updates_per_step"] = cfg.agent.updates_per_step;
    j["agent.init_updates"] = cfg.agent.init_updates;
    j["agent.hidden"] = cfg.agent.hidden;
    j["agent.actor_lr"] = cfg.agent.actor_lr;
    j["agent.critic_lr"] = cfg.agent.critic_lr;
    j["agent.guard_lr"] = cfg.agent.guard_lr;
    j["agent.noise"] = cfg.agent.noise;
    j["agent.replay_capacity"] = cfg.agent.replay_capacity;
    j["gp.mode"] = cfg.gp.mode;
    j["gp.capacity"] = cfg.gp.capacity;
    j["gp.noise_std"] = cfg.gp.noise_std;
    j["gp.fit_steps"] = cfg.gp.fit_steps;
    j["gp.rel_threshold"] = cfg.gp.rel_threshold;
    j["beta.mode"] = cfg.beta.mode;
    j["beta.fixed_value"] = cfg.beta.fixed_value;
    j["beta.delta"] = cfg.beta.delta;
    j["beta.rkhs_floor"] = cfg.beta.rkhs_floor;
    j["init.trajectory"] = cfg.init.trajectory;
    j["init.cost_threshold"] = cfg.init.cost_threshold;
    j["vanilla"] = cfg.vanilla;
    j["run.dir"] = cfg.run.dir;
    return j;
}

} // namespace sgrl::io

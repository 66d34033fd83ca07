#include "sgrl/io/checkpoint.hpp"

#include "sgrl/errors.hpp"
#include "sgrl/io/base64.hpp"
#include "sgrl/train/harness.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "checkpoint blob layout assumes a little-endian host");

namespace sgrl::io {

namespace {

constexpr const char* kFormat = "sgrl-checkpoint";
constexpr int kVersion = 1;

struct TensorOut {
    std::vector<std::pair<std::string, Eigen::Index>> names;
    std::vector<double> values;

    void add(const std::string& name, const Eigen::VectorXd& v) {
        names.emplace_back(name, v.size());
        values.insert(values.end(), v.data(), v.data() + v.size());
    }
};

} // namespace

void save_checkpoint(const std::string& path, const rl::SafeDdpgAgent& agent,
                     const Config& config, const CheckpointMeta& meta) {
    TensorOut t;
    t.add("actor", agent.actor().parameters());
    t.add("actor_target", agent.actor_target().parameters());
    t.add("critic", agent.critic().parameters());
    t.add("critic_target", agent.critic_target().parameters());
    t.add("guard", agent.guard().parameters());
    t.add("guard_target", agent.guard_target().parameters());
    t.add("actor_opt", agent.actor_opt().state());
    t.add("critic_opt", agent.critic_opt().state());
    t.add("guard_opt", agent.guard_opt().state());

    const gp::Dataset& data = agent.gp().data();
    const Eigen::Index n = data.size();
    const Eigen::Index d = agent.gp().input_dim();
    Eigen::VectorXd gp_inputs(n * d);
    for (Eigen::Index i = 0; i < n; ++i)
        gp_inputs.segment(i * d, d) = data.input(i);
    t.add("gp_inputs", gp_inputs);
    t.add("gp_targets", data.target_vector());

    const gp::KernelParams& kp = agent.gp().kernel();
    Eigen::VectorXd kernel(1 + kp.lengthscales.size());
    kernel(0) = kp.signal_variance;
    kernel.tail(kp.lengthscales.size()) = kp.lengthscales;
    t.add("kernel", kernel);
    t.add("beta", Eigen::VectorXd::Constant(1, agent.beta_value()));

    nlohmann::json env;
    env["format"] = kFormat;
    env["version"] = kVersion;
    env["step"] = meta.step;
    env["episode"] = meta.episode;
    env["gp_size"] = n;
    env["config"] = config_to_json(config);
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& [name, count] : t.names)
        tensors.push_back({{"name", name}, {"count", count}});
    env["tensors"] = tensors;

    std::vector<std::uint8_t> bytes(t.values.size() * sizeof(double));
    std::memcpy(bytes.data(), t.values.data(), bytes.size());
    env["blob"] = base64_encode(bytes.data(), bytes.size());

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ParseError("checkpoint: cannot open '" + path + "' for writing");
    out << env.dump(2) << '\n';
    if (!out)
        throw ParseError("checkpoint: write to '" + path + "' failed");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("checkpoint: cannot open '" + path + "'");
    nlohmann::json env;
    try {
        in >> env;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("checkpoint: invalid JSON: ") + e.what());
    }

    if (!env.is_object() || env.value("format", "") != kFormat)
        throw ParseError("checkpoint: not a recognized checkpoint file");
    if (env.value("version", -1) != kVersion)
        throw ParseError("checkpoint: unsupported version");
    if (!env.contains("config") || !env.contains("tensors") || !env.contains("blob"))
        throw ParseError("checkpoint: missing required fields");

    LoadedCheckpoint out;
    out.config = config_from_json(env["config"]);
    out.meta.step = env.value("step", 0L);
    out.meta.episode = env.value("episode", 0);

    const std::vector<std::uint8_t> bytes = base64_decode(env["blob"].get<std::string>());
    if (bytes.size() % sizeof(double) != 0)
        throw ParseError("checkpoint: blob size is not a multiple of 8");
    std::vector<double> values(bytes.size() / sizeof(double));
    std::memcpy(values.data(), bytes.data(), bytes.size());

    // Slice the blob according to the declared tensor table.
    std::map<std::string, Eigen::VectorXd> tensor;
    Eigen::Index off = 0;
    for (const auto& entry : env["tensors"]) {
        const std::string name = entry.at("name").get<std::string>();
        const Eigen::Index count = entry.at("count").get<Eigen::Index>();
        if (count < 0 || off + count > static_cast<Eigen::Index>(values.size()))
            throw ParseError("checkpoint: tensor table overruns the blob");
        tensor[name] = Eigen::Map<const Eigen::VectorXd>(values.data() + off, count);
        off += count;
    }
    if (off != static_cast<Eigen::Index>(values.size()))
        throw ParseError("checkpoint: blob has trailing data");

    auto get = [&](const char* name) -> const Eigen::VectorXd& {
        const auto it = tensor.find(name);
        if (it == tensor.end())
            throw ParseError(std::string("checkpoint: missing tensor '") + name + "'");
        return it->second;
    };

    // Rebuild the agent from the config echo, then overwrite all state.
    Rng scratch_rng(0); // initialization is immediately overwritten
    out.agent = std::make_unique<rl::SafeDdpgAgent>(train::agent_config_from(out.config),
                                                    scratch_rng);
    rl::SafeDdpgAgent& a = *out.agent;
    try {
        a.actor().set_parameters(get("actor"));
        a.actor_target().set_parameters(get("actor_target"));
        a.critic().set_parameters(get("critic"));
        a.critic_target().set_parameters(get("critic_target"));
        a.guard().set_parameters(get("guard"));
        a.guard_target().set_parameters(get("guard_target"));
        a.actor_opt().set_state(get("actor_opt"), a.actor());
        a.critic_opt().set_state(get("critic_opt"), a.critic());
        a.guard_opt().set_state(get("guard_opt"), a.guard());
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }

    const Eigen::VectorXd& kernel = get("kernel");
    const Eigen::Index d = a.gp().input_dim();
    if (kernel.size() != 1 + d)
        throw ParseError("checkpoint: kernel tensor has wrong size");
    gp::KernelParams kp;
    kp.signal_variance = kernel(0);
    kp.lengthscales = kernel.tail(d);
    try {
        a.gp().set_kernel(kp);
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }

    const Eigen::VectorXd& gp_inputs = get("gp_inputs");
    const Eigen::VectorXd& gp_targets = get("gp_targets");
    if (gp_inputs.size() != gp_targets.size() * d)
        throw ParseError("checkpoint: GP tensors disagree about the data size");
    a.gp().data().clear();
    for (Eigen::Index i = 0; i < gp_targets.size(); ++i)
        a.gp().data().add(gp_inputs.segment(i * d, d), gp_targets(i));
    a.gp().invalidate();

    const Eigen::VectorXd& beta = get("beta");
    if (beta.size() != 1)
        throw ParseError("checkpoint: beta tensor has wrong size");
    a.set_beta_value(beta(0));

    return out;
}

} // namespace sgrl::io

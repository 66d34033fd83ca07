#include "sgrl/rl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgrl::rl {

namespace {

std::vector<nn::LayerSpec> actor_layers(Eigen::Index hidden, Eigen::Index action_dim) {
    return {{hidden, nn::Activation::Relu},
            {hidden, nn::Activation::Relu},
            {action_dim, nn::Activation::Tanh}};
}

std::vector<nn::LayerSpec> value_layers(Eigen::Index hidden) {
    return {{hidden, nn::Activation::Relu},
            {hidden, nn::Activation::Relu},
            {1, nn::Activation::Identity}};
}

} // namespace

SafeDdpgAgent::SafeDdpgAgent(const AgentConfig& config, Rng& rng)
    : cfg_(config),
      actor_(config.state_dim, actor_layers(config.hidden, config.action_dim)),
      actor_target_(config.state_dim, actor_layers(config.hidden, config.action_dim)),
      critic_(config.state_dim + config.action_dim, value_layers(config.hidden)),
      critic_target_(config.state_dim + config.action_dim, value_layers(config.hidden)),
      guard_(config.state_dim + config.action_dim, value_layers(config.hidden)),
      guard_target_(config.state_dim + config.action_dim, value_layers(config.hidden)),
      actor_opt_(config.actor_lr),
      critic_opt_(config.critic_lr),
      guard_opt_(config.guard_lr) {
    if (cfg_.action_limit <= 0.0)
        throw std::invalid_argument("agent: action_limit must be > 0");

    // Fixed initialization order keeps the random stream identical across
    // agent variants with the same seed.
    actor_.initialize(rng, 3e-3);
    critic_.initialize(rng);
    guard_.initialize(rng);
    actor_target_.set_parameters(actor_.parameters());
    critic_target_.set_parameters(critic_.parameters());
    guard_target_.set_parameters(guard_.parameters());

    gp::KernelParams kp = cfg_.gp_kernel;
    const Eigen::Index gp_dim = cfg_.state_dim + cfg_.action_dim;
    if (kp.lengthscales.size() == 0)
        kp.lengthscales = Eigen::VectorXd::Ones(gp_dim);
    gp_ = std::make_unique<gp::Regressor>(gp_dim, kp, cfg_.gp_noise_std);
    recompute_beta();
}

Eigen::MatrixXd SafeDdpgAgent::stack(const Eigen::MatrixXd& states,
                                     const Eigen::MatrixXd& actions) const {
    Eigen::MatrixXd z(states.rows() + actions.rows(), states.cols());
    z.topRows(states.rows()) = states;
    z.bottomRows(actions.rows()) = actions;
    return z;
}

Eigen::VectorXd SafeDdpgAgent::policy(const Eigen::VectorXd& state) const {
    return cfg_.action_limit * actor_.forward(state);
}

Eigen::MatrixXd SafeDdpgAgent::policy_batch(const Eigen::MatrixXd& states) const {
    return cfg_.action_limit * actor_.forward(states);
}

Eigen::VectorXd SafeDdpgAgent::select_action(const Eigen::VectorXd& state, double noise_std,
                                             Rng& rng) const {
    Eigen::VectorXd a = policy(state);
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a(i) = std::clamp(a(i) + rng.normal(0.0, noise_std), -cfg_.action_limit,
                          cfg_.action_limit);
    return a;
}

double SafeDdpgAgent::q_value(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const {
    Eigen::VectorXd z(state.size() + action.size());
    z << state, action;
    return critic_.forward(z)(0);
}

double SafeDdpgAgent::guard_value(const Eigen::VectorXd& state,
                                  const Eigen::VectorXd& action) const {
    Eigen::VectorXd z(state.size() + action.size());
    z << state, action;
    return guard_.forward(z)(0);
}

double SafeDdpgAgent::update_critic(const Batch& batch) {
    const Eigen::Index B = batch.size();
    const Eigen::MatrixXd next_actions = cfg_.action_limit * actor_target_.forward(batch.next_states);
    const Eigen::VectorXd next_q =
        critic_target_.forward(stack(batch.next_states, next_actions)).row(0);
    const Eigen::VectorXd y =
        batch.rewards.array() + cfg_.discount * (1.0 - batch.done.array()) * next_q.array();

    nn::Workspace ws;
    const Eigen::VectorXd q = critic_.forward(stack(batch.states, batch.actions), ws).row(0);
    const Eigen::VectorXd diff = q - y;
    const double loss = diff.squaredNorm() / static_cast<double>(B);

    Eigen::MatrixXd dout = (2.0 / static_cast<double>(B)) * diff.transpose();
    nn::Gradients grads;
    critic_.backward(ws, dout, grads);
    critic_opt_.step(critic_, grads);
    nn::Mlp::soft_update(critic_target_, critic_, cfg_.tau);
    return loss;
}

double SafeDdpgAgent::update_guard(const Batch& batch) {
    const Eigen::Index B = batch.size();
    const Eigen::MatrixXd next_actions = cfg_.action_limit * actor_target_.forward(batch.next_states);
    const Eigen::VectorXd next_g =
        guard_target_.forward(stack(batch.next_states, next_actions)).row(0);
    // Undiscounted accumulation: the guard tracks total remaining cost, not a
    // discounted value.
    const Eigen::VectorXd y = batch.costs.array() + (1.0 - batch.done.array()) * next_g.array();

    nn::Workspace ws;
    const Eigen::VectorXd g = guard_.forward(stack(batch.states, batch.actions), ws).row(0);
    const Eigen::VectorXd diff = g - y;
    const double loss = diff.squaredNorm() / static_cast<double>(B);

    Eigen::MatrixXd dout = (2.0 / static_cast<double>(B)) * diff.transpose();
    nn::Gradients grads;
    guard_.backward(ws, dout, grads);
    guard_opt_.step(guard_, grads);
    nn::Mlp::soft_update(guard_target_, guard_, cfg_.tau);
    return loss;
}

double SafeDdpgAgent::actor_backward(const Batch& batch, nn::Gradients& grads) const {
    const Eigen::Index B = batch.size();
    const double limit = cfg_.action_limit;

    nn::Workspace ws_actor;
    const Eigen::MatrixXd head = actor_.forward(batch.states, ws_actor); // in [-1, 1]
    const Eigen::MatrixXd actions = limit * head;
    const Eigen::MatrixXd z = stack(batch.states, actions);

    nn::Workspace ws_critic;
    const Eigen::VectorXd q = critic_.forward(z, ws_critic).row(0);
    // Per-sample dQ/d(s,a); parameter gradients of the critic are discarded.
    nn::Gradients scratch;
    const Eigen::MatrixXd dz =
        critic_.backward(ws_critic, Eigen::MatrixXd::Ones(1, B), scratch);
    Eigen::MatrixXd dJ_da = dz.bottomRows(cfg_.action_dim);

    double objective_sum = 0.0;
    if (cfg_.use_guard_gp) {
        const gp::PosteriorGradBatch post = gp_->posterior_grad_batch(z);
        for (Eigen::Index j = 0; j < B; ++j) {
            const double sigma = std::sqrt(post.variance(j));
            const double l = post.mean(j) - beta_ * sigma;
            // dl/dz = dmu/dz - beta * dvar/dz / (2 sigma); the clamp keeps the
            // chain rule finite when the posterior collapses onto the data.
            const Eigen::VectorXd dl_dz =
                post.dmean.col(j) -
                (beta_ / (2.0 * std::max(sigma, 1e-9))) * post.dvariance.col(j);
            const double bonus = std::exp(-l * l);
            objective_sum += q(j) - cfg_.penalty * std::max(0.0, -l) + bonus;
            // d/dl [-penalty * max(0, -l)] = penalty for l < 0 (0 at the kink),
            // d/dl exp(-l^2) = -2 l exp(-l^2).
            const double dJ_dl = (l < 0.0 ? cfg_.penalty : 0.0) - 2.0 * l * bonus;
            dJ_da.col(j) += dJ_dl * dl_dz.tail(cfg_.action_dim);
        }
    } else {
        objective_sum = q.sum();
    }

    // Ascend: Adam applies descent, so feed it the negated gradient.  The
    // factor `limit` is the chain rule through a = limit * head.
    Eigen::MatrixXd dout = (-limit / static_cast<double>(B)) * dJ_da;
    actor_.backward(ws_actor, dout, grads);
    return objective_sum / static_cast<double>(B);
}

double SafeDdpgAgent::update_actor(const Batch& batch) {
    nn::Gradients grads;
    const double objective = actor_backward(batch, grads);
    actor_opt_.step(actor_, grads);
    nn::Mlp::soft_update(actor_target_, actor_, cfg_.tau);
    return objective;
}

double SafeDdpgAgent::actor_objective_grad(const Batch& batch, Eigen::VectorXd& grad) const {
    nn::Gradients grads;
    const double objective = actor_backward(batch, grads);
    grad.resize(actor_.parameter_count());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
        const Eigen::MatrixXd& W = grads.weights[l];
        grad.segment(off, W.size()) =
            -Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
        off += W.size();
        const Eigen::VectorXd& b = grads.biases[l];
        grad.segment(off, b.size()) = -b;
        off += b.size();
    }
    return objective;
}

double SafeDdpgAgent::measurement(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                                  const Eigen::VectorXd& next_state) const {
    const Eigen::VectorXd next_action = policy(next_state);
    return guard_value(next_state, next_action) - guard_value(state, action);
}

bool SafeDdpgAgent::filter_measurement(double ghat, double cost) const {
    const double w = cfg_.gp_noise_std;
    return std::abs(ghat - cost) <= w || std::abs(ghat + cost) <= w;
}

bool SafeDdpgAgent::storage_filter(double ghat) const {
    return std::abs(ghat) > cfg_.gp_noise_std;
}

double SafeDdpgAgent::recompute_beta() {
    const gp::Regressor& g = *gp_; // const access: don't invalidate the cache
    beta_ = gp::beta(g.data(), g.kernel(), cfg_.gp_noise_std, cfg_.beta);
    return beta_;
}

} // namespace sgrl::rl

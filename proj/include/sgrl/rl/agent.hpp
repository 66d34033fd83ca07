#pragma once

#include "sgrl/gp/confidence.hpp"
#include "sgrl/gp/regression.hpp"
#include "sgrl/nn/adam.hpp"
#include "sgrl/nn/mlp.hpp"
#include "sgrl/rl/replay.hpp"
#include "sgrl/util/rng.hpp"

#include <Eigen/Dense>

#include <memory>

namespace sgrl::rl {

struct AgentConfig {
    Eigen::Index state_dim = 2;
    Eigen::Index action_dim = 1;
    double action_limit = 2.0; // policy outputs live in [-limit, limit]

    Eigen::Index hidden = 64;  // width of both hidden layers in every net
    double discount = 0.99;
    double tau = 0.005;        // target-network soft-update rate
    double penalty = 20.0;     // weight on the safety hinge in the policy objective
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double guard_lr = 1e-3;

    double gp_noise_std = 0.1;     // GP observation noise; also the filter width
    gp::KernelParams gp_kernel;    // empty lengthscales = unit lengthscales
    gp::BetaConfig beta;

    // When false the policy objective is plain Q (no GP term).  Guard-network
    // training is unaffected; only the policy update changes.
    bool use_guard_gp = true;
};

// Off-policy actor-critic with a separate "guard" network that accumulates
// per-step safety cost, and a GP over observed guard differences whose lower
// confidence bound steers the policy away from transitions it cannot certify.
class SafeDdpgAgent {
public:
    SafeDdpgAgent(const AgentConfig& config, Rng& rng);

    const AgentConfig& config() const { return cfg_; }

    // Deterministic policy: action_limit * tanh head.
    Eigen::VectorXd policy(const Eigen::VectorXd& state) const;
    Eigen::MatrixXd policy_batch(const Eigen::MatrixXd& states) const;

    // Exploration policy: Gaussian noise added per component, then clipped to
    // the action limit.  noise_std is in action units.
    Eigen::VectorXd select_action(const Eigen::VectorXd& state, double noise_std, Rng& rng) const;

    double q_value(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const;
    double guard_value(const Eigen::VectorXd& state, const Eigen::VectorXd& action) const;

    // One minibatch update each; return the minibatch loss / objective.
    // Critic regresses r + discount * (1 - done) * Q'(s', pi'(s')); the guard
    // regresses the undiscounted c + (1 - done) * G'(s', pi'(s')).
    double update_critic(const Batch& batch);
    double update_guard(const Batch& batch);

    // Gradient-ascent step on the policy objective
    //   J(s) = Q(s, pi(s)) - penalty * max(0, -l) + exp(-l^2),
    // where l is the GP lower confidence bound of the guard difference at
    // (s, pi(s)).  Critic, guard, and GP are held fixed; only policy
    // parameters move.  Returns the mean objective over the batch.
    double update_actor(const Batch& batch);

    // Mean policy objective of the batch together with its ascent gradient
    // w.r.t. the policy parameters, flattened in Mlp::parameters() order.
    // Evaluates exactly the objective update_actor ascends, without changing
    // any state.
    double actor_objective_grad(const Batch& batch, Eigen::VectorXd& grad) const;

    // Observed guard difference for a transition: G(s', pi(s')) - G(s, a)
    // under the current (online) networks.
    double measurement(const Eigen::VectorXd& state, const Eigen::VectorXd& action,
                       const Eigen::VectorXd& next_state) const;

    // A measurement is plausible if it is within one noise width of the step
    // cost in either sign convention.
    bool filter_measurement(double ghat, double cost) const;

    // A measurement is worth storing only if it is distinguishable from zero
    // at the noise scale.
    bool storage_filter(double ghat) const;

    gp::Regressor& gp() { return *gp_; }
    const gp::Regressor& gp() const { return *gp_; }

    // Re-evaluate the confidence scale from the current GP data.  Returns the
    // new value (also cached for use in policy updates).
    double recompute_beta();
    double beta_value() const { return beta_; }
    void set_beta_value(double b) { beta_ = b; }

    nn::Mlp& actor() { return actor_; }
    nn::Mlp& actor_target() { return actor_target_; }
    nn::Mlp& critic() { return critic_; }
    nn::Mlp& critic_target() { return critic_target_; }
    nn::Mlp& guard() { return guard_; }
    nn::Mlp& guard_target() { return guard_target_; }
    const nn::Mlp& actor() const { return actor_; }
    const nn::Mlp& actor_target() const { return actor_target_; }
    const nn::Mlp& critic() const { return critic_; }
    const nn::Mlp& critic_target() const { return critic_target_; }
    const nn::Mlp& guard() const { return guard_; }
    const nn::Mlp& guard_target() const { return guard_target_; }
    nn::Adam& actor_opt() { return actor_opt_; }
    nn::Adam& critic_opt() { return critic_opt_; }
    nn::Adam& guard_opt() { return guard_opt_; }
    const nn::Adam& actor_opt() const { return actor_opt_; }
    const nn::Adam& critic_opt() const { return critic_opt_; }
    const nn::Adam& guard_opt() const { return guard_opt_; }

private:
    Eigen::MatrixXd stack(const Eigen::MatrixXd& states, const Eigen::MatrixXd& actions) const;

    // Shared core of update_actor and actor_objective_grad: fills `grads`
    // with what the optimizer should descend on (the negated objective
    // gradient) and returns the mean objective.
    double actor_backward(const Batch& batch, nn::Gradients& grads) const;

    AgentConfig cfg_;
    nn::Mlp actor_, actor_target_;
    nn::Mlp critic_, critic_target_;
    nn::Mlp guard_, guard_target_;
    nn::Adam actor_opt_, critic_opt_, guard_opt_;
    std::unique_ptr<gp::Regressor> gp_;
    double beta_ = 0.0;
};

} // namespace sgrl::rl

#pragma once

#include "sgrl/nn/mlp.hpp"

#include <Eigen/Dense>

#include <vector>

namespace sgrl::nn {

// Adam optimizer bound to one network.  Keeps first/second moment estimates
// per tensor and applies the bias-corrected update on every step.
class Adam {
public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    double learning_rate() const { return lr_; }

    // One descent step: p <- p - lr * mhat / (sqrt(vhat) + eps).
    // To ascend an objective, pass the negated gradient.
    void step(Mlp& net, const Gradients& grads);

    void reset();

    // Optimizer state round-trip for checkpoints: step count followed by all
    // first moments then all second moments, in parameter layout order.
    Eigen::VectorXd state() const;
    void set_state(const Eigen::VectorXd& flat, const Mlp& net);

private:
    void ensure_shapes(const Mlp& net);

    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Eigen::MatrixXd> m_w_, v_w_;
    std::vector<Eigen::VectorXd> m_b_, v_b_;
};

} // namespace sgrl::nn

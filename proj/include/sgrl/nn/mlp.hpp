#pragma once

#include "sgrl/util/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace sgrl::nn {

enum class Activation { Relu, Tanh, Identity };

struct LayerSpec {
    Eigen::Index width;
    Activation activation;
};

// Gradients of a loss w.r.t. every weight matrix and bias vector of an Mlp,
// in layer order.  Produced by Mlp::backward, consumed by Adam.
struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Per-batch forward cache needed to run backward.
struct Workspace {
    std::vector<Eigen::MatrixXd> inputs; // inputs[l] = input to layer l (cols = samples)
    std::vector<Eigen::MatrixXd> pre;    // pre[l] = W x + b before activation
};

// Small fully connected network.  Batches are column-major: each column of a
// matrix is one sample, which keeps every layer a single gemm.
class Mlp {
public:
    Mlp(Eigen::Index input_dim, std::vector<LayerSpec> layers);

    Eigen::Index input_dim() const { return input_dim_; }
    Eigen::Index output_dim() const { return weights_.back().rows(); }
    std::size_t layer_count() const { return weights_.size(); }

    // Uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    // If final_layer_scale > 0 the last layer is instead drawn from
    // U(-final_layer_scale, final_layer_scale), the usual trick to start a
    // policy head near zero.
    void initialize(Rng& rng, double final_layer_scale = 0.0);

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X, Workspace& ws) const;

    // Backpropagate dL/doutput (same shape as the forward output) through the
    // cached batch.  Fills `grads` (resized as needed) and returns dL/dinput.
    Eigen::MatrixXd backward(const Workspace& ws, const Eigen::MatrixXd& dout,
                             Gradients& grads) const;

    // Parameter vector round-trip, used by checkpoints.  Layout: for each
    // layer, the weight matrix in column-major order, then the bias.
    Eigen::Index parameter_count() const;
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& flat);

    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    const std::vector<Eigen::VectorXd>& biases() const { return biases_; }
    std::vector<Eigen::MatrixXd>& weights() { return weights_; }
    std::vector<Eigen::VectorXd>& biases() { return biases_; }

    // target <- (1 - tau) * target + tau * source.  Shapes must match.
    static void soft_update(Mlp& target, const Mlp& source, double tau);

private:
    Eigen::Index input_dim_;
    std::vector<Activation> activations_;
    std::vector<Eigen::MatrixXd> weights_; // weights_[l] is (out x in)
    std::vector<Eigen::VectorXd> biases_;
};

} // namespace sgrl::nn

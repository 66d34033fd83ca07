#include "sgrl/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrl::nn {

namespace {

void apply_activation(Activation act, Eigen::MatrixXd& z) {
    switch (act) {
    case Activation::Relu:
        z = z.array().max(0.0);
        break;
    case Activation::Tanh:
        z = z.array().tanh();
        break;
    case Activation::Identity:
        break;
    }
}

// Derivative of the activation evaluated at the pre-activation values.
// relu'(0) is taken as 0.
Eigen::ArrayXXd activation_grad(Activation act, const Eigen::MatrixXd& pre) {
    switch (act) {
    case Activation::Relu:
        return (pre.array() > 0.0).cast<double>();
    case Activation::Tanh: {
        Eigen::ArrayXXd t = pre.array().tanh();
        return 1.0 - t.square();
    }
    case Activation::Identity:
        return Eigen::ArrayXXd::Ones(pre.rows(), pre.cols());
    }
    throw std::logic_error("unreachable activation");
}

} // namespace

Mlp::Mlp(Eigen::Index input_dim, std::vector<LayerSpec> layers) : input_dim_(input_dim) {
    if (input_dim < 1)
        throw std::invalid_argument("mlp: input dimension must be >= 1");
    if (layers.empty())
        throw std::invalid_argument("mlp: at least one layer required");
    Eigen::Index in = input_dim;
    for (const LayerSpec& spec : layers) {
        if (spec.width < 1)
            throw std::invalid_argument("mlp: layer width must be >= 1");
        weights_.emplace_back(Eigen::MatrixXd::Zero(spec.width, in));
        biases_.emplace_back(Eigen::VectorXd::Zero(spec.width));
        activations_.push_back(spec.activation);
        in = spec.width;
    }
}

void Mlp::initialize(Rng& rng, double final_layer_scale) {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const bool last = (l + 1 == weights_.size());
        const double fan_in = static_cast<double>(weights_[l].cols());
        const double bound = (last && final_layer_scale > 0.0)
                                 ? final_layer_scale
                                 : 1.0 / std::sqrt(fan_in);
        for (Eigen::Index j = 0; j < weights_[l].cols(); ++j)
            for (Eigen::Index i = 0; i < weights_[l].rows(); ++i)
                weights_[l](i, j) = rng.uniform(-bound, bound);
        for (Eigen::Index i = 0; i < biases_[l].size(); ++i)
            biases_[l](i) = rng.uniform(-bound, bound);
    }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
    return forward(Eigen::MatrixXd(x)).col(0);
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X) const {
    if (X.rows() != input_dim_)
        throw std::invalid_argument("mlp: input dimension mismatch");
    Eigen::MatrixXd h = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::MatrixXd z = (weights_[l] * h).colwise() + biases_[l];
        apply_activation(activations_[l], z);
        h = std::move(z);
    }
    return h;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& X, Workspace& ws) const {
    if (X.rows() != input_dim_)
        throw std::invalid_argument("mlp: input dimension mismatch");
    ws.inputs.assign(weights_.size(), {});
    ws.pre.assign(weights_.size(), {});
    Eigen::MatrixXd h = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        ws.inputs[l] = h;
        Eigen::MatrixXd z = (weights_[l] * h).colwise() + biases_[l];
        ws.pre[l] = z;
        apply_activation(activations_[l], z);
        h = std::move(z);
    }
    return h;
}

Eigen::MatrixXd Mlp::backward(const Workspace& ws, const Eigen::MatrixXd& dout,
                              Gradients& grads) const {
    if (ws.pre.size() != weights_.size())
        throw std::invalid_argument("mlp: workspace does not match network");
    grads.weights.resize(weights_.size());
    grads.biases.resize(biases_.size());

    Eigen::MatrixXd delta = dout;
    for (std::size_t l = weights_.size(); l-- > 0;) {
        delta = delta.array() * activation_grad(activations_[l], ws.pre[l]);
        grads.weights[l] = delta * ws.inputs[l].transpose();
        grads.biases[l] = delta.rowwise().sum();
        if (l > 0)
            delta = (weights_[l].transpose() * delta).eval();
        else
            return weights_[0].transpose() * delta;
    }
    throw std::logic_error("mlp: empty network in backward");
}

Eigen::Index Mlp::parameter_count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l)
        n += weights_[l].size() + biases_[l].size();
    return n;
}

Eigen::VectorXd Mlp::parameters() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        flat.segment(off, weights_[l].size()) =
            Eigen::Map<const Eigen::VectorXd>(weights_[l].data(), weights_[l].size());
        off += weights_[l].size();
        flat.segment(off, biases_[l].size()) = biases_[l];
        off += biases_[l].size();
    }
    return flat;
}

void Mlp::set_parameters(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count())
        throw std::invalid_argument("mlp: parameter vector size mismatch");
    Eigen::Index off = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        Eigen::Map<Eigen::VectorXd>(weights_[l].data(), weights_[l].size()) =
            flat.segment(off, weights_[l].size());
        off += weights_[l].size();
        biases_[l] = flat.segment(off, biases_[l].size());
        off += biases_[l].size();
    }
}

void Mlp::soft_update(Mlp& target, const Mlp& source, double tau) {
    if (target.weights_.size() != source.weights_.size())
        throw std::invalid_argument("soft_update: network architectures differ");
    for (std::size_t l = 0; l < target.weights_.size(); ++l) {
        if (target.weights_[l].rows() != source.weights_[l].rows() ||
            target.weights_[l].cols() != source.weights_[l].cols())
            throw std::invalid_argument("soft_update: layer shapes differ");
        target.weights_[l] = (1.0 - tau) * target.weights_[l] + tau * source.weights_[l];
        target.biases_[l] = (1.0 - tau) * target.biases_[l] + tau * source.biases_[l];
    }
}

} // namespace sgrl::nn

#include "sgrl/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrl::nn {

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    if (!(lr > 0.0))
        throw std::invalid_argument("adam: learning rate must be > 0");
}

void Adam::ensure_shapes(const Mlp& net) {
    if (m_w_.size() == net.weights().size())
        return;
    m_w_.clear(); v_w_.clear(); m_b_.clear(); v_b_.clear();
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        m_w_.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        v_w_.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
        m_b_.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
        v_b_.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
    }
}

void Adam::step(Mlp& net, const Gradients& grads) {
    if (grads.weights.size() != net.weights().size())
        throw std::invalid_argument("adam: gradient layout does not match network");
    ensure_shapes(net);
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t l = 0; l < net.weights().size(); ++l) {
        m_w_[l] = beta1_ * m_w_[l] + (1.0 - beta1_) * grads.weights[l];
        v_w_[l] = beta2_ * v_w_[l] + (1.0 - beta2_) * grads.weights[l].array().square().matrix();
        net.weights()[l].array() -=
            lr_ * (m_w_[l].array() / c1) / ((v_w_[l].array() / c2).sqrt() + eps_);

        m_b_[l] = beta1_ * m_b_[l] + (1.0 - beta1_) * grads.biases[l];
        v_b_[l] = beta2_ * v_b_[l] + (1.0 - beta2_) * grads.biases[l].array().square().matrix();
        net.biases()[l].array() -=
            lr_ * (m_b_[l].array() / c1) / ((v_b_[l].array() / c2).sqrt() + eps_);
    }
}

void Adam::reset() {
    t_ = 0;
    m_w_.clear(); v_w_.clear(); m_b_.clear(); v_b_.clear();
}

Eigen::VectorXd Adam::state() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < m_w_.size(); ++l)
        n += m_w_[l].size() + m_b_[l].size();
    Eigen::VectorXd flat(1 + 2 * n);
    flat(0) = static_cast<double>(t_);
    Eigen::Index off = 1;
    auto dump = [&](const std::vector<Eigen::MatrixXd>& mw,
                    const std::vector<Eigen::VectorXd>& mb) {
        for (std::size_t l = 0; l < mw.size(); ++l) {
            flat.segment(off, mw[l].size()) =
                Eigen::Map<const Eigen::VectorXd>(mw[l].data(), mw[l].size());
            off += mw[l].size();
            flat.segment(off, mb[l].size()) = mb[l];
            off += mb[l].size();
        }
    };
    dump(m_w_, m_b_);
    dump(v_w_, v_b_);
    return flat;
}

void Adam::set_state(const Eigen::VectorXd& flat, const Mlp& net) {
    if (flat.size() == 1) {
        // State saved before any step: moments were never allocated.  Stay
        // lazy so a save/load/save cycle reproduces the same bytes.
        reset();
        t_ = static_cast<long>(flat(0));
        return;
    }
    ensure_shapes(net);
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < m_w_.size(); ++l)
        n += m_w_[l].size() + m_b_[l].size();
    if (flat.size() != 1 + 2 * n)
        throw std::invalid_argument("adam: state vector size mismatch");
    t_ = static_cast<long>(flat(0));
    Eigen::Index off = 1;
    auto load = [&](std::vector<Eigen::MatrixXd>& mw, std::vector<Eigen::VectorXd>& mb) {
        for (std::size_t l = 0; l < mw.size(); ++l) {
            Eigen::Map<Eigen::VectorXd>(mw[l].data(), mw[l].size()) =
                flat.segment(off, mw[l].size());
            off += mw[l].size();
            mb[l] = flat.segment(off, mb[l].size());
            off += mb[l].size();
        }
    };
    load(m_w_, m_b_);
    load(v_w_, v_b_);
}

} // namespace sgrl::nn

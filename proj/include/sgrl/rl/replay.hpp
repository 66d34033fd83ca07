#pragma once

#include "sgrl/util/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace sgrl::rl {

struct Transition {
    Eigen::VectorXd state;
    Eigen::VectorXd action;
    double reward = 0.0;
    double cost = 0.0;
    Eigen::VectorXd next_state;
    bool done = false;
};

// Column-major minibatch: column j of each matrix is sample j.
struct Batch {
    Eigen::MatrixXd states;      // state_dim x B
    Eigen::MatrixXd actions;     // action_dim x B
    Eigen::VectorXd rewards;     // B
    Eigen::VectorXd costs;       // B
    Eigen::MatrixXd next_states; // state_dim x B
    Eigen::VectorXd done;        // B, 0.0 or 1.0

    Eigen::Index size() const { return rewards.size(); }
};

// Fixed-capacity ring buffer of transitions with uniform sampling.
class ReplayBuffer {
public:
    ReplayBuffer(Eigen::Index state_dim, Eigen::Index action_dim, std::size_t capacity);

    void push(const Transition& t);
    std::size_t size() const { return storage_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

    // Uniform sample with replacement; draws exactly `batch` indices from the
    // supplied stream in order.
    Batch sample(Eigen::Index batch, Rng& rng) const;

private:
    Eigen::Index state_dim_, action_dim_;
    std::size_t capacity_;
    std::size_t next_ = 0; // overwrite cursor once full
    std::vector<Transition> storage_;
};

} // namespace sgrl::rl

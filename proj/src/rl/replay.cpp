#include "sgrl/rl/replay.hpp"

#include <stdexcept>

namespace sgrl::rl {

ReplayBuffer::ReplayBuffer(Eigen::Index state_dim, Eigen::Index action_dim,
                           std::size_t capacity)
    : state_dim_(state_dim), action_dim_(action_dim), capacity_(capacity) {
    if (capacity == 0)
        throw std::invalid_argument("replay: capacity must be > 0");
    storage_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(const Transition& t) {
    if (t.state.size() != state_dim_ || t.next_state.size() != state_dim_ ||
        t.action.size() != action_dim_)
        throw std::invalid_argument("replay: transition dimension mismatch");
    if (storage_.size() < capacity_) {
        storage_.push_back(t);
    } else {
        storage_[next_] = t;
        next_ = (next_ + 1) % capacity_;
    }
}

Batch ReplayBuffer::sample(Eigen::Index batch, Rng& rng) const {
    if (storage_.empty())
        throw std::logic_error("replay: cannot sample from an empty buffer");
    if (batch < 1)
        throw std::invalid_argument("replay: batch size must be >= 1");
    Batch b;
    b.states.resize(state_dim_, batch);
    b.actions.resize(action_dim_, batch);
    b.rewards.resize(batch);
    b.costs.resize(batch);
    b.next_states.resize(state_dim_, batch);
    b.done.resize(batch);
    for (Eigen::Index j = 0; j < batch; ++j) {
        const Transition& t = storage_[rng.index(storage_.size())];
        b.states.col(j) = t.state;
        b.actions.col(j) = t.action;
        b.rewards(j) = t.reward;
        b.costs(j) = t.cost;
        b.next_states.col(j) = t.next_state;
        b.done(j) = t.done ? 1.0 : 0.0;
    }
    return b;
}

} // namespace sgrl::rl

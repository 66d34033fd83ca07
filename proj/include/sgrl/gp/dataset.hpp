#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace sgrl::gp {

// Ordered collection of (input, target) pairs backing a GP.  Insertion order
// is part of the contract: sparsification must preserve the relative order of
// surviving points, and the information-capacity computation conditions on
// points in this order.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(Eigen::Index input_dim) : dim_(input_dim) {}

    Eigen::Index input_dim() const { return dim_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(targets_.size()); }
    bool empty() const { return targets_.empty(); }

    void add(const Eigen::VectorXd& input, double target);

    // Remove by position; later points shift down, preserving order.
    void remove(Eigen::Index i);

    // Keep exactly the given positions (must be sorted ascending, unique).
    void keep(const std::vector<Eigen::Index>& sorted_positions);

    const Eigen::VectorXd& input(Eigen::Index i) const { return inputs_[static_cast<std::size_t>(i)]; }
    double target(Eigen::Index i) const { return targets_[static_cast<std::size_t>(i)]; }

    // Dense views for linear algebra: inputs stacked as rows, targets as a
    // column.  Built on demand.
    Eigen::MatrixXd input_matrix() const;
    Eigen::VectorXd target_vector() const;

    void clear() { inputs_.clear(); targets_.clear(); }

private:
    Eigen::Index dim_ = 0;
    std::vector<Eigen::VectorXd> inputs_;
    std::vector<double> targets_;
};

} // namespace sgrl::gp

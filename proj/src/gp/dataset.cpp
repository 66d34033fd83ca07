#include "sgrl/gp/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrl::gp {

void Dataset::add(const Eigen::VectorXd& input, double target) {
    if (dim_ == 0 && inputs_.empty())
        dim_ = input.size();
    if (input.size() != dim_)
        throw std::invalid_argument("dataset: input dimension mismatch");
    if (!input.allFinite() || !std::isfinite(target))
        throw std::invalid_argument("dataset: non-finite input or target");
    inputs_.push_back(input);
    targets_.push_back(target);
}

void Dataset::remove(Eigen::Index i) {
    if (i < 0 || i >= size())
        throw std::out_of_range("dataset: remove index out of range");
    inputs_.erase(inputs_.begin() + i);
    targets_.erase(targets_.begin() + i);
}

void Dataset::keep(const std::vector<Eigen::Index>& sorted_positions) {
    std::vector<Eigen::VectorXd> in;
    std::vector<double> tg;
    in.reserve(sorted_positions.size());
    tg.reserve(sorted_positions.size());
    Eigen::Index prev = -1;
    for (Eigen::Index i : sorted_positions) {
        if (i <= prev || i >= size())
            throw std::invalid_argument("dataset: keep positions must be sorted, unique, in range");
        prev = i;
        in.push_back(inputs_[static_cast<std::size_t>(i)]);
        tg.push_back(targets_[static_cast<std::size_t>(i)]);
    }
    inputs_ = std::move(in);
    targets_ = std::move(tg);
}

Eigen::MatrixXd Dataset::input_matrix() const {
    Eigen::MatrixXd X(size(), dim_);
    for (Eigen::Index i = 0; i < size(); ++i)
        X.row(i) = inputs_[static_cast<std::size_t>(i)].transpose();
    return X;
}

Eigen::VectorXd Dataset::target_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(targets_.data(), size());
}

} // namespace sgrl::gp

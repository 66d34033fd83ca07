#include "sgrl/gp/sparsify.hpp"

#include "sgrl/gp/regression.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace sgrl::gp {

Eigen::VectorXd independence_scores(const Dataset& data, const KernelParams& kernel) {
    const Eigen::Index n = data.size();
    if (n == 0)
        return Eigen::VectorXd();
    const Eigen::MatrixXd X = data.input_matrix();
    const Eigen::MatrixXd K = gram_matrix(kernel, X);
    auto [llt, jitter] = cholesky_with_jitter(K, kernel.signal_variance);
    // (A^-1)_ii = || L^-1 e_i ||^2 from A^-1 = L^-T L^-1.
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    llt.matrixL().solveInPlace(V);
    const Eigen::VectorXd inv_diag = V.colwise().squaredNorm();
    return (inv_diag.array().inverse() - jitter).matrix();
}

Eigen::Index evict_to_capacity(Dataset& data, const KernelParams& kernel,
                               Eigen::Index capacity) {
    if (capacity < 1)
        throw std::invalid_argument("evict_to_capacity: capacity must be >= 1");
    Eigen::Index removed = 0;
    while (data.size() > capacity) {
        const Eigen::VectorXd phi = independence_scores(data, kernel);
        Eigen::Index worst = 0;
        for (Eigen::Index i = 1; i < phi.size(); ++i)
            if (phi(i) < phi(worst))
                worst = i;
        data.remove(worst);
        ++removed;
    }
    return removed;
}

Eigen::Index remove_correlated(Dataset& data, const KernelParams& kernel,
                               double rel_threshold) {
    if (!(rel_threshold > 0.0))
        throw std::invalid_argument("remove_correlated: threshold must be > 0");
    Eigen::Index removed = 0;
    while (data.size() > 1) {
        const Eigen::Index n = data.size();
        const Eigen::MatrixXd K = gram_matrix(kernel, data.input_matrix());
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(K);
        const Eigen::MatrixXd R = qr.matrixR().template triangularView<Eigen::Upper>();
        const auto& perm = qr.colsPermutation().indices();
        const double pivot0 = std::abs(R(0, 0));

        std::vector<bool> drop(static_cast<std::size_t>(n), false);
        Eigen::Index drop_count = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(R(j, j)) < rel_threshold * pivot0) {
                drop[static_cast<std::size_t>(perm(j))] = true;
                ++drop_count;
            }
        }
        if (drop_count == 0)
            break;
        if (drop_count == n) {
            // Degenerate Gram matrix; keep the strongest pivot regardless.
            drop[static_cast<std::size_t>(perm(0))] = false;
            --drop_count;
        }
        std::vector<Eigen::Index> survivors;
        survivors.reserve(static_cast<std::size_t>(n - drop_count));
        for (Eigen::Index i = 0; i < n; ++i)
            if (!drop[static_cast<std::size_t>(i)])
                survivors.push_back(i);
        data.keep(survivors);
        removed += drop_count;
    }
    return removed;
}

} // namespace sgrl::gp

#include "sgrl/gp/confidence.hpp"

#include "sgrl/gp/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrl::gp {

double info_capacity(const Dataset& data, const KernelParams& kernel, double noise_std) {
    if (!(noise_std > 0.0))
        throw std::invalid_argument("info_capacity: noise_std must be > 0");
    const Eigen::Index n = data.size();
    if (n == 0)
        return 0.0;
    Eigen::MatrixXd A = gram_matrix(kernel, data.input_matrix());
    A.diagonal().array() += noise_std * noise_std;
    auto [llt, jitter] = cholesky_with_jitter(A, kernel.signal_variance);
    (void)jitter;
    // L_ii^2 is the conditional variance of observation i given the previous
    // ones, i.e. var_{i-1}(z_i) + noise^2, so the capacity telescopes into
    // sum log(L_ii / noise).
    return (llt.matrixLLT().diagonal().array() / noise_std).log().sum();
}

double rkhs_bound(const Dataset& data, const KernelParams& kernel, double floor) {
    if (data.empty())
        return floor;
    const Eigen::MatrixXd K = gram_matrix(kernel, data.input_matrix());
    auto [llt, jitter] = cholesky_with_jitter(K, kernel.signal_variance);
    (void)jitter;
    const Eigen::VectorXd y = data.target_vector();
    const double quad = y.dot(llt.solve(y));
    return std::max(floor, std::sqrt(std::max(0.0, quad)));
}

double beta(const Dataset& data, const KernelParams& kernel, double noise_std,
            const BetaConfig& config) {
    if (config.mode == BetaMode::Fixed)
        return config.fixed_value;
    if (!(config.delta > 0.0) || !(config.delta < 1.0))
        throw std::invalid_argument("beta: delta must be in (0, 1)");
    const double gamma = info_capacity(data, kernel, noise_std);
    const double b = rkhs_bound(data, kernel, config.rkhs_floor);
    return b + 4.0 * noise_std * std::sqrt(gamma + 1.0 + std::log(2.0 / config.delta));
}

std::pair<double, double> bounds(double mean, double variance, double beta) {
    if (variance < 0.0)
        throw std::invalid_argument("bounds: variance must be >= 0");
    const double spread = beta * std::sqrt(variance);
    return {mean - spread, mean + spread};
}

} // namespace sgrl::gp

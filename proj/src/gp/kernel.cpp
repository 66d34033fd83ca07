#include "sgrl/gp/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace sgrl::gp {

void KernelParams::validate(Eigen::Index input_dim) const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
        throw std::invalid_argument("kernel: signal_variance must be finite and > 0");
    if (lengthscales.size() != input_dim)
        throw std::invalid_argument("kernel: lengthscale count does not match input dimension");
    for (Eigen::Index d = 0; d < lengthscales.size(); ++d)
        if (!(lengthscales(d) > 0.0) || !std::isfinite(lengthscales(d)))
            throw std::invalid_argument("kernel: lengthscales must be finite and > 0");
}

double kernel(const KernelParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::ArrayXd diff = (a - b).array() / p.lengthscales.array();
    return p.signal_variance * std::exp(-0.5 * diff.square().sum());
}

Eigen::VectorXd kernel_vector(const KernelParams& p, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& z) {
    // Scale rows once, then use a squared-distance expansion so the whole
    // vector is one matrix-vector product instead of n exp-of-loop passes.
    const Eigen::ArrayXd inv_l = p.lengthscales.array().inverse();
    Eigen::MatrixXd Xs = X.array().rowwise() * inv_l.transpose();
    Eigen::VectorXd zs = z.array() * inv_l;
    Eigen::ArrayXd d2 = Xs.rowwise().squaredNorm().array() + zs.squaredNorm()
                        - 2.0 * (Xs * zs).array();
    return (p.signal_variance * (-0.5 * d2.max(0.0)).exp()).matrix();
}

Eigen::MatrixXd gram_matrix(const KernelParams& p, const Eigen::MatrixXd& X) {
    const Eigen::ArrayXd inv_l = p.lengthscales.array().inverse();
    Eigen::MatrixXd Xs = X.array().rowwise() * inv_l.transpose();
    Eigen::VectorXd sq = Xs.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = sq.replicate(1, X.rows()) + sq.transpose().replicate(X.rows(), 1)
                         - 2.0 * Xs * Xs.transpose();
    Eigen::MatrixXd K = p.signal_variance * (-0.5 * d2.array().max(0.0)).exp();
    // Symmetrize: the expansion above loses exact symmetry to rounding.
    K = 0.5 * (K + K.transpose()).eval();
    return K;
}

Eigen::MatrixXd kernel_vector_grad(const KernelParams& p, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& z) {
    const Eigen::VectorXd kn = kernel_vector(p, X, z);
    const Eigen::ArrayXd inv_l2 = p.lengthscales.array().square().inverse();
    Eigen::MatrixXd G(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        G.row(i) = kn(i) * ((X.row(i).transpose() - z).array() * inv_l2).matrix().transpose();
    return G;
}

} // namespace sgrl::gp

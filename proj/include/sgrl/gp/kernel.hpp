#pragma once

#include <Eigen/Dense>

namespace sgrl::gp {

// Squared-exponential kernel with one lengthscale per input dimension:
//
//   k(z, z') = sv * exp(-0.5 * sum_d ((z_d - z'_d) / l_d)^2)
//
// Hyperparameters are stored in plain (not log) space; optimization code is
// responsible for its own reparameterization.
struct KernelParams {
    double signal_variance = 1.0;
    Eigen::VectorXd lengthscales; // one per input dimension, all > 0

    void validate(Eigen::Index input_dim) const;
};

// k(a, b) for a single pair.
double kernel(const KernelParams& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Cross-covariance vector k(z, X) against each row of X, length X.rows().
Eigen::VectorXd kernel_vector(const KernelParams& p, const Eigen::MatrixXd& X,
                              const Eigen::VectorXd& z);

// Full Gram matrix K(X, X), symmetric, X.rows() x X.rows().
Eigen::MatrixXd gram_matrix(const KernelParams& p, const Eigen::MatrixXd& X);

// Gradient of k(z, x_i) with respect to z, for every row x_i of X.  Row i of
// the result is dk(z, x_i)/dz = k(z, x_i) * (x_i - z) ./ l^2.
Eigen::MatrixXd kernel_vector_grad(const KernelParams& p, const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& z);

} // namespace sgrl::gp

#pragma once

#include "sgrl/gp/dataset.hpp"
#include "sgrl/gp/kernel.hpp"

#include <Eigen/Dense>

#include <utility>

namespace sgrl::gp {

// Cholesky factorization with escalating diagonal jitter.  Tries the matrix
// as given, then adds jitter starting at 1e-10 * scale, multiplying by 10 up
// to 1e-4 * scale.  Returns the factorization together with the jitter that
// made it succeed.  Throws FactorizationError if even the largest jitter
// fails.
std::pair<Eigen::LLT<Eigen::MatrixXd>, double>
cholesky_with_jitter(const Eigen::MatrixXd& A, double scale);

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

struct PosteriorGrad {
    double mean = 0.0;
    double variance = 0.0;
    Eigen::VectorXd dmean;     // d mean / d z
    Eigen::VectorXd dvariance; // d variance / d z
};

// Batched posteriors with gradients; column j describes query j.
struct PosteriorGradBatch {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
    Eigen::MatrixXd dmean;     // input_dim x B
    Eigen::MatrixXd dvariance; // input_dim x B
};

struct FitOptions {
    int max_steps = 10;        // outer gradient-ascent steps
    double step_size = 1e-2;   // initial step in log-parameter space
    int max_halvings = 20;     // backtracking halvings per step
    double tolerance = 1e-9;   // accept a step if it loses no more than this
};

// Exact GP regressor with a squared-exponential ARD kernel and homoscedastic
// Gaussian observation noise.  The Cholesky factor of K + noise^2 I is cached
// and rebuilt lazily after any mutation of the data or hyperparameters.
class Regressor {
public:
    Regressor(Eigen::Index input_dim, KernelParams kernel, double noise_std);

    const Dataset& data() const { return data_; }
    Dataset& data() { invalidate(); return data_; }

    const KernelParams& kernel() const { return kernel_; }
    void set_kernel(KernelParams k);

    double noise_std() const { return noise_std_; }
    Eigen::Index input_dim() const { return dim_; }

    // Posterior mean and variance at a query point.  With no data this is the
    // prior: mean 0, variance k(z, z).
    Posterior posterior(const Eigen::VectorXd& z) const;

    // Posterior plus analytic gradients of mean and variance w.r.t. z.
    PosteriorGrad posterior_grad(const Eigen::VectorXd& z) const;

    // Same, for a batch of queries given as columns of Z.  One factorized
    // solve serves every query, which is what the per-batch policy update
    // needs to stay fast.
    PosteriorGradBatch posterior_grad_batch(const Eigen::MatrixXd& Z) const;

    // Log marginal likelihood of the current data under the current
    // hyperparameters.  Empty data gives 0.
    double log_marginal_likelihood() const;

    // Its gradient w.r.t. the log hyperparameters, ordered
    // [log signal_variance, log lengthscales...].  Empty data gives zeros.
    // This is the ascent direction fit_hyperparams follows.
    Eigen::VectorXd log_marginal_likelihood_grad() const;

    // Maximize the log marginal likelihood over signal variance and
    // lengthscales (noise is fixed) by gradient ascent in log-space with
    // backtracking.  Never leaves the hyperparameters at a point worse than
    // where they started.  Returns the final log marginal likelihood.
    double fit_hyperparams(const FitOptions& opts = {});

    // Force the factorization cache to rebuild on next use.
    void invalidate() { dirty_ = true; }

private:
    void refresh() const;

    Eigen::Index dim_;
    KernelParams kernel_;
    double noise_std_;
    Dataset data_;

    // Cache of the factorized system for the current data + hyperparameters.
    mutable bool dirty_ = true;
    mutable Eigen::MatrixXd X_;                 // inputs as rows
    mutable Eigen::VectorXd y_;                 // targets
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;   // K + noise^2 I (+ jitter)
    mutable Eigen::VectorXd alpha_;             // (K + noise^2 I)^-1 y
};

} // namespace sgrl::gp

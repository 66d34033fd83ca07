#include "sgrl/gp/regression.hpp"

#include "sgrl/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sgrl::gp {

std::pair<Eigen::LLT<Eigen::MatrixXd>, double>
cholesky_with_jitter(const Eigen::MatrixXd& A, double scale) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success)
        return {std::move(llt), 0.0};
    double jitter = 1e-10 * scale;
    const double max_jitter = 1e-4 * scale;
    // The loop bound is slack on purpose: rounding in the multiplicative
    // escalation must not skip the final 1e-4 * scale attempt.
    while (jitter <= max_jitter * (1.0 + 1e-12)) {
        Eigen::MatrixXd Aj = A;
        Aj.diagonal().array() += jitter;
        llt.compute(Aj);
        if (llt.info() == Eigen::Success)
            return {std::move(llt), jitter};
        jitter *= 10.0;
    }
    throw FactorizationError(static_cast<std::size_t>(A.rows()), max_jitter,
                             "cholesky_with_jitter: matrix not positive definite "
                             "even with maximum jitter");
}

Regressor::Regressor(Eigen::Index input_dim, KernelParams kernel, double noise_std)
    : dim_(input_dim), kernel_(std::move(kernel)), noise_std_(noise_std), data_(input_dim) {
    kernel_.validate(dim_);
    if (!(noise_std_ > 0.0) || !std::isfinite(noise_std_))
        throw std::invalid_argument("regressor: noise_std must be finite and > 0");
}

void Regressor::set_kernel(KernelParams k) {
    k.validate(dim_);
    kernel_ = std::move(k);
    invalidate();
}

void Regressor::refresh() const {
    if (!dirty_)
        return;
    X_ = data_.input_matrix();
    y_ = data_.target_vector();
    if (data_.size() > 0) {
        Eigen::MatrixXd A = gram_matrix(kernel_, X_);
        A.diagonal().array() += noise_std_ * noise_std_;
        auto [llt, jitter] = cholesky_with_jitter(A, kernel_.signal_variance);
        (void)jitter;
        llt_ = std::move(llt);
        alpha_ = llt_.solve(y_);
    }
    dirty_ = false;
}

Posterior Regressor::posterior(const Eigen::VectorXd& z) const {
    if (z.size() != dim_)
        throw std::invalid_argument("regressor: query dimension mismatch");
    refresh();
    Posterior p;
    const double kzz = kernel_.signal_variance;
    if (data_.empty()) {
        p.mean = 0.0;
        p.variance = kzz;
        return p;
    }
    const Eigen::VectorXd kn = kernel_vector(kernel_, X_, z);
    const Eigen::VectorXd w = llt_.solve(kn);
    p.mean = kn.dot(alpha_);
    p.variance = std::max(0.0, kzz - kn.dot(w));
    return p;
}

PosteriorGrad Regressor::posterior_grad(const Eigen::VectorXd& z) const {
    if (z.size() != dim_)
        throw std::invalid_argument("regressor: query dimension mismatch");
    refresh();
    PosteriorGrad p;
    p.dmean = Eigen::VectorXd::Zero(dim_);
    p.dvariance = Eigen::VectorXd::Zero(dim_);
    const double kzz = kernel_.signal_variance;
    if (data_.empty()) {
        p.mean = 0.0;
        p.variance = kzz;
        return p;
    }
    const Eigen::VectorXd kn = kernel_vector(kernel_, X_, z);
    const Eigen::VectorXd w = llt_.solve(kn);
    p.mean = kn.dot(alpha_);
    p.variance = std::max(0.0, kzz - kn.dot(w));
    // J(i, :) = d k(z, x_i) / d z; the prior term k(z, z) is flat for a
    // stationary kernel, so the variance gradient is -2 J^T w.
    const Eigen::MatrixXd J = kernel_vector_grad(kernel_, X_, z);
    p.dmean = J.transpose() * alpha_;
    p.dvariance = -2.0 * (J.transpose() * w);
    return p;
}

PosteriorGradBatch Regressor::posterior_grad_batch(const Eigen::MatrixXd& Z) const {
    if (Z.rows() != dim_)
        throw std::invalid_argument("regressor: query dimension mismatch");
    refresh();
    const Eigen::Index B = Z.cols();
    PosteriorGradBatch out;
    out.mean.setZero(B);
    out.variance.setConstant(B, kernel_.signal_variance);
    out.dmean.setZero(dim_, B);
    out.dvariance.setZero(dim_, B);
    if (data_.empty())
        return out;

    const Eigen::Index n = data_.size();
    // Cross covariances for all queries at once via the squared-distance
    // expansion: Kzn(q, i) = k(z_q, x_i).
    const Eigen::ArrayXd inv_l = kernel_.lengthscales.array().inverse();
    Eigen::MatrixXd Xs = X_.array().rowwise() * inv_l.transpose();
    Eigen::MatrixXd Zs = (Z.transpose().array().rowwise() * inv_l.transpose()).matrix();
    Eigen::MatrixXd d2 = Zs.rowwise().squaredNorm().replicate(1, n) +
                         Xs.rowwise().squaredNorm().transpose().replicate(B, 1) -
                         2.0 * Zs * Xs.transpose();
    Eigen::MatrixXd Kzn = kernel_.signal_variance * (-0.5 * d2.array().max(0.0)).exp();

    const Eigen::MatrixXd W = llt_.solve(Kzn.transpose()); // n x B
    out.mean = Kzn * alpha_;
    out.variance = (kernel_.signal_variance -
                    (Kzn.array() * W.transpose().array()).rowwise().sum())
                       .max(0.0)
                       .matrix();

    const Eigen::ArrayXd inv_l2 = kernel_.lengthscales.array().square().inverse();
    for (Eigen::Index q = 0; q < B; ++q) {
        // J(i, :) = k(z_q, x_i) * (x_i - z_q) ./ l^2
        Eigen::MatrixXd J =
            ((X_.rowwise() - Z.col(q).transpose()).array().rowwise() * inv_l2.transpose())
                .colwise() *
            Kzn.row(q).transpose().array();
        out.dmean.col(q) = J.transpose() * alpha_;
        out.dvariance.col(q) = -2.0 * (J.transpose() * W.col(q));
    }
    return out;
}

double Regressor::log_marginal_likelihood() const {
    refresh();
    const Eigen::Index n = data_.size();
    if (n == 0)
        return 0.0;
    const double quad = y_.dot(alpha_);
    const double logdet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
    constexpr double log_two_pi = 1.8378770664093454836;
    return -0.5 * quad - 0.5 * logdet - 0.5 * static_cast<double>(n) * log_two_pi;
}

namespace {

// Gradient of the log marginal likelihood w.r.t. log signal variance and log
// lengthscales, evaluated from scratch for the given parameters.
Eigen::VectorXd lml_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             const KernelParams& kp, double noise_std) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::MatrixXd K = gram_matrix(kp, X);
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise_std * noise_std;
    auto [llt, jitter] = cholesky_with_jitter(A, kp.signal_variance);
    (void)jitter;
    const Eigen::VectorXd alpha = llt.solve(y);
    const Eigen::MatrixXd Ainv = llt.solve(Eigen::MatrixXd::Identity(n, n));
    // dLML/dtheta = 0.5 * sum( (alpha alpha^T - A^-1) .* dK/dtheta )
    const Eigen::MatrixXd W = alpha * alpha.transpose() - Ainv;

    Eigen::VectorXd grad(1 + d);
    // dK/dlog(sv) = K.
    grad(0) = 0.5 * (W.array() * K.array()).sum();
    for (Eigen::Index j = 0; j < d; ++j) {
        // dK/dlog(l_j) = K .* S_j with S_j(i,k) = (x_ij - x_kj)^2 / l_j^2.
        const Eigen::VectorXd col = X.col(j);
        Eigen::MatrixXd diff = col.replicate(1, n) - col.transpose().replicate(n, 1);
        const double inv_l2 = 1.0 / (kp.lengthscales(j) * kp.lengthscales(j));
        Eigen::MatrixXd dK = K.array() * diff.array().square() * inv_l2;
        grad(1 + j) = 0.5 * (W.array() * dK.array()).sum();
    }
    return grad;
}

double lml_value(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                 const KernelParams& kp, double noise_std) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd A = gram_matrix(kp, X);
    A.diagonal().array() += noise_std * noise_std;
    auto [llt, jitter] = cholesky_with_jitter(A, kp.signal_variance);
    (void)jitter;
    const Eigen::VectorXd alpha = llt.solve(y);
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    constexpr double log_two_pi = 1.8378770664093454836;
    return -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(n) * log_two_pi;
}

KernelParams from_log(const Eigen::VectorXd& theta) {
    KernelParams kp;
    kp.signal_variance = std::exp(theta(0));
    kp.lengthscales = theta.tail(theta.size() - 1).array().exp();
    return kp;
}

Eigen::VectorXd to_log(const KernelParams& kp) {
    Eigen::VectorXd theta(1 + kp.lengthscales.size());
    theta(0) = std::log(kp.signal_variance);
    theta.tail(kp.lengthscales.size()) = kp.lengthscales.array().log();
    return theta;
}

} // namespace

Eigen::VectorXd Regressor::log_marginal_likelihood_grad() const {
    refresh();
    if (data_.empty())
        return Eigen::VectorXd::Zero(1 + dim_);
    return lml_gradient(X_, y_, kernel_, noise_std_);
}

double Regressor::fit_hyperparams(const FitOptions& opts) {
    refresh();
    if (data_.empty())
        return 0.0;

    Eigen::VectorXd theta = to_log(kernel_);
    Eigen::VectorXd best_theta = theta;
    double best = lml_value(X_, y_, kernel_, noise_std_);

    double current = best;
    for (int step = 0; step < opts.max_steps; ++step) {
        Eigen::VectorXd grad;
        try {
            grad = lml_gradient(X_, y_, from_log(theta), noise_std_);
        } catch (const FactorizationError&) {
            break; // current point is numerically hopeless; keep best
        }
        if (!grad.allFinite())
            break;

        double step_size = opts.step_size;
        bool accepted = false;
        for (int h = 0; h <= opts.max_halvings; ++h) {
            const Eigen::VectorXd cand = theta + step_size * grad;
            double value = -std::numeric_limits<double>::infinity();
            try {
                value = lml_value(X_, y_, from_log(cand), noise_std_);
            } catch (const FactorizationError&) {
                value = -std::numeric_limits<double>::infinity();
            }
            if (std::isfinite(value) && value >= current - opts.tolerance) {
                theta = cand;
                current = value;
                accepted = true;
                break;
            }
            step_size *= 0.5;
        }
        if (!accepted)
            break;
        if (current > best) {
            best = current;
            best_theta = theta;
        }
    }

    kernel_ = from_log(best_theta);
    kernel_.validate(dim_);
    invalidate();
    refresh();
    return best;
}

} // namespace sgrl::gp

#pragma once

#include "sgrl/gp/dataset.hpp"
#include "sgrl/gp/kernel.hpp"

#include <utility>

namespace sgrl::gp {

// Information capacity of the data set under the kernel:
//
//   gamma_n = 1/2 * sum_i log(1 + var_{i-1}(z_i) / noise^2)
//
// where var_{i-1}(z_i) is the noisy posterior variance at z_i after
// conditioning on the first i-1 points.  Equal to
// 1/2 * log det(I + noise^-2 K) and therefore independent of point order.
// Empty data gives 0.
double info_capacity(const Dataset& data, const KernelParams& kernel, double noise_std);

// Estimated RKHS norm of the latent function from the observed targets,
// sqrt(y^T K^-1 y) under the noise-free Gram matrix, clamped below by
// `floor`.  Empty data gives exactly `floor`.
double rkhs_bound(const Dataset& data, const KernelParams& kernel, double floor);

enum class BetaMode { Fixed, Online };

struct BetaConfig {
    BetaMode mode = BetaMode::Online;
    double fixed_value = 2.0; // used only in Fixed mode
    double delta = 0.1;       // confidence level for Online mode
    double rkhs_floor = 1.0;  // lower clamp for the RKHS norm estimate
};

// Confidence-interval scale.  Fixed mode returns fixed_value.  Online mode
// returns
//
//   beta = rkhs_bound + 4 * noise * sqrt(gamma + 1 + ln(2 / delta))
//
// with gamma = info_capacity over the current data.
double beta(const Dataset& data, const KernelParams& kernel, double noise_std,
            const BetaConfig& config);

// Lower/upper confidence bounds from a posterior mean and variance:
// mean -/+ beta * sqrt(variance).
std::pair<double, double> bounds(double mean, double variance, double beta);

} // namespace sgrl::gp

#pragma once

#include "sgrl/gp/dataset.hpp"
#include "sgrl/gp/kernel.hpp"

#include <Eigen/Dense>

namespace sgrl::gp {

// Kernel linear-independence score of every point against the rest of the
// set.  Score i is the conditional prior variance of point i given all other
// points under the noise-free kernel:
//
//   phi_i = k(z_i, z_i) - k_i^T K_{-i}^-1 k_i = 1 / ((K + jI)^-1)_ii - j
//
// where j is whatever diagonal jitter the factorization needed (0 when the
// Gram matrix is well conditioned).  Low score means the point is nearly a
// linear combination of the others in feature space and carries little new
// information.
Eigen::VectorXd independence_scores(const Dataset& data, const KernelParams& kernel);

// Repeatedly drop the point with the lowest independence score until the set
// is within capacity.  Scores are recomputed after every removal; ties break
// toward the lowest index.  Relative order of survivors is preserved.
// Returns the number of points removed.
Eigen::Index evict_to_capacity(Dataset& data, const KernelParams& kernel,
                               Eigen::Index capacity);

// Remove near-duplicate points via column-pivoted QR on the Gram matrix:
// a point whose pivoted diagonal entry |R_jj| falls below
// rel_threshold * |R_00| is redundant.  Applied repeatedly until no more
// points qualify, so the operation is idempotent.  At least one point always
// survives.  Relative order of survivors is preserved.  Returns the number
// of points removed.
Eigen::Index remove_correlated(Dataset& data, const KernelParams& kernel,
                               double rel_threshold = 1e-8);

} // namespace sgrl::gp

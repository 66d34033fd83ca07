#pragma once

#include <cstdint>
#include <iosfwd>

namespace sgrl {

// Run the built-in numerical self-checks of the GP stack on randomly
// generated problems: posterior against dense inversion, analytic gradients
// against finite differences, the marginal-likelihood gradient, the
// information-capacity identity, independence scores against leave-one-out
// conditioning, and batch/single query agreement.
//
// Writes a JSON report to json_out and progress lines to human_out.  Returns
// 0 when every check passes, 1 otherwise.  inject_fault deliberately skews
// one comparison so the failure path itself can be exercised.
int run_gp_selftest(int trials, std::uint64_t seed, bool inject_fault,
                    std::ostream& json_out, std::ostream& human_out);

} // namespace sgrl

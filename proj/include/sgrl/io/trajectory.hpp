#pragma once

#include "sgrl/rl/replay.hpp"

#include <string>
#include <vector>

namespace sgrl::io {

// Transition log CSV.  Header and column order are fixed:
//   s0,s1,a0,r,c,sn0,sn1,done
// One row per transition; floats carry full round-trip precision, done is
// 0 or 1.  Only 2-dimensional states with scalar actions are supported,
// matching the built-in environment.
void write_trajectory(const std::string& path, const std::vector<rl::Transition>& transitions);

// Throws ParseError on a missing file, wrong header, or malformed row.
std::vector<rl::Transition> read_trajectory(const std::string& path);

} // namespace sgrl::io

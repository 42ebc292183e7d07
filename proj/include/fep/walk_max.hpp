#pragma once

#include <cstdint>
#include <vector>

namespace fep {

// Law of M(L), the maximum over [0, L] of a simple symmetric random walk
// started at 0.  By reflection, P(M(L) = n) = P(W_L = n) when L - n is even
// and P(W_L = n+1) otherwise.
struct WalkMaxLaw {
    uint64_t L = 0;
    std::vector<double> pmf; // index n = 0..L
};

/// exact-as-doubles for L <= ~60, ratio/log-gamma route beyond; L <= 1e6
WalkMaxLaw walk_max_pmf(uint64_t L);

/// E[M(L)^2]; for odd L the closed form E(W^2) - E|W| + (1 - P(W=0))/2 is
/// cross-checked against direct summation to 1e-10 relative
double walk_max_second_moment(uint64_t L);

/// oracle: enumerate all 2^L walks; L <= 20
WalkMaxLaw walk_max_bruteforce(int L);

/// Kolmogorov-Smirnov distance between M(L)/sqrt(L) and |N(0,1)|
double half_normal_distance(uint64_t L);

} // namespace fep

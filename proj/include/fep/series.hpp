#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace fep {

using birational = boost::multiprecision::cpp_rational;

// Truncated two-point function g(k) = E[eta(j) eta(j+k)] - rho^2 of the
// frozen measure, extracted from its generating function
//   G(z) = z (sqrt(1 - z^2 (1-4d^2)) - 2d)^2 / (4 (z-1)(z+1)^2)
// by power-series long division.  Prefix sums make the window variance an
// O(1) lookup.
struct CorrelationTable {
    double delta = 0, rho = 0, zstar = 0;
    uint32_t K = 0;
    std::vector<double> g;       // index 1..K, g[0] = 0
    std::vector<double> sum_all; // sum_{j<=k} g[j]
    std::vector<double> sum_odd; // sum over odd j <= k
    std::vector<double> sum_jg;  // sum_{j<=k} j g[j]
};

/// series coefficients to lag K; K <= 1e6
CorrelationTable correlations_by_series(double delta, uint32_t K);

/// g(k) for odd k via the contour integral over the branch cut; delta > 0
double correlation_by_integral(double delta, uint32_t k);

// Var(N(L)) under the frozen measure.  Both the full double-sum form
// rho(1-rho)L + 2 sum_{k<L}(L-k)g(k) and the odd-lag reduced form are
// evaluated and must agree to 1e-9 relative; returns the reduced form.
double exact_variance(const CorrelationTable& table, uint64_t L);

// Convenience: builds a table of min(L-1, series_terms_needed(delta)) lags.
// Past the cutoff the geometric bound |g(2j+1)| <= rho^2 (1-4d^2)^j puts the
// discarded tail below 1e-12 of the result.
double exact_variance(double delta, uint64_t L);

/// lag cutoff beyond which the correlation tail cannot move the variance at
/// the 1e-12 level; UINT32_MAX at delta = 0 (no decay)
uint32_t series_terms_needed(double delta);

/// exact-rational long division, the gold reference; K <= 64
std::vector<birational> correlations_exact(double delta, int K);

/// CSV columns: k,g,paired_residual,bound_margin
void correlation_csv(const CorrelationTable& table, std::ostream& os);

} // namespace fep

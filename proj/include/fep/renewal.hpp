#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fep/bitarray.hpp"
#include "fep/rng.hpp"

namespace fep {

using bigint = boost::multiprecision::cpp_int;

/// n-th Catalan number, exact.  n <= 5000.
bigint catalan(int n);

// Raised when the inverse-CDF table would outgrow its hard cap; means the
// density is too close to 1/2... i.e. delta too small for exact sampling.
struct TableCapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Distribution of the half-gap X between renewal events in the frozen state:
// P(X = n) = C_n rho^n (1-rho)^(n+1), rho = 1/2 - delta.  The full inter-event
// distance is Y = 2X + 1.  Tables grow on demand; probabilities come from the
// Catalan ratio recurrence p_{n+1} = p_n * rho(1-rho) * 2(2n+1)/(n+2).
class GapLaw {
public:
    explicit GapLaw(double delta, size_t hard_cap = 100'000'000);

    double delta() const { return delta_; }
    double rho() const { return rho_; }

    /// P(X = n)
    double pmf(uint64_t n);
    /// P(X <= n)
    double cdf(uint64_t n);
    /// P(X > n)
    double tail(uint64_t n);
    /// q_delta(L) = P(Y > L) = P(X > floor((L-1)/2)); q(0) = 1
    double gap_tail(uint64_t L);

    /// inverse-CDF draw of X
    uint64_t sample(CounterRng& rng);
    /// draw of X conditioned on Y = 2X+1 <= bound; nullopt when Y > bound.
    /// Never grows the table past the bound.
    std::optional<uint64_t> sample_gap_within(uint64_t bound, CounterRng& rng);

    /// mean of Y = 2X+1 by direct summation to the adaptive cutoff
    double mean_distance();

    size_t table_size() const { return pmf_.size(); }

private:
    void ensure(size_t n); // table covers indices 0..n
    static double tail_half_exact(uint64_t n); // delta = 0: P(X > n) closed form

    double delta_, rho_, step_; // step_ = rho(1-rho)
    size_t cap_;
    std::vector<double> pmf_, cdf_;
};

// First renewal event position F >= 1 under the unconditioned measure:
// p_delta(l) = 2 delta q_delta(l-1).  Requires delta > 0.
class FirstRenewalLaw {
public:
    explicit FirstRenewalLaw(double delta, size_t hard_cap = 100'000'000);

    double delta() const { return delta_; }
    double q(uint64_t L) { return gap_.gap_tail(L); }
    /// p_delta(l), l >= 1
    double pmf(uint64_t l);
    /// inverse-CDF draw of F
    uint64_t sample(CounterRng& rng);

    GapLaw& gap() { return gap_; }

private:
    void ensure(size_t l);

    double delta_;
    size_t cap_;
    GapLaw gap_;
    std::vector<double> cdfF_; // cdfF_[l-1] = P(F <= l)
};

// A window of L sites of the frozen measure with one site of left context.
// Site i (1-based) is flagged as a renewal event when sites i-1 and i are
// both empty; i = 1 uses the left context.
struct WindowSample {
    double delta = 0;
    uint64_t length = 0;
    bool left_context = false;
    BitArray occupancy;     // bit i0 = site i0+1
    BitArray renewal_flags;
    std::optional<uint64_t> first_renewal_position; // 1-based; nullopt = beyond window

    bool flag(uint64_t site) const { return renewal_flags.get(site - 1); }
    bool occupied(uint64_t site) const { return occupancy.get(site - 1); }
};

// Compute the flag bits of a linear window from occupancy + left context.
uint64_t scan_renewal_flags(const BitArray& occ, bool left_context, BitArray& flags);

struct WindowSampler {
    // delta = 0 draws one fair parity bit per window (the two alternating
    // configurations); delta > 0 uses the first-renewal + i.i.d.-gap
    // construction.
    explicit WindowSampler(double delta, size_t hard_cap = 100'000'000);
    WindowSample sample(uint64_t L, CounterRng& rng);

    double delta;
    std::optional<FirstRenewalLaw> first; // engaged iff delta > 0
};

/// number of renewal events in J_L under the renewal-conditioned measure
/// (a renewal event sits at the origin; gaps i.i.d. Y)
uint64_t sample_conditioned_renewal_count(GapLaw& law, uint64_t L, CounterRng& rng);

// Empirical check of P(N_ren(L) >= n) <= (1 - q_delta(L))^n against
// `samples` draws from the conditioned measure, for n = 1..n_max, allowing
// 3 binomial standard errors.
bool renewal_count_tail_bound_check(double delta, uint64_t L, int n_max,
                                    size_t samples, CounterRng& rng);

} // namespace fep

#include "fep/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fep {

bigint catalan(int n) {
    if (n < 0 || n > 5000) throw std::invalid_argument("catalan: n out of range [0,5000]");
    bigint c = 1;
    for (int i = 0; i < n; ++i) {
        c *= 2 * (2 * i + 1);
        c /= i + 2; // exact: C_{i+1} = C_i * 2(2i+1)/(i+2)
    }
    return c;
}

GapLaw::GapLaw(double delta, size_t hard_cap)
    : delta_(delta), rho_(0.5 - delta), step_(rho_ * (1.0 - rho_)), cap_(hard_cap) {
    if (!(delta >= 0.0 && delta < 0.5)) throw std::invalid_argument("GapLaw: delta in [0, 1/2)");
    pmf_.push_back(1.0 - rho_);
    cdf_.push_back(1.0 - rho_);
}

void GapLaw::ensure(size_t n) {
    if (n < pmf_.size()) return;
    if (n + 1 > cap_)
        throw TableCapError("gap table cap exceeded: delta too small for exact sampling");
    pmf_.reserve(n + 1);
    cdf_.reserve(n + 1);
    long double acc = cdf_.back();
    while (pmf_.size() <= n) {
        size_t m = pmf_.size() - 1;
        double next = pmf_.back() * step_ * 2.0 * (2.0 * m + 1.0) / (m + 2.0);
        pmf_.push_back(next);
        acc += next;
        cdf_.push_back(static_cast<double>(std::min(acc, 1.0L)));
    }
}

double GapLaw::pmf(uint64_t n) {
    ensure(n);
    return pmf_[n];
}

double GapLaw::cdf(uint64_t n) {
    ensure(n);
    return cdf_[n];
}

double GapLaw::tail_half_exact(uint64_t n) {
    // P(X > n) at delta = 0 equals binom(2n+1, n) 2^-(2n+1)
    double a = static_cast<double>(n);
    return std::exp(std::lgamma(2 * a + 2) - std::lgamma(a + 1) - std::lgamma(a + 2) -
                    (2 * a + 1) * std::numbers::ln2_v<double>);
}

double GapLaw::tail(uint64_t n) {
    if (delta_ == 0.0 && n >= pmf_.size()) return tail_half_exact(n);
    ensure(n);
    return std::max(0.0, 1.0 - cdf_[n]);
}

double GapLaw::gap_tail(uint64_t L) {
    if (L == 0) return 1.0; // Y >= 1 always
    return tail((L - 1) / 2);
}

uint64_t GapLaw::sample(CounterRng& rng) {
    double u = rng.next_unit();
    if (u >= cdf_.back()) {
        if (delta_ == 0.0) {
            // Heavy tail: invert the exact closed-form tail instead of
            // growing the table.  P(X <= n) >= u  <=>  tail(n) <= 1-u.
            double t = 1.0 - u;
            if (cdf_.size() < 4096) ensure(4095);
            if (u < cdf_.back()) {
                // fall through to the table search below
            } else {
                uint64_t lo = cdf_.size() - 1, hi = lo;
                double span = tail_half_exact(lo);
                while (span > t) {
                    lo = hi;
                    if (hi > (1ull << 59)) break; // truncates ~1e-10 of the mass
                    hi *= 2;
                    span = tail_half_exact(hi);
                }
                while (lo + 1 < hi) {
                    uint64_t mid = lo + (hi - lo) / 2;
                    if (tail_half_exact(mid) > t) lo = mid; else hi = mid;
                }
                return hi;
            }
        } else {
            while (u >= cdf_.back() && 1.0 - cdf_.back() > 1e-18)
                ensure(pmf_.size() * 2);
        }
    }
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<uint64_t>(it - cdf_.begin());
}

std::optional<uint64_t> GapLaw::sample_gap_within(uint64_t bound, CounterRng& rng) {
    if (bound == 0) return std::nullopt;
    uint64_t mx = (bound - 1) / 2;
    double thresh = cdf(mx); // P(Y <= bound)
    double u = rng.next_unit();
    if (u >= thresh) return std::nullopt;
    auto it = std::upper_bound(cdf_.begin(), cdf_.begin() + mx + 1, u);
    return static_cast<uint64_t>(it - cdf_.begin());
}

double GapLaw::mean_distance() {
    if (delta_ == 0.0) throw std::invalid_argument("mean_distance: infinite at delta = 0");
    long double sum = 0.0L;
    uint64_t n = 0;
    for (;;) {
        double p = pmf(n);
        sum += static_cast<long double>(2 * n + 1) * p;
        // remaining mass decays like (1-4d^2)^n; stop once it cannot matter
        if (n > 16 && p * (2.0 * n + 1.0) < 1e-18L * sum && tail(n) < 1e-15) break;
        ++n;
    }
    return static_cast<double>(sum);
}

FirstRenewalLaw::FirstRenewalLaw(double delta, size_t hard_cap)
    : delta_(delta), cap_(hard_cap), gap_(delta, hard_cap) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("FirstRenewalLaw: requires 0 < delta < 1/2");
}

double FirstRenewalLaw::pmf(uint64_t l) {
    if (l == 0) throw std::invalid_argument("first renewal position starts at 1");
    return 2.0 * delta_ * gap_.gap_tail(l - 1);
}

void FirstRenewalLaw::ensure(size_t l) {
    if (l <= cdfF_.size()) return;
    if (l > cap_) throw TableCapError("first-renewal table cap exceeded");
    long double acc = cdfF_.empty() ? 0.0L : cdfF_.back();
    while (cdfF_.size() < l) {
        uint64_t next = cdfF_.size() + 1;
        acc += pmf(next);
        cdfF_.push_back(static_cast<double>(std::min(acc, 1.0L)));
    }
}

uint64_t FirstRenewalLaw::sample(CounterRng& rng) {
    double u = rng.next_unit();
    if (cdfF_.empty()) ensure(64);
    while (u >= cdfF_.back() && 1.0 - cdfF_.back() > 1e-18)
        ensure(cdfF_.size() * 2);
    auto it = std::upper_bound(cdfF_.begin(), cdfF_.end(), u);
    if (it == cdfF_.end()) --it;
    return static_cast<uint64_t>(it - cdfF_.begin()) + 1;
}

uint64_t scan_renewal_flags(const BitArray& occ, bool left_context, BitArray& flags) {
    const size_t W = occ.word_count();
    const uint64_t* src = occ.words();
    uint64_t* dst = flags.words();
    uint64_t count = 0;
    for (size_t w = 0; w < W; ++w) {
        uint64_t cur = src[w];
        uint64_t lnb = (cur << 1) | (w ? (src[w - 1] >> 63) : static_cast<uint64_t>(left_context));
        uint64_t f = ~cur & ~lnb;
        if (w == W - 1) f &= occ.tail_mask();
        dst[w] = f;
        count += std::popcount(f);
    }
    return count;
}

WindowSampler::WindowSampler(double d, size_t hard_cap) : delta(d) {
    if (!(d >= 0.0 && d < 0.5)) throw std::invalid_argument("WindowSampler: delta in [0, 1/2)");
    if (d > 0.0) first.emplace(d, hard_cap);
}

WindowSample WindowSampler::sample(uint64_t L, CounterRng& rng) {
    if (L == 0) throw std::invalid_argument("window length must be positive");
    WindowSample ws;
    ws.delta = delta;
    ws.length = L;
    ws.occupancy = BitArray(L);
    ws.renewal_flags = BitArray(L);

    if (delta == 0.0) {
        // nu_{1/2}: fair mixture of the two alternating configurations
        bool odd_sites = rng.next_below(2) == 1; // occupied sites have odd index
        ws.left_context = !odd_sites;            // site 0
        uint64_t j0 = odd_sites ? 1 : 2;         // first occupied site in 1..L
        if (j0 <= L) set_alternating(ws.occupancy, j0 - 1, (L - j0) / 2 + 1);
        ws.first_renewal_position = std::nullopt;
        return ws;
    }

    uint64_t F = first->sample(rng);
    ws.left_context = (F % 2 == 0); // site 0 occupied iff F even
    // sites j < F alternate, occupied iff F - j is even
    uint64_t j0 = (F % 2 == 0) ? 2 : 1;
    uint64_t jmax = std::min(F - 1, L);
    if (j0 <= jmax) set_alternating(ws.occupancy, j0 - 1, (jmax - j0) / 2 + 1);

    if (F <= L) {
        ws.first_renewal_position = F;
        GapLaw& gap = first->gap();
        uint64_t pos = F; // renewal site; stays empty
        while (pos < L) {
            auto x = gap.sample_gap_within(L - pos, rng);
            if (!x) {
                // next renewal beyond the window: the visible remainder is
                // the head of an interior block, alternating from pos+1
                uint64_t rem = L - pos;
                set_alternating(ws.occupancy, pos, (rem + 1) / 2);
                break;
            }
            if (*x > 0) set_alternating(ws.occupancy, pos, *x);
            pos += 2 * *x + 1;
        }
    }
    scan_renewal_flags(ws.occupancy, ws.left_context, ws.renewal_flags);
    return ws;
}

uint64_t sample_conditioned_renewal_count(GapLaw& law, uint64_t L, CounterRng& rng) {
    uint64_t pos = 0, count = 0;
    while (pos < L) {
        auto x = law.sample_gap_within(L - pos, rng);
        if (!x) break;
        pos += 2 * *x + 1;
        ++count;
    }
    return count;
}

bool renewal_count_tail_bound_check(double delta, uint64_t L, int n_max,
                                    size_t samples, CounterRng& rng) {
    GapLaw law(delta);
    std::vector<uint64_t> ge(n_max + 1, 0); // ge[n] = #draws with count >= n
    for (size_t s = 0; s < samples; ++s) {
        uint64_t c = sample_conditioned_renewal_count(law, L, rng);
        uint64_t top = std::min<uint64_t>(c, n_max);
        for (uint64_t n = 1; n <= top; ++n) ++ge[n];
    }
    double q = law.gap_tail(L);
    for (int n = 1; n <= n_max; ++n) {
        double phat = static_cast<double>(ge[n]) / samples;
        double bound = std::pow(1.0 - q, n);
        double se = std::sqrt(phat * (1.0 - phat) / samples);
        if (phat > bound + 3.0 * se + 1e-12) return false;
    }
    return true;
}

} // namespace fep

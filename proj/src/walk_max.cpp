#include "fep/walk_max.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fep {
namespace {

// P(W_L = m) for m = 0..L (zero where L-m is odd)
std::vector<double> walk_pmf(uint64_t L) {
    std::vector<double> pw(L + 1, 0.0);
    uint64_t m0 = L % 2;
    uint64_t k0 = (L + m0) / 2;
    double p;
    if (L <= 50) {
        // exact in doubles: small binomial times a power of two
        uint64_t b = 1;
        for (uint64_t k = 1; k <= k0; ++k) b = b * (L - k + 1) / k;
        p = static_cast<double>(b) * std::ldexp(1.0, -static_cast<int>(L));
    } else {
        double dl = static_cast<double>(L), dk = static_cast<double>(k0);
        p = std::exp(std::lgamma(dl + 1) - std::lgamma(dk + 1) - std::lgamma(dl - dk + 1) -
                     dl * std::numbers::ln2_v<double>);
    }
    for (uint64_t m = m0; m <= L; m += 2) {
        pw[m] = p;
        uint64_t k = (L + m) / 2;
        p *= static_cast<double>(L - k) / static_cast<double>(k + 1);
    }
    return pw;
}

struct Kahan {
    double s = 0, c = 0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

} // namespace

WalkMaxLaw walk_max_pmf(uint64_t L) {
    if (L < 1 || L > 1'000'000) throw std::invalid_argument("walk_max_pmf: L in [1, 1e6]");
    std::vector<double> pw = walk_pmf(L);
    WalkMaxLaw law;
    law.L = L;
    law.pmf.assign(L + 1, 0.0);
    for (uint64_t n = 0; n <= L; ++n)
        law.pmf[n] = ((L - n) % 2 == 0) ? pw[n] : pw[n + 1];
    return law;
}

double walk_max_second_moment(uint64_t L) {
    if (L < 1 || L > 1'000'000) throw std::invalid_argument("walk_max_second_moment: L in [1, 1e6]");
    std::vector<double> pw = walk_pmf(L);
    WalkMaxLaw law = walk_max_pmf(L);
    Kahan direct;
    for (uint64_t n = 1; n <= L; ++n)
        direct.add(static_cast<double>(n) * static_cast<double>(n) * law.pmf[n]);
    if (L % 2 == 1) {
        // E(W^2) - E|W| + (1 - P(W=0))/2, exact for odd L
        Kahan w2, wabs;
        for (uint64_t m = 1; m <= L; m += 2) {
            double dm = static_cast<double>(m);
            w2.add(2.0 * dm * dm * pw[m]);
            wabs.add(2.0 * dm * pw[m]);
        }
        double closed = w2.s - wabs.s + 0.5;
        if (std::abs(closed - direct.s) > 1e-10 * std::abs(direct.s))
            throw std::runtime_error("walk_max_second_moment: closed form and summation disagree");
    }
    return direct.s;
}

WalkMaxLaw walk_max_bruteforce(int L) {
    if (L < 1 || L > 20) throw std::invalid_argument("walk_max_bruteforce: L in [1, 20]");
    std::vector<uint64_t> count(L + 1, 0);
    const uint64_t total = 1ull << L;
    for (uint64_t walk = 0; walk < total; ++walk) {
        int pos = 0, best = 0;
        for (int s = 0; s < L; ++s) {
            pos += (walk >> s) & 1 ? 1 : -1;
            if (pos > best) best = pos;
        }
        ++count[best];
    }
    WalkMaxLaw law;
    law.L = static_cast<uint64_t>(L);
    law.pmf.assign(L + 1, 0.0);
    for (int n = 0; n <= L; ++n)
        law.pmf[n] = static_cast<double>(count[n]) * std::ldexp(1.0, -L);
    return law;
}

double half_normal_distance(uint64_t L) {
    WalkMaxLaw law = walk_max_pmf(L);
    const double iq = 1.0 / std::sqrt(static_cast<double>(L));
    long double cdf = 0.0L;
    double worst = 0.0;
    for (uint64_t n = 0; n <= L; ++n) {
        double ref = std::erf(static_cast<double>(n) * iq / std::numbers::sqrt2_v<double>);
        double lo = std::abs(static_cast<double>(cdf) - ref);
        cdf += law.pmf[n];
        double hi = std::abs(static_cast<double>(cdf) - ref);
        worst = std::max({worst, lo, hi});
        if (cdf > 1.0L - 1e-14L && n > 4 * static_cast<uint64_t>(std::sqrt(double(L)))) break;
    }
    return worst;
}

} // namespace fep

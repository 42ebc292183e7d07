#include "fep/series.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace fep {
namespace {

// minimal double-double: enough to keep the three-term division recurrence
// from accumulating rounding in its neutral modes (the divisor has roots on
// the unit circle, so plain doubles would let errors persist and grow)
struct dd {
    double hi = 0, lo = 0;
};

inline dd two_sum(double a, double b) {
    double s = a + b;
    double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline dd dd_add(dd a, dd b) {
    dd s = two_sum(a.hi, b.hi);
    double lo = s.lo + a.lo + b.lo;
    double hi = s.hi + lo;
    return {hi, lo - (hi - s.hi)};
}

inline dd dd_neg(dd a) { return {-a.hi, -a.lo}; }

// numerator coefficients of z[(1+4d^2) - c z^2 - 4d sqrt(1 - c z^2)]:
// odd lags only; n1 = (1-2d)^2, n3 = -c(1-2d), n_{2j+1} = -4d b_j c^j
class NumeratorCoeffs {
public:
    explicit NumeratorCoeffs(double delta)
        : delta_(delta), c_(1.0 - 4.0 * delta * delta), w_(-0.5 * c_) {}

    double at(uint32_t k) {
        if (k % 2 == 0) return 0.0;
        if (k == 1) return (1.0 - 2.0 * delta_) * (1.0 - 2.0 * delta_);
        if (k == 3) return -c_ * (1.0 - 2.0 * delta_);
        uint32_t j = (k - 1) / 2;
        while (j_ < j) {
            // b_{j+1} = b_j (2j-1) / (2j+2), tracked as w = b_j c^j
            w_ *= c_ * (2.0 * j_ - 1.0) / (2.0 * j_ + 2.0);
            ++j_;
        }
        return -4.0 * delta_ * w_;
    }

private:
    double delta_, c_, w_;
    uint32_t j_ = 1;
};

struct Kahan {
    double s = 0, c = 0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

double lcosh(double t) { return t > 30 ? t - std::numbers::ln2_v<double> : std::log(std::cosh(t)); }
double lsinh(double t) { return t > 30 ? t - std::numbers::ln2_v<double> : std::log(std::sinh(t)); }

// Gauss-Legendre nodes/weights on [-1,1], Newton on the recurrence
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int n) : x(n), w(n) {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double xi = std::cos(std::numbers::pi_v<double> * (i + 0.75) / (n + 0.5));
            double dp = 0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1, p1 = xi;
                for (int j = 2; j <= n; ++j) {
                    double p2 = ((2 * j - 1) * xi * p1 - (j - 1) * p0) / j;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (xi * p1 - p0) / (xi * xi - 1);
                double step = p1 / dp;
                xi -= step;
                if (std::abs(step) < 1e-15) break;
            }
            x[i] = -xi;
            x[n - 1 - i] = xi;
            w[i] = w[n - 1 - i] = 2.0 / ((1 - xi * xi) * dp * dp);
        }
    }
};

} // namespace

uint32_t series_terms_needed(double delta) {
    if (delta <= 0.0) return std::numeric_limits<uint32_t>::max();
    double c = 1.0 - 4.0 * delta * delta;
    double rho = 0.5 - delta;
    // c^(K/2) rho^2/(1-c) below 1e-12 of rho(1-rho) kills the tail of both
    // variance forms for every L
    double target = 1e-14 * (1.0 - c) * (1.0 - rho) / rho;
    double k2 = std::log(target) / std::log(c);
    if (k2 < 8) k2 = 8;
    return static_cast<uint32_t>(2.0 * k2) + 4;
}

CorrelationTable correlations_by_series(double delta, uint32_t K) {
    if (!(delta >= 0.0 && delta < 0.5))
        throw std::invalid_argument("correlations_by_series: delta in [0, 1/2)");
    if (K < 1 || K > 1'000'000)
        throw std::invalid_argument("correlations_by_series: K in [1, 1e6]");
    CorrelationTable t;
    t.delta = delta;
    t.rho = 0.5 - delta;
    t.zstar = 1.0 / std::sqrt(1.0 - 4.0 * delta * delta);
    t.K = K;
    t.g.assign(K + 1, 0.0);
    t.sum_all.assign(K + 1, 0.0);
    t.sum_odd.assign(K + 1, 0.0);
    t.sum_jg.assign(K + 1, 0.0);

    NumeratorCoeffs num(delta);
    // divide by 4(z^3 + z^2 - z - 1): g_k = -n_k/4 - g_{k-1} + g_{k-2} + g_{k-3}
    dd gm1{}, gm2{}, gm3{};
    Kahan all, odd, jg;
    for (uint32_t k = 1; k <= K; ++k) {
        dd acc{-0.25 * num.at(k), 0.0};
        acc = dd_add(acc, dd_neg(gm1));
        acc = dd_add(acc, gm2);
        acc = dd_add(acc, gm3);
        gm3 = gm2;
        gm2 = gm1;
        gm1 = acc;
        double gk = acc.hi + acc.lo;
        t.g[k] = gk;
        all.add(gk);
        jg.add(static_cast<double>(k) * gk);
        if (k % 2 == 1) odd.add(gk);
        t.sum_all[k] = all.s;
        t.sum_odd[k] = odd.s;
        t.sum_jg[k] = jg.s;
    }
    return t;
}

double correlation_by_integral(double delta, uint32_t k) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("correlation_by_integral: requires 0 < delta < 1/2 "
                                    "(the cut endpoint hits (z^2-1)^2 at delta = 0)");
    if (k % 2 == 0) throw std::invalid_argument("correlation_by_integral: k must be odd");

    const double zs2 = 1.0 / (1.0 - 4.0 * delta * delta); // zstar^2
    const double lzs = 0.5 * std::log(zs2);
    // integrand after z = zstar cosh t:
    //   f(t) = sinh^2 t / (cosh^k t (zstar^2 cosh^2 t - 1)^2), in logs
    auto logf = [&](double t) {
        double lc = lcosh(t);
        double l2 = 2 * lzs + 2 * lc + std::log1p(-std::exp(-2 * lzs - 2 * lc));
        return 2 * lsinh(t) - static_cast<double>(k) * lc - 2 * l2;
    };
    auto f = [&](double t) { return t <= 0 ? 0.0 : std::exp(logf(t)); };

    // peak scan, then extend T until the e^{-(k+2)t} decay is exhausted
    double peak = -1e300;
    for (double t = 1.0 / 64; t <= 8; t *= 1.5) peak = std::max(peak, logf(t));
    double T = 8;
    while (logf(T) > peak - 60) T *= 1.5;

    static const GaussLegendre gl(16);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int panels = 4; panels <= 1 << 16; panels *= 2) {
        Kahan sum;
        double h = T / panels;
        for (int p = 0; p < panels; ++p) {
            double a = p * h, mid = a + h / 2, half = h / 2;
            for (int i = 0; i < 16; ++i) sum.add(gl.w[i] * f(mid + half * gl.x[i]) * half);
        }
        double I = sum.s;
        if (!std::isnan(prev) && std::abs(I - prev) <= 1e-13 * std::abs(I)) {
            prev = I;
            break;
        }
        prev = I;
    }
    return -(2.0 * delta / std::numbers::pi_v<double>) *
           std::exp((1.0 - static_cast<double>(k)) * lzs) * prev;
}

double exact_variance(const CorrelationTable& t, uint64_t L) {
    if (L < 1) throw std::invalid_argument("exact_variance: L >= 1");
    if (L - 1 > t.K) throw std::invalid_argument("exact_variance: table too short for L");
    const double base = t.rho * (1.0 - t.rho) * static_cast<double>(L);
    const uint64_t m = L - 1;
    double reduced = base + 2.0 * (m ? t.sum_odd[m] : 0.0);
    double dbl = base + 2.0 * (m ? (static_cast<double>(L) * t.sum_all[m] - t.sum_jg[m]) : 0.0);
    double tol = 1e-9 * std::max(1.0, std::abs(reduced));
    if (std::abs(reduced - dbl) > tol)
        throw std::runtime_error("exact_variance: double-sum and odd-lag forms disagree");
    return reduced;
}

double exact_variance(double delta, uint64_t L) {
    uint32_t need = series_terms_needed(delta);
    uint64_t K = std::min<uint64_t>(L > 1 ? L - 1 : 1, need);
    CorrelationTable t = correlations_by_series(delta, static_cast<uint32_t>(K));
    if (L - 1 <= t.K) return exact_variance(t, L);
    // truncated tail is below 1e-12 relative by the geometric bound; both
    // forms are evaluated over the same truncated table
    const double base = t.rho * (1.0 - t.rho) * static_cast<double>(L);
    double reduced = base + 2.0 * t.sum_odd[t.K];
    double dbl = base + 2.0 * (static_cast<double>(L) * t.sum_all[t.K] - t.sum_jg[t.K]);
    double tol = 1e-9 * std::max(1.0, std::abs(reduced));
    if (std::abs(reduced - dbl) > tol)
        throw std::runtime_error("exact_variance: double-sum and odd-lag forms disagree");
    return reduced;
}

std::vector<birational> correlations_exact(double delta, int K) {
    if (K < 1 || K > 64) throw std::invalid_argument("correlations_exact: K in [1, 64]");
    using R = birational;
    // exact rational value of the double
    int e = 0;
    double m = std::frexp(delta, &e); // delta = m 2^e, |m| in [0.5, 1)
    long long mi = static_cast<long long>(std::ldexp(m, 53));
    R d = R(mi);
    int shift = 53 - e;
    if (shift > 0) d /= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), shift);
    else d *= boost::multiprecision::pow(boost::multiprecision::cpp_int(2), -shift);

    R c = 1 - 4 * d * d;
    std::vector<R> n(K + 1, R(0));
    if (K >= 1) n[1] = (1 - 2 * d) * (1 - 2 * d);
    if (K >= 3) n[3] = -c * (1 - 2 * d);
    R b = R(-1, 2), w = b * c; // b_1 c
    for (int j = 2; 2 * j + 1 <= K; ++j) {
        w = w * c * R(2 * (j - 1) - 1, 2 * (j - 1) + 2);
        n[2 * j + 1] = -4 * d * w;
    }
    std::vector<R> g(K + 1, R(0));
    for (int k = 1; k <= K; ++k) {
        R acc = n[k];
        acc += 4 * g[k - 1];
        if (k >= 2) acc -= 4 * g[k - 2];
        if (k >= 3) acc -= 4 * g[k - 3];
        g[k] = acc / -4;
    }
    return g;
}

void correlation_csv(const CorrelationTable& t, std::ostream& os) {
    os << "k,g,paired_residual,bound_margin\n";
    const double c = 1.0 - 4.0 * t.delta * t.delta;
    char buf[256];
    double cj = 1.0;
    for (uint32_t k = 1; k <= t.K; ++k) {
        double resid = std::numeric_limits<double>::quiet_NaN();
        if (k % 2 == 1 && k + 1 <= t.K) resid = t.g[k] + t.g[k + 1];
        else if (k % 2 == 0) resid = t.g[k - 1] + t.g[k];
        if (k % 2 == 1) {
            double margin = t.rho * t.rho * cj + 1e-12 - std::abs(t.g[k]);
            std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%.17g\n", k, t.g[k], resid, margin);
            cj *= c;
        } else {
            std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,\n", k, t.g[k], resid);
        }
        os << buf;
    }
}

} // namespace fep

#include "fep/estimators.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fep/series.hpp"

namespace fep {
namespace {

enum class SiteClass { One, Zero, Hat }; // occupied / empty after a 1 / renewal

SiteClass classify(bool occ, bool flag) { return occ ? SiteClass::One : (flag ? SiteClass::Hat : SiteClass::Zero); }

double ld(__int128 v) { return static_cast<double>(static_cast<long double>(v)); }

} // namespace

Decomposition decompose(const WindowSample& w) {
    const uint64_t L = w.length;
    if (L == 0 || w.occupancy.size() != L || w.renewal_flags.size() != L)
        throw std::invalid_argument("decompose: malformed window");

    // support check: no two adjacent occupied sites including the context
    {
        const uint64_t* oc = w.occupancy.words();
        for (size_t k = 0; k < w.occupancy.word_count(); ++k) {
            uint64_t lnb =
                (oc[k] << 1) | (k ? (oc[k - 1] >> 63) : static_cast<uint64_t>(w.left_context));
            if (oc[k] & lnb) throw std::invalid_argument("decompose: adjacent occupied pair");
        }
    }

    Decomposition d;
    d.n_particles = w.occupancy.count();
    d.n_renewals = w.renewal_flags.count();

    if ((L - d.n_renewals) % 2 == 0) {
        d.sigma = 0;
    } else {
        SiteClass c1 = classify(w.occupied(1), w.flag(1));
        SiteClass cL = classify(w.occupied(L), w.flag(L));
        if (c1 == SiteClass::Zero && (cL == SiteClass::Zero || cL == SiteClass::Hat))
            d.sigma = +1;
        else if (cL == SiteClass::One && (c1 == SiteClass::Hat || c1 == SiteClass::One))
            d.sigma = -1;
        else
            throw std::invalid_argument("decompose: endpoint classes inconsistent with parity");
    }

    // the identity itself is exact; a failure means corrupted input
    if (2 * static_cast<int64_t>(d.n_particles) !=
        static_cast<int64_t>(L) - static_cast<int64_t>(d.n_renewals) - d.sigma)
        throw std::invalid_argument("decompose: count identity violated");
    return d;
}

void WindowStats::add(const Decomposition& d) {
    ++n;
    __int128 N = d.n_particles, R = d.n_renewals;
    s_n += N;
    s_n2 += N * N;
    s_n3 += N * N * N;
    s_n4 += N * N * N * N;
    s_r += R;
    s_r2 += R * R;
    s_r3 += R * R * R;
    s_r4 += R * R * R * R;
    s_rs += R * d.sigma;
    if (d.sigma < 0) ++sig_neg;
    else if (d.sigma > 0) ++sig_pos;
    else ++sig_zero;
}

void WindowStats::merge(const WindowStats& o) {
    if (n == 0) { delta = o.delta; L = o.L; }
    n += o.n;
    s_n += o.s_n; s_n2 += o.s_n2; s_n3 += o.s_n3; s_n4 += o.s_n4;
    s_r += o.s_r; s_r2 += o.s_r2; s_r3 += o.s_r3; s_r4 += o.s_r4;
    s_rs += o.s_rs;
    sig_neg += o.sig_neg; sig_zero += o.sig_zero; sig_pos += o.sig_pos;
}

namespace {

struct CentralMoments {
    double mean, m2, m4;
};

CentralMoments central(__int128 s1, __int128 s2, __int128 s3, __int128 s4, uint64_t n) {
    long double dn = static_cast<long double>(n);
    long double e1 = static_cast<long double>(s1) / dn;
    long double e2 = static_cast<long double>(s2) / dn;
    long double e3 = static_cast<long double>(s3) / dn;
    long double e4 = static_cast<long double>(s4) / dn;
    long double m2 = e2 - e1 * e1;
    long double m4 = e4 - 4 * e1 * e3 + 6 * e1 * e1 * e2 - 3 * e1 * e1 * e1 * e1;
    return {static_cast<double>(e1), static_cast<double>(m2), static_cast<double>(m4)};
}

} // namespace

double WindowStats::mean_N() const { return ld(s_n) / static_cast<double>(n); }
double WindowStats::var_N() const { return central(s_n, s_n2, s_n3, s_n4, n).m2; }
double WindowStats::var_N_stderr() const {
    auto c = central(s_n, s_n2, s_n3, s_n4, n);
    return std::sqrt(std::max(0.0, c.m4 - c.m2 * c.m2) / static_cast<double>(n));
}
double WindowStats::mean_Nren() const { return ld(s_r) / static_cast<double>(n); }
double WindowStats::mean_Nren_stderr() const {
    return std::sqrt(std::max(0.0, var_Nren()) / static_cast<double>(n));
}
double WindowStats::var_Nren() const { return central(s_r, s_r2, s_r3, s_r4, n).m2; }
double WindowStats::var_Nren_stderr() const {
    auto c = central(s_r, s_r2, s_r3, s_r4, n);
    return std::sqrt(std::max(0.0, c.m4 - c.m2 * c.m2) / static_cast<double>(n));
}
double WindowStats::mean_sigma() const {
    return (static_cast<double>(sig_pos) - static_cast<double>(sig_neg)) / static_cast<double>(n);
}
double WindowStats::p_sigma_nonzero() const {
    return static_cast<double>(n - sig_zero) / static_cast<double>(n);
}
double WindowStats::p_sigma_nonzero_stderr() const {
    double p = p_sigma_nonzero();
    return std::sqrt(p * (1 - p) / static_cast<double>(n));
}
double WindowStats::cov_Nren_sigma() const {
    // E(R s) - E(R) E(s)
    return ld(s_rs) / static_cast<double>(n) - mean_Nren() * mean_sigma();
}
double WindowStats::split_variance() const { return 0.25 * (var_Nren() + p_sigma_nonzero()); }
double WindowStats::split_variance_stderr() const {
    double a = var_Nren_stderr(), b = p_sigma_nonzero_stderr();
    return 0.25 * std::sqrt(a * a + b * b);
}

WindowStats accumulate(const std::vector<WindowSample>& windows) {
    if (windows.size() < 2) throw std::invalid_argument("accumulate: need at least 2 windows");
    WindowStats st;
    st.delta = windows.front().delta;
    st.L = windows.front().length;
    for (const auto& w : windows) {
        if (w.delta != st.delta || w.length != st.L)
            throw std::invalid_argument("accumulate: mixed (delta, L)");
        st.add(decompose(w));
    }
    return st;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::Plateau: return "plateau";
        case Regime::Intermediate: return "intermediate";
        case Regime::Linear: return "linear";
        default: return "crossover";
    }
}

RegimePrediction predict_variance(double delta, uint64_t L, double margin_s, double margin_l) {
    if (!(delta >= 0.0 && delta < 0.5))
        throw std::invalid_argument("predict_variance: delta in [0, 1/2)");
    if (L < 1) throw std::invalid_argument("predict_variance: L >= 1");
    RegimePrediction p;
    p.delta = delta;
    p.L = L;
    p.parity = (L % 2 == 1) ? Parity::Odd : Parity::Even;
    p.margin_s = margin_s;
    p.margin_l = margin_l;
    const bool odd = p.parity == Parity::Odd;
    const double inf = std::numeric_limits<double>::infinity();
    p.threshold_lo = odd ? (delta > 0 ? std::pow(delta, -2.0 / 3.0) : inf) : 1.0;
    p.threshold_hi = delta > 0 ? 1.0 / (delta * delta) : inf;

    const double rho = 0.5 - delta;
    const double dL = static_cast<double>(L);
    const double intermediate =
        (2.0 / 3.0) * std::sqrt(2.0 / std::numbers::pi_v<double>) * delta * dL * std::sqrt(dL);
    // the theorem's L/4 is the small-delta simplification of this
    const double linear = rho * (1.0 - rho) * dL;

    auto value_at = [&](Regime r) {
        switch (r) {
            case Regime::Plateau: return 0.25;
            case Regime::Linear: return linear;
            default: return intermediate;
        }
    };
    // plain-threshold regime decides the predicted value
    Regime face = Regime::Intermediate;
    if (odd && dL <= p.threshold_lo) face = Regime::Plateau;
    else if (dL > p.threshold_hi) face = Regime::Linear;
    p.predicted_variance = value_at(face);

    if (odd && dL < margin_s * p.threshold_lo) p.regime = Regime::Plateau;
    else if (dL > margin_l * p.threshold_hi) p.regime = Regime::Linear;
    else if (dL > margin_l * p.threshold_lo && dL < margin_s * p.threshold_hi)
        p.regime = Regime::Intermediate;
    else
        p.regime = Regime::Crossover;
    return p;
}

double predict_renewal_hit(double delta, uint64_t L) {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("predict_renewal_hit: requires 0 < delta < 1/2");
    double v = 4.0 * std::sqrt(2.0 / std::numbers::pi_v<double>) * delta *
               std::sqrt(static_cast<double>(L));
    return std::min(1.0, v);
}

double renewal_hit_exact(double delta, uint64_t L) {
    FirstRenewalLaw fr(delta);
    long double s = 0.0L;
    for (uint64_t l = 1; l <= L; ++l) s += fr.pmf(l);
    return static_cast<double>(s);
}

const char* route_name(Route r) {
    switch (r) {
        case Route::ExactSeries: return "exact-series";
        case Route::ExactSampler: return "exact-sampler";
        default: return "dynamics";
    }
}

Route route_from_name(const std::string& s) {
    if (s == "exact-series") return Route::ExactSeries;
    if (s == "exact-sampler") return Route::ExactSampler;
    if (s == "dynamics") return Route::Dynamics;
    throw std::invalid_argument("unknown route: " + s);
}

WindowSample cut_window(const BitArray& ring, uint64_t start, uint64_t L, double delta) {
    const uint64_t N = ring.size();
    if (L > N) throw std::invalid_argument("cut_window: L > ring size");
    WindowSample w;
    w.delta = delta;
    w.length = L;
    w.left_context = ring.get((start + N - 1) % N);
    w.occupancy = BitArray(L);
    w.renewal_flags = BitArray(L);
    for (uint64_t i = 0; i < L; ++i) {
        uint64_t s = start + i;
        if (s >= N) s -= N;
        if (ring.get(s)) w.occupancy.set(i, true);
    }
    scan_renewal_flags(w.occupancy, w.left_context, w.renewal_flags);
    for (uint64_t i = 0; i < L; ++i)
        if (w.renewal_flags.get(i)) {
            w.first_renewal_position = i + 1;
            break;
        }
    return w;
}

BlockedVariance dynamics_window_variance(const FrozenEnsemble& ens, uint64_t L,
                                         uint64_t pad, double delta) {
    BlockedVariance out;
    out.pooled.delta = delta;
    out.pooled.L = L;
    std::vector<double> per_replica;
    const uint64_t stride = L + pad;
    for (const auto& rep : ens.replicas) {
        if (rep.status != FreezeStatus::Frozen) continue;
        WindowStats st;
        st.delta = delta;
        st.L = L;
        for (uint64_t start = 0; start + stride <= ens.N; start += stride)
            st.add(decompose(cut_window(rep.occ, start, L, delta)));
        if (st.n >= 2) {
            per_replica.push_back(st.var_N());
            out.pooled.merge(st);
        }
    }
    if (per_replica.size() < 2)
        throw std::runtime_error("dynamics_window_variance: need >= 2 frozen replicas");
    double mean = 0;
    for (double v : per_replica) mean += v;
    mean /= static_cast<double>(per_replica.size());
    double ss = 0;
    for (double v : per_replica) ss += (v - mean) * (v - mean);
    out.variance = mean;
    out.stderr_ =
        std::sqrt(ss / (static_cast<double>(per_replica.size()) - 1.0) /
                  static_cast<double>(per_replica.size()));
    return out;
}

std::vector<RegimeRow> regime_report(double delta, const std::vector<uint64_t>& L_grid,
                                     Route route, const RouteParams& params,
                                     const FrozenEnsemble* pre_built) {
    std::vector<RegimeRow> rows;
    rows.reserve(L_grid.size());

    // shared state per route
    std::optional<FrozenEnsemble> own;
    const FrozenEnsemble* ens = pre_built;
    if (route == Route::Dynamics && ens == nullptr) {
        uint64_t max_events = params.max_events;
        if (max_events == 0)
            max_events = params.rule == UpdateRule::ParallelTA ? 1'000'000
                                                               : 400 * params.ring_n;
        own = simulate_ensemble(params.ring_n, 0.5 - delta, params.rule, params.replicas,
                                params.seed, max_events, params.threads);
        ens = &*own;
    }

    for (uint64_t L : L_grid) {
        RegimeRow row;
        row.delta = delta;
        row.L = L;
        row.parity = (L % 2 == 1) ? Parity::Odd : Parity::Even;
        row.route = route;
        RegimePrediction pred = predict_variance(delta, L, params.margin_s, params.margin_l);
        row.predicted = pred.predicted_variance;
        row.regime = pred.regime;
        row.stderr_ = std::numeric_limits<double>::quiet_NaN();
        try {
            switch (route) {
                case Route::ExactSeries: {
                    row.variance = exact_variance(delta, L);
                    break;
                }
                case Route::ExactSampler: {
                    WindowSampler sampler(delta);
                    CounterRng rng(params.seed, 0x5A17 + L);
                    WindowStats st;
                    st.delta = delta;
                    st.L = L;
                    for (uint64_t s = 0; s < params.samples; ++s)
                        st.add(decompose(sampler.sample(L, rng)));
                    row.variance = st.var_N();
                    row.stderr_ = st.var_N_stderr();
                    break;
                }
                case Route::Dynamics: {
                    if (delta <= 0.0) throw std::runtime_error("dynamics route needs delta > 0");
                    if (L > ens->N / 100)
                        throw std::runtime_error("L above ring/100; wrap effects not controlled");
                    BlockedVariance bv = dynamics_window_variance(*ens, L, 100, delta);
                    row.variance = bv.variance;
                    row.stderr_ = bv.stderr_;
                    break;
                }
            }
            row.ratio = row.variance / row.predicted;
        } catch (const std::exception& e) {
            row.variance = std::numeric_limits<double>::quiet_NaN();
            row.ratio = std::numeric_limits<double>::quiet_NaN();
            row.note = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void regime_csv(const std::vector<RegimeRow>& rows, std::ostream& os) {
    os << "delta,L,parity,route,variance,stderr,predicted,ratio,regime\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%llu,%s,%s,%.17g,%.17g,%.17g,%.17g,%s\n",
                      r.delta, static_cast<unsigned long long>(r.L),
                      r.parity == Parity::Odd ? "odd" : "even", route_name(r.route), r.variance,
                      r.stderr_, r.predicted, r.ratio,
                      r.note.empty() ? regime_name(r.regime) : "infeasible");
        os << buf;
    }
}

} // namespace fep

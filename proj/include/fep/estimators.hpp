#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fep/lattice.hpp"
#include "fep/renewal.hpp"

namespace fep {

// Per-window decomposition N = (L - (N_ren + sigma))/2 with
// sigma in {-1,0,+1} fixed by the parity of L - N_ren and the classes of the
// endpoint sites (occupied / plain empty / renewal empty).
struct Decomposition {
    uint64_t n_particles = 0;
    uint64_t n_renewals = 0;
    int sigma = 0;
};

/// throws std::invalid_argument on windows outside the frozen support
Decomposition decompose(const WindowSample& w);

// Streaming moments; raw power sums are exact integers so partial stats
// merge exactly in any grouping (the reduction order is still fixed by the
// callers for byte-stable output).
struct WindowStats {
    double delta = 0;
    uint64_t L = 0;
    uint64_t n = 0;
    __int128 s_n = 0, s_n2 = 0, s_n3 = 0, s_n4 = 0;
    __int128 s_r = 0, s_r2 = 0, s_r3 = 0, s_r4 = 0;
    __int128 s_rs = 0; // sum N_ren * sigma
    uint64_t sig_neg = 0, sig_zero = 0, sig_pos = 0;

    void add(const Decomposition& d);
    void merge(const WindowStats& other);

    double mean_N() const;
    double var_N() const;
    double var_N_stderr() const; // sqrt((m4 - m2^2)/n)
    double mean_Nren() const;
    double mean_Nren_stderr() const;
    double var_Nren() const;
    double var_Nren_stderr() const;
    double mean_sigma() const;
    double p_sigma_nonzero() const;
    double p_sigma_nonzero_stderr() const;
    double cov_Nren_sigma() const;
    /// 1/4 (Var(N_ren) + P(sigma != 0)), the decomposition's variance split
    double split_variance() const;
    double split_variance_stderr() const;
};

WindowStats accumulate(const std::vector<WindowSample>& windows);

enum class Parity { Odd, Even };
enum class Regime { Plateau, Intermediate, Linear, Crossover };
const char* regime_name(Regime r);

// Asymptotic prediction for Var(N(L)).  Scale thresholds delta^{-2/3} (odd)
// and delta^{-2}; the margin factors s < 1 < l leave a crossover band around
// each threshold where no single regime is asserted.  The predicted value
// always comes from the plain-threshold regime.
struct RegimePrediction {
    double delta = 0;
    uint64_t L = 0;
    Parity parity = Parity::Odd;
    Regime regime = Regime::Crossover;
    double predicted_variance = 0;
    double threshold_lo = 0; // delta^{-2/3} (odd) or 1 (even)
    double threshold_hi = 0; // delta^{-2}
    double margin_s = 0, margin_l = 0;
};

RegimePrediction predict_variance(double delta, uint64_t L, double margin_s = 0.6,
                                  double margin_l = 5.0);

/// min(1, 4 sqrt(2/pi) delta sqrt(L)), the probability of seeing any
/// renewal event in a window well below the delta^{-2} scale
double predict_renewal_hit(double delta, uint64_t L);

/// in-repo oracle for the same quantity: sum_{l<=L} p_delta(l)
double renewal_hit_exact(double delta, uint64_t L);

enum class Route { ExactSeries, ExactSampler, Dynamics };
const char* route_name(Route r);
Route route_from_name(const std::string& s);

struct RegimeRow {
    double delta = 0;
    uint64_t L = 0;
    Parity parity = Parity::Odd;
    Route route = Route::ExactSeries;
    double variance = 0;
    double stderr_ = 0; // NaN for exact routes
    double predicted = 0;
    double ratio = 0;
    Regime regime = Regime::Crossover;
    std::string note; // nonempty marks an infeasible row
};

struct RouteParams {
    uint64_t samples = 1'000'000; // exact-sampler windows per L
    uint64_t ring_n = 1 << 20;    // dynamics ring size
    uint32_t replicas = 16;       // dynamics replicas
    uint64_t max_events = 0;      // 0 = auto
    UpdateRule rule = UpdateRule::ParallelTA;
    uint64_t seed = 1;
    unsigned threads = 1;
    double margin_s = 0.6, margin_l = 5.0;
};

// `ens` may supply a pre-built ensemble for the dynamics route; otherwise it
// is simulated from the params.
std::vector<RegimeRow> regime_report(double delta, const std::vector<uint64_t>& L_grid,
                                     Route route, const RouteParams& params,
                                     const FrozenEnsemble* ens = nullptr);

void regime_csv(const std::vector<RegimeRow>& rows, std::ostream& os);

// Dynamics-route windows: cut from a frozen ring every L + pad sites, left
// context read off the ring.
WindowSample cut_window(const BitArray& ring, uint64_t start, uint64_t L, double delta);

// Per-replica window statistics (batch means): mean of the per-replica
// variances and its standard error across replicas.
struct BlockedVariance {
    double variance = 0;
    double stderr_ = 0;
    WindowStats pooled; // all windows pooled (identity checks, N_ren moments)
};

BlockedVariance dynamics_window_variance(const FrozenEnsemble& ens, uint64_t L,
                                         uint64_t pad, double delta);

} // namespace fep

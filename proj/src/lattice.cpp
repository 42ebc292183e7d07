#include "fep/lattice.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

#include "fep/kernels.hpp"

namespace fep {

const char* rule_name(UpdateRule r) {
    return r == UpdateRule::Continuous ? "continuous" : "parallel-ta";
}

UpdateRule rule_from_name(const std::string& s) {
    if (s == "continuous") return UpdateRule::Continuous;
    if (s == "parallel-ta") return UpdateRule::ParallelTA;
    throw std::invalid_argument("unknown update rule: " + s);
}

LatticeConfig config_from_bits(BitArray occ) {
    LatticeConfig cfg;
    cfg.N = occ.size();
    if (cfg.N < 2) throw std::invalid_argument("lattice: N >= 2");
    cfg.occ = std::move(occ);
    cfg.particles = cfg.occ.count();
    cfg.scratch_next.assign(cfg.occ.word_count(), 0);
    cfg.scratch_mov.assign(cfg.occ.word_count(), 0);
    rebuild_mobile(cfg);
    return cfg;
}

LatticeConfig init_bernoulli(uint64_t N, double rho, CounterRng& rng) {
    if (N < 2) throw std::invalid_argument("init_bernoulli: N >= 2");
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("init_bernoulli: rho in (0,1]");
    BitArray occ(N);
    for (uint64_t i = 0; i < N; ++i)
        if (rng.next_bernoulli(rho)) occ.set(i, true);
    return config_from_bits(std::move(occ));
}

namespace {

inline bool mobile_at(const BitArray& occ, uint64_t N, uint64_t x) {
    if (!occ.get(x)) return false;
    bool l = occ.get((x + N - 1) % N);
    bool r = occ.get((x + 1) % N);
    return l != r; // one occupied facilitator, one empty target
}

} // namespace

std::vector<uint32_t> scan_mobile(const LatticeConfig& cfg) {
    std::vector<uint32_t> out;
    for (uint64_t x = 0; x < cfg.N; ++x)
        if (mobile_at(cfg.occ, cfg.N, x)) out.push_back(static_cast<uint32_t>(x));
    return out;
}

void rebuild_mobile(LatticeConfig& cfg) {
    cfg.mobile.reset(cfg.N);
    for (uint64_t x = 0; x < cfg.N; ++x)
        if (mobile_at(cfg.occ, cfg.N, x)) cfg.mobile.insert(static_cast<uint32_t>(x));
    cfg.mobile_valid = true;
}

bool is_frozen(const LatticeConfig& cfg) {
    // any adjacent occupied pair on a non-full ring admits a move
    if (cfg.particles == cfg.N) return true;
    const uint64_t* w = cfg.occ.words();
    const size_t W = cfg.occ.word_count();
    const unsigned msb = (cfg.N - 1) & 63;
    const uint64_t wrap_hi = (w[W - 1] >> msb) & 1;
    for (size_t k = 0; k < W; ++k) {
        uint64_t lnb = (w[k] << 1) | (k ? (w[k - 1] >> 63) : wrap_hi);
        if (w[k] & lnb) return false;
    }
    return true;
}

void step_continuous(LatticeConfig& cfg, CounterRng& rng) {
    if (!cfg.mobile_valid) rebuild_mobile(cfg);
    const size_t n_mobile = cfg.mobile.size();
    if (n_mobile == 0) throw std::logic_error("step_continuous: configuration is frozen");

    // all feasible moves carry rate 1/2 (one direction per mobile particle)
    cfg.time += rng.next_exponential(0.5 * static_cast<double>(n_mobile));
    uint32_t x = cfg.mobile.pick(rng);
    const uint64_t N = cfg.N;
    bool left_occ = cfg.occ.get((x + N - 1) % N);
    uint64_t y = left_occ ? (x + 1) % N : (x + N - 1) % N;
    cfg.occ.set(x, false);
    cfg.occ.set(y, true);

    // mobility can change only where occupancy at x or y is a neighbour
    uint64_t lo = std::min<uint64_t>(x, y);
    for (int d = -2; d <= 3; ++d) {
        uint64_t s = (lo + N + d) % N;
        if (mobile_at(cfg.occ, N, s)) cfg.mobile.insert(static_cast<uint32_t>(s));
        else cfg.mobile.erase(static_cast<uint32_t>(s));
    }
}

uint64_t step_parallel_ta(LatticeConfig& cfg) {
    const auto& k = kernels::active();
    uint64_t movers = k.ta_sweep(cfg.occ.words(), cfg.scratch_next.data(),
                                 cfg.scratch_mov.data(), cfg.N);
    if (movers) {
        std::copy(cfg.scratch_next.begin(), cfg.scratch_next.end(), cfg.occ.words());
        cfg.mobile_valid = false;
    }
    ++cfg.sweeps;
    return movers;
}

RunResult run_to_frozen(LatticeConfig& cfg, UpdateRule rule, uint64_t max_events,
                        CounterRng& rng) {
    RunResult res;
    if (rule == UpdateRule::Continuous) {
        if (!cfg.mobile_valid) rebuild_mobile(cfg);
        while (cfg.mobile.size() > 0) {
            if (res.events >= max_events) {
                res.freeze_time = cfg.time;
                return res;
            }
            step_continuous(cfg, rng);
            ++res.events;
        }
        res.status = FreezeStatus::Frozen;
        res.freeze_time = cfg.time;
        return res;
    }
    for (;;) {
        uint64_t movers = kernels::active().ta_sweep(cfg.occ.words(), cfg.scratch_next.data(),
                                                     cfg.scratch_mov.data(), cfg.N);
        if (movers == 0) {
            res.status = FreezeStatus::Frozen;
            res.freeze_time = static_cast<double>(cfg.sweeps);
            return res;
        }
        if (res.events >= max_events) {
            res.freeze_time = static_cast<double>(cfg.sweeps);
            return res;
        }
        std::copy(cfg.scratch_next.begin(), cfg.scratch_next.end(), cfg.occ.words());
        cfg.mobile_valid = false;
        ++cfg.sweeps;
        ++res.events;
    }
}

std::vector<uint64_t> extract_gaps(const LatticeConfig& cfg) {
    // refuse configurations outside the frozen support
    if (cfg.particles < cfg.N) {
        const uint64_t* w = cfg.occ.words();
        const size_t W = cfg.occ.word_count();
        const unsigned msb = (cfg.N - 1) & 63;
        const uint64_t wrap_hi = (w[W - 1] >> msb) & 1;
        for (size_t k = 0; k < W; ++k) {
            uint64_t lnb = (w[k] << 1) | (k ? (w[k - 1] >> 63) : wrap_hi);
            if (w[k] & lnb) throw std::invalid_argument("extract_gaps: adjacent occupied pair");
        }
    } else {
        throw std::invalid_argument("extract_gaps: adjacent occupied pair");
    }

    std::vector<uint64_t> flags(cfg.occ.word_count(), 0);
    kernels::active().renewal_flags(cfg.occ.words(), flags.data(), cfg.N);

    std::vector<uint64_t> pos;
    for (size_t w = 0; w < flags.size(); ++w) {
        uint64_t bits = flags[w];
        while (bits) {
            unsigned b = std::countr_zero(bits);
            pos.push_back(64 * w + b);
            bits &= bits - 1;
        }
    }
    std::vector<uint64_t> gaps;
    if (pos.empty()) return gaps; // alternating ring: no renewal events
    gaps.reserve(pos.size());
    for (size_t i = 0; i + 1 < pos.size(); ++i) {
        uint64_t d = pos[i + 1] - pos[i];
        gaps.push_back((d - 1) / 2);
    }
    uint64_t d = pos.front() + cfg.N - pos.back();
    gaps.push_back((d - 1) / 2);
    return gaps;
}

FrozenEnsemble simulate_ensemble(uint64_t N, double rho, UpdateRule rule,
                                 uint32_t replicas, uint64_t master_seed,
                                 uint64_t max_events, unsigned threads) {
    FrozenEnsemble ens;
    ens.N = N;
    ens.rho = rho;
    ens.rule = rule;
    ens.master_seed = master_seed;
    ens.replicas.resize(replicas);

    if (threads == 0) threads = 1;
    std::atomic<uint32_t> next{0};
    auto worker = [&] {
        for (;;) {
            uint32_t r = next.fetch_add(1);
            if (r >= replicas) return;
            CounterRng rng(master_seed, r);
            LatticeConfig cfg = init_bernoulli(N, rho, rng);
            RunResult res = run_to_frozen(cfg, rule, max_events, rng);
            ReplicaResult& out = ens.replicas[r];
            out.replica = r;
            out.status = res.status;
            out.events = res.events;
            out.freeze_time = res.freeze_time;
            out.occ = std::move(cfg.occ);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return ens;
}

} // namespace fep

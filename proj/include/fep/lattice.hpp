#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fep/bitarray.hpp"
#include "fep/rng.hpp"

namespace fep {

enum class UpdateRule : uint8_t { Continuous = 0, ParallelTA = 1 };

const char* rule_name(UpdateRule r);
UpdateRule rule_from_name(const std::string& s);

// O(1) insert/erase/sample set of mobile particle positions
class MobileSet {
public:
    void reset(uint64_t n) {
        where_.assign(n, -1);
        items_.clear();
    }
    bool contains(uint32_t s) const { return where_[s] >= 0; }
    void insert(uint32_t s) {
        if (where_[s] >= 0) return;
        where_[s] = static_cast<int64_t>(items_.size());
        items_.push_back(s);
    }
    void erase(uint32_t s) {
        int64_t k = where_[s];
        if (k < 0) return;
        uint32_t last = items_.back();
        items_[k] = last;
        where_[last] = k;
        items_.pop_back();
        where_[s] = -1;
    }
    size_t size() const { return items_.size(); }
    uint32_t pick(CounterRng& rng) const { return items_[rng.next_below(items_.size())]; }
    const std::vector<uint32_t>& items() const { return items_; }

private:
    std::vector<uint32_t> items_;
    std::vector<int64_t> where_;
};

// Ring of N sites.  `mobile` is maintained by the continuous-time stepper;
// the parallel rule works straight off the bit kernels and ignores it.
struct LatticeConfig {
    uint64_t N = 0;
    BitArray occ;
    uint64_t particles = 0;
    double time = 0;     // continuous clock
    uint64_t sweeps = 0; // parallel sweep counter
    MobileSet mobile;
    bool mobile_valid = false;

    std::vector<uint64_t> scratch_next, scratch_mov;
};

LatticeConfig init_bernoulli(uint64_t N, double rho, CounterRng& rng);

/// wrap an existing ring; scratch and the mobile set are built here
LatticeConfig config_from_bits(BitArray occ);

/// full scan of the mobility rule (occupied with exactly one occupied
/// neighbour); also used by tests against the incremental bookkeeping
std::vector<uint32_t> scan_mobile(const LatticeConfig& cfg);
void rebuild_mobile(LatticeConfig& cfg);

/// no feasible move under either rule: no adjacent occupied pair, or full ring
bool is_frozen(const LatticeConfig& cfg);

/// one rejection-free continuous-time event; throws std::logic_error on a
/// frozen configuration
void step_continuous(LatticeConfig& cfg, CounterRng& rng);

/// one synchronous sweep of the totally asymmetric parallel rule; returns
/// the number of particles that moved
uint64_t step_parallel_ta(LatticeConfig& cfg);

enum class FreezeStatus : uint8_t { Frozen = 0, NotFrozen = 1 };

struct RunResult {
    FreezeStatus status = FreezeStatus::NotFrozen;
    uint64_t events = 0;    // jumps (continuous) or sweeps (parallel)
    double freeze_time = 0; // continuous clock or sweep count
};

// Apply steps until frozen or the event budget runs out.  The "not frozen"
// outcome is ordinary data: the partial state stays in cfg.
RunResult run_to_frozen(LatticeConfig& cfg, UpdateRule rule, uint64_t max_events,
                        CounterRng& rng);

// Half-gaps X between consecutive renewal events around the frozen ring
// (renewal event = empty site with empty left neighbour; spacing 2X+1).
// Throws std::invalid_argument if any adjacent pair is occupied.
std::vector<uint64_t> extract_gaps(const LatticeConfig& cfg);

struct ReplicaResult {
    uint64_t replica = 0;
    FreezeStatus status = FreezeStatus::NotFrozen;
    uint64_t events = 0;
    double freeze_time = 0;
    BitArray occ;
};

struct FrozenEnsemble {
    uint64_t N = 0;
    double rho = 0;
    UpdateRule rule = UpdateRule::ParallelTA;
    uint64_t master_seed = 0;
    std::vector<ReplicaResult> replicas;

    bool all_frozen() const {
        for (const auto& r : replicas)
            if (r.status != FreezeStatus::Frozen) return false;
        return true;
    }
};

// Runs `replicas` independent trajectories (stream r of the master seed) on
// `threads` workers; replica order in the result is fixed regardless of the
// worker count.
FrozenEnsemble simulate_ensemble(uint64_t N, double rho, UpdateRule rule,
                                 uint32_t replicas, uint64_t master_seed,
                                 uint64_t max_events, unsigned threads);

} // namespace fep

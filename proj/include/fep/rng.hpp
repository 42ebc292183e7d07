#pragma once

#include <cstdint>
#include <cmath>

namespace fep {

// Counter-based random stream (splitmix64 finalizer over key + counter).
// A stream is named by (master seed, stream index); the same pair always
// reproduces the same draw sequence, independent of any other stream.
class CounterRng {
public:
    CounterRng(uint64_t master_seed, uint64_t stream_index)
        : key_(derive_key(master_seed, stream_index)) {}

    uint64_t next_u64() {
        counter_ += kGolden;
        return finalize(key_ ^ counter_);
    }

    // uniform in [0,1), 53-bit resolution
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_unit() < p; }

    // Exp(rate); uses -log(1-u) so u=0 is safe
    double next_exponential(double rate) { return -std::log1p(-next_unit()) / rate; }

    // unbiased uniform in [0,n), Lemire rejection
    uint64_t next_below(uint64_t n) {
        uint64_t x = next_u64();
        unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
        uint64_t lo = static_cast<uint64_t>(m);
        if (lo < n) {
            uint64_t t = -n % n;
            while (lo < t) {
                x = next_u64();
                m = static_cast<unsigned __int128>(x) * n;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

private:
    static constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    static uint64_t finalize(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static uint64_t derive_key(uint64_t master, uint64_t stream) {
        return finalize(master ^ finalize(stream + kGolden));
    }

    uint64_t key_;
    uint64_t counter_ = 0;
};

} // namespace fep

#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fep {

// Packed bit array, little-endian within 64-bit words.  Bits at positions
// >= size() in the last word are kept zero; every mutator preserves that.
class BitArray {
public:
    BitArray() = default;
    explicit BitArray(uint64_t nbits) : n_(nbits), w_((nbits + 63) / 64, 0) {}

    uint64_t size() const { return n_; }
    size_t word_count() const { return w_.size(); }
    uint64_t* words() { return w_.data(); }
    const uint64_t* words() const { return w_.data(); }

    bool get(uint64_t i) const { return (w_[i >> 6] >> (i & 63)) & 1; }
    void set(uint64_t i, bool v) {
        uint64_t m = 1ull << (i & 63);
        if (v) w_[i >> 6] |= m; else w_[i >> 6] &= ~m;
    }

    uint64_t count() const {
        uint64_t c = 0;
        for (uint64_t w : w_) c += std::popcount(w);
        return c;
    }

    // number of set bits in [a, b)
    uint64_t count_range(uint64_t a, uint64_t b) const;

    void clear() { std::fill(w_.begin(), w_.end(), 0); }

    // mask of the valid bits of the last word
    uint64_t tail_mask() const {
        uint64_t r = n_ & 63;
        return r ? ((1ull << r) - 1) : ~0ull;
    }

    bool operator==(const BitArray&) const = default;

private:
    uint64_t n_ = 0;
    std::vector<uint64_t> w_;
};

// Set bits start, start+2, ..., start+2*(pairs-1); touched range must lie
// inside the array.  Word-masked, used for the alternating (10)^X blocks.
void set_alternating(BitArray& b, uint64_t start, uint64_t pairs);

} // namespace fep

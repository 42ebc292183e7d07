#include "fep/kernels.hpp"

#include <bit>

namespace fep::kernels {
namespace {

inline uint64_t nwords(uint64_t nbits) { return (nbits + 63) / 64; }

uint64_t ta_sweep_scalar(const uint64_t* occ, uint64_t* out, uint64_t* mov, uint64_t nbits) {
    const size_t W = nwords(nbits);
    const unsigned msb = (nbits - 1) & 63;
    const uint64_t tail = (nbits & 63) ? ((1ull << (nbits & 63)) - 1) : ~0ull;
    const uint64_t wrap_hi = (occ[W - 1] >> msb) & 1; // occ[nbits-1], feeds bit 0's left neighbour
    const uint64_t wrap_lo = occ[0] & 1;              // occ[0], right neighbour of the last bit
    uint64_t count = 0;
    for (size_t w = 0; w < W; ++w) {
        uint64_t cur = occ[w];
        uint64_t lnb = (cur << 1) | (w ? (occ[w - 1] >> 63) : wrap_hi);
        uint64_t rnb = (cur >> 1) | (w + 1 < W ? (occ[w + 1] << 63) : 0);
        if (w == W - 1) rnb |= wrap_lo << msb;
        uint64_t m = cur & lnb & ~rnb;
        mov[w] = m;
        count += std::popcount(m);
    }
    const uint64_t mov_wrap = (mov[W - 1] >> msb) & 1;
    for (size_t w = 0; w < W; ++w) {
        uint64_t land = (mov[w] << 1) | (w ? (mov[w - 1] >> 63) : mov_wrap);
        uint64_t nxt = (occ[w] & ~mov[w]) | land;
        if (w == W - 1) nxt &= tail;
        out[w] = nxt;
    }
    return count;
}

uint64_t renewal_flags_scalar(const uint64_t* occ, uint64_t* dst, uint64_t nbits) {
    const size_t W = nwords(nbits);
    const unsigned msb = (nbits - 1) & 63;
    const uint64_t tail = (nbits & 63) ? ((1ull << (nbits & 63)) - 1) : ~0ull;
    const uint64_t wrap_hi = (occ[W - 1] >> msb) & 1;
    uint64_t count = 0;
    for (size_t w = 0; w < W; ++w) {
        uint64_t cur = occ[w];
        uint64_t lnb = (cur << 1) | (w ? (occ[w - 1] >> 63) : wrap_hi);
        uint64_t f = ~cur & ~lnb;
        if (w == W - 1) f &= tail;
        dst[w] = f;
        count += std::popcount(f);
    }
    return count;
}

} // namespace

const Table& scalar() {
    static const Table t{&ta_sweep_scalar, &renewal_flags_scalar, "scalar"};
    return t;
}

} // namespace fep::kernels

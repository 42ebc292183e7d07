// AVX2 variants of the ring kernels.  Interior words go 4 at a time with
// unaligned neighbour loads; the first and last words take the scalar path
// so the ring wrap and tail mask stay in one place.  Compiled with -mavx2
// and only reachable through the runtime dispatch in kernels_dispatch.cpp.

#include "fep/kernels.hpp"

#include <bit>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace fep::kernels {
namespace {

inline uint64_t nwords(uint64_t nbits) { return (nbits + 63) / 64; }

// lnb = (cur << 1) | (left >> 63) per 64-bit lane
inline __m256i shift_up(__m256i cur, __m256i left) {
    return _mm256_or_si256(_mm256_slli_epi64(cur, 1), _mm256_srli_epi64(left, 63));
}
inline __m256i shift_down(__m256i cur, __m256i right) {
    return _mm256_or_si256(_mm256_srli_epi64(cur, 1), _mm256_slli_epi64(right, 63));
}

uint64_t ta_sweep_avx2(const uint64_t* occ, uint64_t* out, uint64_t* mov, uint64_t nbits) {
    const size_t W = nwords(nbits);
    const unsigned msb = (nbits - 1) & 63;
    const uint64_t tail = (nbits & 63) ? ((1ull << (nbits & 63)) - 1) : ~0ull;
    const uint64_t wrap_hi = (occ[W - 1] >> msb) & 1;
    const uint64_t wrap_lo = occ[0] & 1;

    // mover mask
    size_t w = 1;
    if (W >= 10) {
        for (; w + 4 < W; w += 4) {
            __m256i cur = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(occ + w));
            __m256i left = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(occ + w - 1));
            __m256i right = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(occ + w + 1));
            __m256i m = _mm256_andnot_si256(shift_down(cur, right),
                                            _mm256_and_si256(cur, shift_up(cur, left)));
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(mov + w), m);
        }
    }
    {
        // word 0, any remainder, and the last word
        uint64_t cur = occ[0];
        uint64_t lnb = (cur << 1) | wrap_hi;
        uint64_t rnb = (cur >> 1) | (W > 1 ? (occ[1] << 63) : 0);
        if (W == 1) rnb |= wrap_lo << msb;
        mov[0] = cur & lnb & ~rnb;
    }
    for (; w < W; ++w) {
        uint64_t cur = occ[w];
        uint64_t lnb = (cur << 1) | (occ[w - 1] >> 63);
        uint64_t rnb = (cur >> 1) | (w + 1 < W ? (occ[w + 1] << 63) : 0);
        if (w == W - 1) rnb |= wrap_lo << msb;
        mov[w] = cur & lnb & ~rnb;
    }

    uint64_t count = 0;
    for (size_t k = 0; k < W; ++k) count += std::popcount(mov[k]);

    // landing pass
    const uint64_t mov_wrap = (mov[W - 1] >> msb) & 1;
    out[0] = (occ[0] & ~mov[0]) | (mov[0] << 1) | mov_wrap;
    w = 1;
    if (W >= 10) {
        for (; w + 4 < W; w += 4) {
            __m256i cur = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(occ + w));
            __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mov + w));
            __m256i ml = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mov + w - 1));
            __m256i nxt = _mm256_or_si256(_mm256_andnot_si256(m, cur), shift_up(m, ml));
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + w), nxt);
        }
    }
    for (; w < W; ++w)
        out[w] = (occ[w] & ~mov[w]) | (mov[w] << 1) | (mov[w - 1] >> 63);
    out[W - 1] &= tail;
    return count;
}

uint64_t renewal_flags_avx2(const uint64_t* occ, uint64_t* dst, uint64_t nbits) {
    const size_t W = nwords(nbits);
    const unsigned msb = (nbits - 1) & 63;
    const uint64_t tail = (nbits & 63) ? ((1ull << (nbits & 63)) - 1) : ~0ull;
    const uint64_t wrap_hi = (occ[W - 1] >> msb) & 1;

    dst[0] = ~occ[0] & ~((occ[0] << 1) | wrap_hi);
    size_t w = 1;
    if (W >= 10) {
        const __m256i ones = _mm256_set1_epi64x(-1);
        for (; w + 4 < W; w += 4) {
            __m256i cur = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(occ + w));
            __m256i left = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(occ + w - 1));
            __m256i f = _mm256_andnot_si256(_mm256_or_si256(cur, shift_up(cur, left)), ones);
            _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + w), f);
        }
    }
    for (; w < W; ++w)
        dst[w] = ~occ[w] & ~((occ[w] << 1) | (occ[w - 1] >> 63));
    dst[W - 1] &= tail;

    uint64_t count = 0;
    for (size_t k = 0; k < W; ++k) count += std::popcount(dst[k]);
    return count;
}

} // namespace

const Table& avx2() {
    static const Table t{&ta_sweep_avx2, &renewal_flags_avx2, "avx2"};
    return t;
}

} // namespace fep::kernels

#else // non-x86: keep the symbol, fall back to scalar

namespace fep::kernels {
const Table& avx2() { return scalar(); }
} // namespace fep::kernels

#endif

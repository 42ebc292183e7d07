#pragma once

#include <cstddef>
#include <cstdint>

namespace fep::kernels {

// Word-parallel kernels over packed bit rings (see BitArray layout).  Both
// entries take nbits >= 2; bits past nbits in the last word must be zero on
// input and are zero on output.  src and dst must not alias.
struct Table {
    // One synchronous sweep of the totally asymmetric parallel rule: bit i
    // moves to i+1 (mod nbits) when bit i-1 is set and bit i+1 is clear.
    // `mov` is caller scratch of the same word count; receives the mover
    // mask.  Returns the number of movers.
    uint64_t (*ta_sweep)(const uint64_t* src, uint64_t* dst, uint64_t* mov, uint64_t nbits);

    // dst bit i = !src[i] && !src[i-1 mod nbits]; returns the set-bit count.
    uint64_t (*renewal_flags)(const uint64_t* src, uint64_t* dst, uint64_t nbits);

    const char* name;
};

const Table& scalar();
const Table& avx2();       // call only when cpu_has_avx2()
bool cpu_has_avx2();

// Runtime selection: AVX2 when available unless FEP_FORCE_SCALAR=1.
const Table& active();

} // namespace fep::kernels

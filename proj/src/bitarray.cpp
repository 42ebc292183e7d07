#include "fep/bitarray.hpp"

namespace fep {

uint64_t BitArray::count_range(uint64_t a, uint64_t b) const {
    if (a >= b) return 0;
    if (b > n_) throw std::out_of_range("count_range past end");
    size_t wa = a >> 6, wb = (b - 1) >> 6;
    uint64_t ma = ~0ull << (a & 63);
    uint64_t mb = (b & 63) ? ((1ull << (b & 63)) - 1) : ~0ull;
    if (wa == wb) return std::popcount(w_[wa] & ma & mb);
    uint64_t c = std::popcount(w_[wa] & ma);
    for (size_t w = wa + 1; w < wb; ++w) c += std::popcount(w_[w]);
    c += std::popcount(w_[wb] & mb);
    return c;
}

void set_alternating(BitArray& b, uint64_t start, uint64_t pairs) {
    if (pairs == 0) return;
    uint64_t end = start + 2 * (pairs - 1) + 1; // one past last set bit
    if (end > b.size()) throw std::out_of_range("set_alternating past end");
    // pattern with bits of the same parity as `start`
    uint64_t pattern = (start & 1) ? 0xAAAAAAAAAAAAAAAAull : 0x5555555555555555ull;
    uint64_t* w = b.words();
    size_t wa = start >> 6, wb = (end - 1) >> 6;
    uint64_t ma = ~0ull << (start & 63);
    uint64_t mb = (end & 63) ? ((1ull << (end & 63)) - 1) : ~0ull;
    for (size_t k = wa; k <= wb; ++k) {
        uint64_t m = pattern;
        if (k == wa) m &= ma;
        if (k == wb) m &= mb;
        w[k] |= m;
    }
}

} // namespace fep

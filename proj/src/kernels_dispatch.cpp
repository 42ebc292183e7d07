#include "fep/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace fep::kernels {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Table& active() {
    static const Table* chosen = [] {
        const char* force = std::getenv("FEP_FORCE_SCALAR");
        if (force && std::strcmp(force, "0") != 0) return &scalar();
        return cpu_has_avx2() ? &avx2() : &scalar();
    }();
    return *chosen;
}

} // namespace fep::kernels

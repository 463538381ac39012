#include "lfs/kernels.hpp"

namespace lfs::kernels {

bool avx2_supported() {
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops& ops() {
    static const Ops& selected = avx2_supported() ? avx2_ops() : scalar_ops();
    return selected;
}

const char* active_backend() {
    return avx2_supported() ? "avx2" : "scalar";
}

}  // namespace lfs::kernels

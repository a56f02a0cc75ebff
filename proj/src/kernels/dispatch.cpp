#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "roughwalk/kernels/kernels.hpp"

namespace roughwalk::kernels {

bool avx2_supported() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

namespace {

Isa initial_isa() {
    if (const char* env = std::getenv("ROUGHWALK_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0) {
            if (!avx2_supported()) throw std::runtime_error("ROUGHWALK_SIMD=avx2: cpu lacks avx2");
            return Isa::avx2;
        }
    }
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& isa_slot() {
    static std::atomic<Isa> slot{initial_isa()};
    return slot;
}

}  // namespace

void set_active_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_supported())
        throw std::runtime_error("set_active_isa: cpu lacks avx2");
    isa_slot().store(isa);
}

Isa active_isa() { return isa_slot().load(); }

const KernelTable& active_kernels() {
    return active_isa() == Isa::avx2 ? avx2_kernels() : scalar_kernels();
}

}  // namespace roughwalk::kernels

#include "mbgan/kernels.hpp"

#include <atomic>
#include <cstdlib>

#include "mbgan/errors.hpp"

namespace mbgan::kern {
namespace {

std::atomic<const Kernels*> g_active{nullptr};

const Kernels* pick() {
    if (const char* env = std::getenv("MBGAN_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return &scalar_kernels;
        if (want == "avx2") {
            if (!avx2_supported())
                throw Error("MBGAN_KERNELS=avx2 requested but AVX2+FMA is not available");
            return &avx2_kernels;
        }
        throw Error("unknown MBGAN_KERNELS value: " + want);
    }
    return avx2_supported() ? &avx2_kernels : &scalar_kernels;
}

} // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
    return avx2_kernels.matmul != nullptr && __builtin_cpu_supports("avx2") &&
           __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Kernels& active() {
    const Kernels* k = g_active.load(std::memory_order_acquire);
    if (!k) {
        k = pick();
        g_active.store(k, std::memory_order_release);
    }
    return *k;
}

void force_backend(const std::string& name) {
    if (name == "scalar") {
        g_active.store(&scalar_kernels, std::memory_order_release);
    } else if (name == "avx2") {
        if (!avx2_supported()) throw Error("AVX2+FMA backend not available on this CPU");
        g_active.store(&avx2_kernels, std::memory_order_release);
    } else {
        throw Error("unknown kernel backend: " + name);
    }
}

} // namespace mbgan::kern

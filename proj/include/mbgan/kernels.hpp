#pragma once

#include <cstddef>
#include <string>

namespace mbgan::kern {

// Hot inner loops, as plain-pointer kernels over row-major f64 buffers.
// Two implementations exist: a scalar reference (the semantics oracle) and
// an AVX2+FMA variant. The active table is picked once per process, at first
// use, from CPUID; MBGAN_KERNELS=scalar|avx2 overrides the choice.
//
// Determinism contract: every kernel accumulates in a fixed order, so a given
// table yields bit-identical results run to run. The two tables agree bitwise
// for relu/relu_backward/add_bias/colsum/adam_update and to ~1e-13 relative
// for the matmul family (FMA changes the rounding, not the order).
struct Kernels {
    const char* name;

    // c[m*n] = a[m*k] * b[k*n]
    void (*matmul)(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);

    // c[k*n] = a^T * b, with a[m*k], b[m*n]   (weight gradients: x^T * delta)
    void (*matmul_at_b)(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);

    // c[m*n] = a * b^T, with a[m*k], b[n*k]   (input gradients: delta * W^T)
    void (*matmul_a_bt)(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n);

    // y[i*n+j] += bias[j]
    void (*add_bias)(double* y, const double* bias, std::size_t m, std::size_t n);

    // out[j] = sum_i x[i*n+j]
    void (*colsum)(const double* x, double* out, std::size_t m, std::size_t n);

    void (*relu)(const double* x, double* y, std::size_t n);

    // dx = (y > 0) ? dy : 0, with y the post-activation values
    void (*relu_backward)(const double* y, const double* dy, double* dx, std::size_t n);

    // Bias-corrected Adam:
    //   m = beta1*m + (1-beta1)*g;  v = beta2*v + (1-beta2)*g^2
    //   p += sign * lr * (m/bc1) / (sqrt(v/bc2) + eps)
    void (*adam_update)(double* p, double* m, double* v, const double* g, std::size_t n,
                        double beta1, double beta2, double lr, double eps,
                        double bc1, double bc2, double sign);
};

extern const Kernels scalar_kernels;
extern const Kernels avx2_kernels; // valid only if avx2_supported()

bool avx2_supported();

// The table selected for this process (env override, else best supported).
const Kernels& active();

// Force a specific backend ("scalar" or "avx2"); throws mbgan::Error if the
// name is unknown or the backend is unsupported on this CPU. Test hook.
void force_backend(const std::string& name);

} // namespace mbgan::kern

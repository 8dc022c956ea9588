#include "mbgan/kernels.hpp"

#include <cmath>
#include <cstring>

// Reference kernels. Plain loops, fixed accumulation order (k-major for
// matmul, i-major for at_b/colsum). The AVX2 variants must preserve the same
// per-element accumulation order so results differ only by FMA rounding.

namespace mbgan::kern {
namespace {

void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void matmul_at_b_scalar(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, k * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = arow[p];
            double* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

void matmul_a_bt_scalar(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] = acc;
        }
    }
}

void add_bias_scalar(double* y, const double* bias, std::size_t m, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* yrow = y + i * n;
        for (std::size_t j = 0; j < n; ++j) yrow[j] += bias[j];
    }
}

void colsum_scalar(const double* x, double* out, std::size_t m, std::size_t n) {
    std::memset(out, 0, n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* xrow = x + i * n;
        for (std::size_t j = 0; j < n; ++j) out[j] += xrow[j];
    }
}

void relu_scalar(const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward_scalar(const double* y, const double* dy, double* dx, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

void adam_update_scalar(double* p, double* m, double* v, const double* g, std::size_t n,
                        double beta1, double beta2, double lr, double eps,
                        double bc1, double bc2, double sign) {
    for (std::size_t i = 0; i < n; ++i) {
        const double gi = g[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
        v[i] = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] += sign * lr * (mhat / (std::sqrt(vhat) + eps));
    }
}

} // namespace

const Kernels scalar_kernels = {
    "scalar",
    matmul_scalar,
    matmul_at_b_scalar,
    matmul_a_bt_scalar,
    add_bias_scalar,
    colsum_scalar,
    relu_scalar,
    relu_backward_scalar,
    adam_update_scalar,
};

} // namespace mbgan::kern

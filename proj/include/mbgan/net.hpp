#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "mbgan/matrix.hpp"

namespace mbgan {

enum class ActivationTag { Relu, Linear, Softplus, Sigmoid, Tanh };

const char* activation_name(ActivationTag tag);

// Stable scalar forms shared by the activation kernels and the loss code.
inline double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

// max(v,0) + log1p(exp(-|v|)); finite for the whole double range.
inline double softplus(double v) {
    const double a = v > 0.0 ? v : 0.0;
    return a + std::log1p(std::exp(-std::fabs(v)));
}

// log(sigmoid(v)) without forming the probability.
inline double log_sigmoid(double v) { return -softplus(-v); }

struct Layer {
    Matrix w; // (in, out)
    Matrix b; // (1, out)
    ActivationTag act = ActivationTag::Linear;
};

// Ordered (weight, bias) pairs plus activation tags; parameter container for
// generators and discriminators, and the shape template for their gradients
// and Adam moments.
struct MlpParams {
    std::vector<Layer> layers;

    std::size_t input_width() const { return layers.front().w.rows(); }
    std::size_t output_width() const { return layers.back().w.cols(); }

    // Same layer shapes, all values zero. Gradient/moment container.
    MlpParams zeros_like() const;

    std::size_t tensor_count() const { return layers.size() * 2; }

    // Tensors in fixed order: w0, b0, w1, b1, ... Matches the checkpoint
    // layout and the Adam moment ordering.
    Matrix& tensor(std::size_t i) {
        Layer& l = layers[i / 2];
        return (i % 2 == 0) ? l.w : l.b;
    }
    const Matrix& tensor(std::size_t i) const {
        const Layer& l = layers[i / 2];
        return (i % 2 == 0) ? l.w : l.b;
    }

    bool same_shapes(const MlpParams& o) const;
    bool all_finite() const;
};

// Post-activation values per layer plus the input batch: everything backward
// needs (all five activation derivatives are recoverable from the outputs).
struct ForwardTape {
    Matrix input;
    std::vector<Matrix> post;
};

Matrix matmul(const Matrix& a, const Matrix& b);

Matrix apply_activation(const Matrix& x, ActivationTag tag);

std::pair<Matrix, ForwardTape> mlp_forward(const MlpParams& params, const Matrix& input);

struct BackwardResult {
    MlpParams param_grads;
    Matrix input_grad;
};

// Exact reverse-mode gradients of the scalar whose d(scalar)/d(output) is
// `output_grad`, w.r.t. every weight, bias, and the input batch.
BackwardResult mlp_backward(const MlpParams& params, const ForwardTape& tape,
                            const Matrix& output_grad);

struct LossEval {
    double value = 0.0;
    MlpParams grads;
};

using LossFn = std::function<LossEval(const MlpParams&)>;

// Central-difference oracle: perturbs every parameter by +/- epsilon,
// compares (L+ - L-)/2eps against the analytic gradient reported by fn, and
// returns the worst relative error max(|a-n| / max(|a|, |n|, 1e-8)).
// fn must be deterministic. The numeric side uses only fn(...).value, so the
// check stays independent of the analytic path it validates.
double grad_check(const MlpParams& params, const LossFn& fn, double epsilon);

} // namespace mbgan

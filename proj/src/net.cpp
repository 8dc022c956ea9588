#include "mbgan/net.hpp"

#include <cmath>

#include "mbgan/errors.hpp"
#include "mbgan/kernels.hpp"

namespace mbgan {

const char* activation_name(ActivationTag tag) {
    switch (tag) {
    case ActivationTag::Relu: return "relu";
    case ActivationTag::Linear: return "linear";
    case ActivationTag::Softplus: return "softplus";
    case ActivationTag::Sigmoid: return "sigmoid";
    case ActivationTag::Tanh: return "tanh";
    }
    return "?";
}

MlpParams MlpParams::zeros_like() const {
    MlpParams out;
    out.layers.reserve(layers.size());
    for (const Layer& l : layers)
        out.layers.push_back({Matrix(l.w.rows(), l.w.cols()), Matrix(1, l.b.cols()), l.act});
    return out;
}

bool MlpParams::same_shapes(const MlpParams& o) const {
    if (layers.size() != o.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i)
        if (!layers[i].w.same_shape(o.layers[i].w) || !layers[i].b.same_shape(o.layers[i].b))
            return false;
    return true;
}

bool MlpParams::all_finite() const {
    for (const Layer& l : layers)
        if (!l.w.all_finite() || !l.b.all_finite()) return false;
    return true;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("matmul: " + shape_str(a) + " x " + shape_str(b));
    Matrix c(a.rows(), b.cols());
    kern::active().matmul(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

Matrix apply_activation(const Matrix& x, ActivationTag tag) {
    Matrix y(x.rows(), x.cols());
    const double* in = x.data();
    double* out = y.data();
    const std::size_t n = x.size();
    switch (tag) {
    case ActivationTag::Relu:
        kern::active().relu(in, out, n);
        break;
    case ActivationTag::Linear:
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i];
        break;
    case ActivationTag::Softplus:
        for (std::size_t i = 0; i < n; ++i) out[i] = softplus(in[i]);
        break;
    case ActivationTag::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) out[i] = sigmoid(in[i]);
        break;
    case ActivationTag::Tanh:
        for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
        break;
    }
    return y;
}

namespace {

// d(act)/d(pre-activation), recovered from the post-activation value y.
// Softplus: y = ln(1+e^x)  =>  sigma(x) = 1 - e^(-y).
void activation_backward(ActivationTag tag, const Matrix& post, const Matrix& dy, Matrix& dx) {
    const std::size_t n = post.size();
    const double* y = post.data();
    const double* g = dy.data();
    double* out = dx.data();
    switch (tag) {
    case ActivationTag::Relu:
        kern::active().relu_backward(y, g, out, n);
        break;
    case ActivationTag::Linear:
        for (std::size_t i = 0; i < n; ++i) out[i] = g[i];
        break;
    case ActivationTag::Softplus:
        for (std::size_t i = 0; i < n; ++i) out[i] = g[i] * (1.0 - std::exp(-y[i]));
        break;
    case ActivationTag::Sigmoid:
        for (std::size_t i = 0; i < n; ++i) out[i] = g[i] * y[i] * (1.0 - y[i]);
        break;
    case ActivationTag::Tanh:
        for (std::size_t i = 0; i < n; ++i) out[i] = g[i] * (1.0 - y[i] * y[i]);
        break;
    }
}

} // namespace

std::pair<Matrix, ForwardTape> mlp_forward(const MlpParams& params, const Matrix& input) {
    if (input.cols() != params.input_width())
        throw DimensionMismatch("mlp_forward: input width " + std::to_string(input.cols()) +
                                ", first layer expects " +
                                std::to_string(params.input_width()));
    ForwardTape tape;
    tape.input = input;
    tape.post.reserve(params.layers.size());
    const Matrix* x = &tape.input;
    for (const Layer& l : params.layers) {
        Matrix pre(x->rows(), l.w.cols());
        kern::active().matmul(x->data(), l.w.data(), pre.data(), x->rows(), x->cols(),
                              l.w.cols());
        kern::active().add_bias(pre.data(), l.b.data(), pre.rows(), pre.cols());
        tape.post.push_back(apply_activation(pre, l.act));
        x = &tape.post.back();
    }
    return {tape.post.back(), std::move(tape)};
}

BackwardResult mlp_backward(const MlpParams& params, const ForwardTape& tape,
                            const Matrix& output_grad) {
    if (tape.post.size() != params.layers.size())
        throw TapeMismatch("mlp_backward: tape has " + std::to_string(tape.post.size()) +
                           " layers, params have " + std::to_string(params.layers.size()));
    if (!output_grad.same_shape(tape.post.back()))
        throw TapeMismatch("mlp_backward: output_grad " + shape_str(output_grad) +
                           " vs forward output " + shape_str(tape.post.back()));
    if (tape.input.cols() != params.input_width())
        throw TapeMismatch("mlp_backward: tape input width mismatch");

    BackwardResult res;
    res.param_grads = params.zeros_like();

    Matrix delta(output_grad.rows(), output_grad.cols());
    Matrix dy = output_grad;
    for (std::size_t li = params.layers.size(); li-- > 0;) {
        const Layer& l = params.layers[li];
        delta = Matrix(dy.rows(), dy.cols());
        activation_backward(l.act, tape.post[li], dy, delta);

        const Matrix& x = (li == 0) ? tape.input : tape.post[li - 1];
        Layer& g = res.param_grads.layers[li];
        kern::active().matmul_at_b(x.data(), delta.data(), g.w.data(), x.rows(), x.cols(),
                                   delta.cols());
        kern::active().colsum(delta.data(), g.b.data(), delta.rows(), delta.cols());

        Matrix dx(delta.rows(), l.w.rows());
        kern::active().matmul_a_bt(delta.data(), l.w.data(), dx.data(), delta.rows(),
                                   delta.cols(), l.w.rows());
        if (li == 0)
            res.input_grad = std::move(dx);
        else
            dy = std::move(dx);
    }
    return res;
}

double grad_check(const MlpParams& params, const LossFn& fn, double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1e-2)
        throw Error("grad_check: epsilon must be in (0, 1e-2]");

    const LossEval at_theta = fn(params);
    if (!std::isfinite(at_theta.value)) throw NonFiniteLoss("grad_check: loss at theta");

    double worst = 0.0;
    MlpParams probe = params;
    for (std::size_t t = 0; t < params.tensor_count(); ++t) {
        const Matrix& analytic = at_theta.grads.tensor(t);
        Matrix& mat = probe.tensor(t);
        for (std::size_t i = 0; i < mat.size(); ++i) {
            const double saved = mat.data()[i];
            mat.data()[i] = saved + epsilon;
            const double lp = fn(probe).value;
            mat.data()[i] = saved - epsilon;
            const double lm = fn(probe).value;
            mat.data()[i] = saved;
            if (!std::isfinite(lp) || !std::isfinite(lm))
                throw NonFiniteLoss("grad_check: perturbed loss");
            const double numeric = (lp - lm) / (2.0 * epsilon);
            const double a = analytic.data()[i];
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            worst = std::max(worst, std::fabs(a - numeric) / denom);
        }
    }
    return worst;
}

} // namespace mbgan

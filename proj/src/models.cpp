#include "mbgan/models.hpp"

#include <cmath>

#include "mbgan/errors.hpp"
#include "mbgan/kernels.hpp"

namespace mbgan {

const char* head_mode_name(HeadMode m) {
    return m == HeadMode::Logit ? "logit" : "softplus";
}

MlpParams init_params(const std::vector<std::size_t>& widths,
                      const std::vector<ActivationTag>& acts, Rng& rng) {
    if (widths.size() < 2 || acts.size() != widths.size() - 1)
        throw Error("init_params: need n>=2 widths and n-1 activation tags");
    MlpParams p;
    p.layers.reserve(acts.size());
    for (std::size_t li = 0; li < acts.size(); ++li) {
        const std::size_t fan_in = widths[li];
        const std::size_t fan_out = widths[li + 1];
        const double gain = acts[li] == ActivationTag::Relu ? 2.0 : 1.0;
        const double std_dev = std::sqrt(gain / double(fan_in));
        Layer l;
        l.w = Matrix(fan_in, fan_out);
        l.b = Matrix(1, fan_out);
        l.act = acts[li];
        for (std::size_t i = 0; i < l.w.size(); ++i) l.w.data()[i] = std_dev * rng.normal();
        p.layers.push_back(std::move(l));
    }
    return p;
}

MlpParams init_generator(const GeneratorSpec& spec, Rng& rng) {
    std::vector<std::size_t> widths{spec.latent_dim};
    widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
    widths.push_back(spec.output_dim);
    std::vector<ActivationTag> acts(spec.hidden.size(), ActivationTag::Relu);
    acts.push_back(ActivationTag::Linear);
    return init_params(widths, acts, rng);
}

MlpParams init_discriminator(const DiscriminatorSpec& spec, Rng& rng) {
    std::vector<std::size_t> widths{spec.input_dim};
    widths.insert(widths.end(), spec.hidden.begin(), spec.hidden.end());
    widths.push_back(1);
    std::vector<ActivationTag> acts(spec.hidden.size(), ActivationTag::Relu);
    acts.push_back(spec.output_activation); // raw score; head applied separately
    return init_params(widths, acts, rng);
}

MlpParams init_generator(const GeneratorSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return init_generator(spec, rng);
}

MlpParams init_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return init_discriminator(spec, rng);
}

Matrix discriminator_prob(const MlpParams& d_params, const Matrix& x, HeadMode head) {
    auto [raw, tape] = mlp_forward(d_params, x);
    Matrix p(raw.rows(), raw.cols());
    const double lo = head == HeadMode::Logit ? 1e-300 : 1e-7;
    const double hi = head == HeadMode::Logit ? 0x1.fffffffffffffp-1 : 1.0 - 1e-7;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double s = raw.data()[i];
        double v = head == HeadMode::Logit ? sigmoid(s) : softplus(s);
        if (v < lo) v = lo;
        if (v > hi) v = hi;
        p.data()[i] = v;
    }
    return p;
}

AdamState AdamState::for_params(const MlpParams& params, const AdamConfig& cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m.reserve(params.tensor_count());
    s.v.reserve(params.tensor_count());
    for (std::size_t t = 0; t < params.tensor_count(); ++t) {
        const Matrix& ref = params.tensor(t);
        s.m.emplace_back(ref.rows(), ref.cols());
        s.v.emplace_back(ref.rows(), ref.cols());
    }
    return s;
}

AdamState AdamState::for_scalar(const AdamConfig& cfg) {
    AdamState s;
    s.cfg = cfg;
    s.m.emplace_back(1, 1);
    s.v.emplace_back(1, 1);
    return s;
}

void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, Direction dir) {
    if (state.m.size() != params.tensor_count())
        throw ShapeMismatch("adam_step: state has " + std::to_string(state.m.size()) +
                            " tensors, params have " + std::to_string(params.tensor_count()));
    if (!grads.all_finite()) throw NonFiniteGradient("adam_step: non-finite gradient");

    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, double(state.step_count));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, double(state.step_count));
    const double sign = dir == Direction::Ascend ? 1.0 : -1.0;
    for (std::size_t t = 0; t < params.tensor_count(); ++t) {
        Matrix& p = params.tensor(t);
        const Matrix& g = grads.tensor(t);
        if (!p.same_shape(g))
            throw ShapeMismatch("adam_step: grad tensor " + std::to_string(t) + " is " +
                                shape_str(g) + ", param is " + shape_str(p));
        kern::active().adam_update(p.data(), state.m[t].data(), state.v[t].data(), g.data(),
                                   p.size(), state.cfg.beta1, state.cfg.beta2, state.cfg.lr,
                                   state.cfg.eps, bc1, bc2, sign);
    }
}

double adam_step_scalar(AdamState& state, double param, double grad, Direction dir) {
    if (!std::isfinite(grad)) throw NonFiniteGradient("adam_step_scalar: non-finite gradient");
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.cfg.beta1, double(state.step_count));
    const double bc2 = 1.0 - std::pow(state.cfg.beta2, double(state.step_count));
    const double sign = dir == Direction::Ascend ? 1.0 : -1.0;
    kern::active().adam_update(&param, state.m[0].data(), state.v[0].data(), &grad, 1,
                               state.cfg.beta1, state.cfg.beta2, state.cfg.lr, state.cfg.eps,
                               bc1, bc2, sign);
    return param;
}

} // namespace mbgan

#include "mbgan/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbgan/errors.hpp"

namespace mbgan {

const char* alpha_fn_name(AlphaFn fn) {
    switch (fn) {
    case AlphaFn::Sigm: return "sigm";
    case AlphaFn::Soft: return "soft";
    case AlphaFn::Tanh: return "tanh";
    case AlphaFn::Ident: return "ident";
    }
    return "?";
}

AlphaSchedule AlphaSchedule::fixed(double value) {
    if (!(value >= 0.0 && value <= 1.0))
        throw Error("static alpha must be in [0,1], got " + std::to_string(value));
    AlphaSchedule s;
    s.mode = Mode::Static;
    s.static_value = value;
    return s;
}

AlphaSchedule AlphaSchedule::learned(AlphaFn fn, double beta0, const AdamConfig& adam_cfg) {
    AlphaSchedule s;
    s.mode = Mode::Learned;
    s.fn = fn;
    s.beta = beta0;
    s.beta_floor =
        fn == AlphaFn::Ident ? -std::numeric_limits<double>::infinity() : beta0;
    s.adam = AdamState::for_scalar(adam_cfg);
    return s;
}

double AlphaSchedule::default_beta0(AlphaFn fn) {
    return fn == AlphaFn::Sigm ? -1.8 : 0.0;
}

double alpha_value(const AlphaSchedule& s) {
    if (s.mode == AlphaSchedule::Mode::Static) return s.static_value;
    // Largest double below 1: keeps the bounded functions in [0,1) even
    // where tanh/sigmoid round to 1.0 (beta above ~19).
    constexpr double below_one = 0x1.fffffffffffffp-1;
    switch (s.fn) {
    case AlphaFn::Sigm: return std::min(sigmoid(s.beta), below_one);
    case AlphaFn::Soft: return std::min(s.beta / (1.0 + std::fabs(s.beta)), below_one);
    case AlphaFn::Tanh: return std::min(std::tanh(s.beta), below_one);
    case AlphaFn::Ident: return s.beta;
    }
    return 0.0;
}

double alpha_derivative(const AlphaSchedule& s) {
    if (s.mode == AlphaSchedule::Mode::Static)
        throw StaticScheduleHasNoGradient("alpha_derivative on a static schedule");
    switch (s.fn) {
    case AlphaFn::Sigm: {
        const double v = sigmoid(s.beta);
        return v * (1.0 - v);
    }
    case AlphaFn::Soft: {
        const double d = 1.0 + std::fabs(s.beta);
        return 1.0 / (d * d);
    }
    case AlphaFn::Tanh: {
        const double t = std::tanh(s.beta);
        return 1.0 - t * t;
    }
    case AlphaFn::Ident: return 1.0;
    }
    return 0.0;
}

void update_beta(AlphaSchedule& s, double dloss_dalpha) {
    if (s.mode != AlphaSchedule::Mode::Learned)
        throw StaticScheduleHasNoGradient("update_beta on a static schedule");
    if (!std::isfinite(dloss_dalpha))
        throw NonFiniteGradient("update_beta: non-finite dloss_dalpha");
    const double grad = dloss_dalpha * alpha_derivative(s);
    s.beta = adam_step_scalar(s.adam, s.beta, grad, Direction::Descend);
    if (s.beta < s.beta_floor) s.beta = s.beta_floor;
}

} // namespace mbgan

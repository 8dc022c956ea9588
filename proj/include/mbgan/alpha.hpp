#pragma once

#include "mbgan/models.hpp"

namespace mbgan {

// The four self-learned schedule functions mapping beta to alpha.
enum class AlphaFn { Sigm, Soft, Tanh, Ident };

const char* alpha_fn_name(AlphaFn fn);

// Diversity-parameter state: either a fixed alpha in [0,1], or a learned
// beta passed through a saturating function. beta is owned by the generator
// and optimized by its own Adam state; after every update it is clamped to
// beta_floor (the function's initial value doubles as its domain floor;
// Ident has none).
struct AlphaSchedule {
    enum class Mode { Static, Learned };

    Mode mode = Mode::Static;
    double static_value = 0.0;
    AlphaFn fn = AlphaFn::Sigm;
    double beta = 0.0;
    double beta_floor = 0.0;
    AdamState adam;

    static AlphaSchedule fixed(double value);
    // beta starts at beta0; beta_floor = beta0 (-inf for Ident).
    static AlphaSchedule learned(AlphaFn fn, double beta0, const AdamConfig& adam_cfg);

    // Conventional starting points: Sigm -1.8, Soft/Tanh/Ident 0.
    static double default_beta0(AlphaFn fn);
};

// Static -> stored value; Sigm -> sigmoid(beta); Soft -> beta/(1+|beta|);
// Tanh -> tanh(beta); Ident -> beta.
double alpha_value(const AlphaSchedule& s);

// d(alpha)/d(beta). Learned mode only (StaticScheduleHasNoGradient).
double alpha_derivative(const AlphaSchedule& s);

// One descending Adam step on beta with gradient
// dLoss/dbeta = dloss_dalpha * alpha_derivative, then clamp to beta_floor.
void update_beta(AlphaSchedule& s, double dloss_dalpha);

} // namespace mbgan

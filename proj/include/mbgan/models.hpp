#pragma once

#include <cstdint>
#include <vector>

#include "mbgan/net.hpp"
#include "mbgan/rng.hpp"

namespace mbgan {

// Toy generator preset: 256 -> 128 -> 128 -> 2, ReLU hidden, linear output.
struct GeneratorSpec {
    std::size_t latent_dim = 256;
    std::vector<std::size_t> hidden = {128, 128};
    std::size_t output_dim = 2;
};

// Toy discriminator preset: 2 -> 128 -> 1, ReLU hidden. output_activation is
// the last layer's activation (the raw score fed to the head); HeadMode then
// maps that score to a probability (see discriminator_prob).
//
// With the default Softplus output under the Logit head the probability is
// sigmoid(softplus(.)) in (0.5, 1): the discriminator can commit to "real"
// but saturates on the fake side, which bounds the generator's diversity
// reward and keeps the microbatch game from running away. A Linear output
// gives the textbook logistic discriminator.
struct DiscriminatorSpec {
    std::size_t input_dim = 2;
    std::vector<std::size_t> hidden = {128};
    ActivationTag output_activation = ActivationTag::Softplus;
};

// Logit: p = sigmoid(raw). Softplus: p = clamp(softplus(raw), 1e-7, 1-1e-7).
// Logit is the default; the softplus head exists for fidelity experiments
// and is only usable because of the clamp.
enum class HeadMode { Logit, Softplus };

const char* head_mode_name(HeadMode m);

// Weights ~ N(0, 2/fan_in) for layers feeding a ReLU, N(0, 1/fan_in)
// otherwise; biases zero. Draw order: layer by layer, weight matrix
// row-major, one normal per entry.
MlpParams init_params(const std::vector<std::size_t>& widths,
                      const std::vector<ActivationTag>& acts, Rng& rng);

MlpParams init_generator(const GeneratorSpec& spec, Rng& rng);
MlpParams init_discriminator(const DiscriminatorSpec& spec, Rng& rng);

// Convenience overloads with a private stream.
MlpParams init_generator(const GeneratorSpec& spec, std::uint64_t seed);
MlpParams init_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

// Per-sample probability of being real, strictly inside (0,1) in both head
// modes. Loss code does not call this (it uses log-sigmoid forms on the raw
// scores); this is the Eq-style public mapping.
Matrix discriminator_prob(const MlpParams& d_params, const Matrix& x, HeadMode head);

struct AdamConfig {
    double lr = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Moment buffers in MlpParams::tensor order. Also used for the scalar beta
// parameter via a single 1x1 tensor.
struct AdamState {
    AdamConfig cfg;
    std::int64_t step_count = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;

    static AdamState for_params(const MlpParams& params, const AdamConfig& cfg);
    static AdamState for_scalar(const AdamConfig& cfg);
};

enum class Direction { Ascend, Descend };

// One bias-corrected Adam step over all tensors. Throws NonFiniteGradient if
// any gradient entry is NaN/Inf.
void adam_step(AdamState& state, MlpParams& params, const MlpParams& grads, Direction dir);

// Scalar variant (used for beta); returns the updated parameter.
double adam_step_scalar(AdamState& state, double param, double grad, Direction dir);

} // namespace mbgan

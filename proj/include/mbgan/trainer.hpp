#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbgan/alpha.hpp"
#include "mbgan/models.hpp"
#include "mbgan/synthdata.hpp"

namespace mbgan {

struct TrainConfig {
    std::size_t k = 8;
    std::size_t batch_size = 512;
    std::int64_t iterations = 25000;
    std::uint64_t seed = 1;

    AlphaSchedule::Mode alpha_mode = AlphaSchedule::Mode::Learned;
    double alpha_static = 0.0; // Static mode only
    AlphaFn alpha_fn = AlphaFn::Sigm;
    double beta0 = -1.8;

    HeadMode head = HeadMode::Logit;
    GeneratorSpec gen;
    DiscriminatorSpec disc;
    AdamConfig adam;
    RingMixture data;

    std::int64_t checkpoint_every = 1000; // metric cadence (iterations)
    std::size_t metric_probe = 8192;      // samples per metric evaluation
    std::size_t intra_subset = 4096;      // Intra-FID subset size
    std::int64_t plot_every = 0;          // SVG cadence, 0 = final only
    std::int64_t save_state_every = 0;    // checkpoint-file cadence, 0 = final only

    std::size_t microbatch() const; // B/K; throws IndivisibleBatch
    void validate() const;          // throws ConfigInvalid naming the bad key
    AlphaSchedule make_alpha() const;
};

// Index structure of one minibatch split: K contiguous primary ranges of
// size m covering [0,B), plus a per-k complement of m indices drawn
// uniformly without replacement from the other (K-1)*m positions (empty only
// for K=1). Complements are redrawn every iteration.
struct MicrobatchPartition {
    std::size_t batch = 0;
    std::size_t m = 0;

    struct Range {
        std::size_t begin, end;
    };
    Range primary(std::size_t k) const { return {k * m, (k + 1) * m}; }

    std::vector<std::vector<std::uint32_t>> complements;
};

MicrobatchPartition partition(std::size_t batch, std::size_t k, Rng& rng);

// Mean over the microbatch of
//   log D(real) + log(1 - D(fake_own)) + alpha * log D(fake_complement).
// The discriminator ascends this. fake_complement may be empty only when it
// genuinely does not exist (K=1); then the alpha term is absent.
double d_loss(const MlpParams& d, const Matrix& real_micro, const Matrix& fake_micro,
              const Matrix& fake_complement, double alpha, HeadMode head);

struct GLossValue {
    double value = 0.0;
    double dloss_dalpha = 0.0; // sum_k mean(log D_k(fake_complement_k))
};

// sum_k mean[ log(1 - D_k(fake_k)) + alpha * log D_k(fake_complement_k) ].
// The generator descends this; dloss_dalpha feeds the beta update.
GLossValue g_loss(std::span<const MlpParams> ds, std::span<const Matrix> fake_micro_per_k,
                  std::span<const Matrix> fake_complement_per_k, double alpha, HeadMode head);

// Analytic-gradient twins of the losses above (validated against grad_check).

struct DLossGrads {
    double value = 0.0;
    MlpParams grads;
};
DLossGrads d_loss_grads(const MlpParams& d, const Matrix& real_micro, const Matrix& fake_micro,
                        const Matrix& fake_complement, double alpha, HeadMode head);

struct GLossGrads {
    double value = 0.0;
    double dloss_dalpha = 0.0;
    MlpParams grads;      // w.r.t. generator parameters
    Matrix fake_grad;     // w.r.t. the generated batch (for inspection/tests)
};
// fake/g_tape must come from one mlp_forward of the generator on the full
// latent minibatch. alpha is a constant here; its gradient reaches the
// generator only through the discriminators' input gradients.
GLossGrads g_loss_grads(const MlpParams& g, const ForwardTape& g_tape, const Matrix& fake,
                        std::span<const MlpParams> ds, const MicrobatchPartition& part,
                        double alpha, HeadMode head);

struct TrainerState {
    TrainConfig cfg;
    Rng rng{0};
    MlpParams g;
    std::vector<MlpParams> d;
    AdamState g_adam;
    std::vector<AdamState> d_adam;
    AlphaSchedule alpha;
    std::int64_t iteration = 0;

    std::vector<double> last_d_losses;
    double last_g_loss = 0.0;

    static TrainerState init(const TrainConfig& cfg);
};

// One full iteration: sample latent and real minibatches, partition, ascend
// every D_k on its d_loss, then descend G on g_loss, then (Learned mode)
// update beta. RNG draw order: latents, reals, complements — nothing else
// touches the training stream.
void train_step(TrainerState& state);

struct SpreadStats {
    double mean_pairwise_dist = 0.0;
    std::array<double, 2> per_dim_std{};
};

struct FrozenResult {
    MlpParams g;
    SpreadStats spread;
};

// Trains only G against fixed discriminators for `steps` iterations (alpha
// held constant, no beta update), then measures the output spread on a fresh
// 4096-latent probe. The Theorem 1/2 testbed.
FrozenResult frozen_d_g_training(const TrainConfig& cfg, std::span<const MlpParams> frozen_ds,
                                 double alpha, std::int64_t steps, std::uint64_t seed);

SpreadStats output_spread(const Matrix& outputs);

} // namespace mbgan

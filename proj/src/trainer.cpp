#include "mbgan/trainer.hpp"

#include <cmath>
#include <cstring>

#include "mbgan/errors.hpp"

namespace mbgan {

std::size_t TrainConfig::microbatch() const {
    if (k == 0) throw ConfigInvalid("k must be >= 1");
    if (batch_size % k != 0)
        throw IndivisibleBatch("batch_size (" + std::to_string(batch_size) +
                               ") not divisible by k (" + std::to_string(k) + ")");
    return batch_size / k;
}

void TrainConfig::validate() const {
    if (k == 0) throw ConfigInvalid("k: must be >= 1");
    if (batch_size == 0) throw ConfigInvalid("batch_size: must be >= 1");
    if (batch_size % k != 0)
        throw ConfigInvalid("batch_size: " + std::to_string(batch_size) +
                            " not divisible by k = " + std::to_string(k));
    if (iterations < 0) throw ConfigInvalid("iterations: must be >= 0");
    if (alpha_mode == AlphaSchedule::Mode::Static &&
        !(alpha_static >= 0.0 && alpha_static <= 1.0))
        throw ConfigInvalid("alpha.value: must be in [0,1]");
    if (!std::isfinite(beta0)) throw ConfigInvalid("alpha.beta0: must be finite");
    if (gen.output_dim != disc.input_dim)
        throw ConfigInvalid("generator.output_dim must equal discriminator.input_dim");
    if (gen.output_dim != 2) throw ConfigInvalid("generator.output_dim: only 2 is supported");
    if (gen.latent_dim == 0) throw ConfigInvalid("generator.latent_dim: must be >= 1");
    if (data.n_modes == 0) throw ConfigInvalid("dataset.modes: must be >= 1");
    if (!(data.mode_std > 0.0)) throw ConfigInvalid("dataset.std: must be > 0");
    if (checkpoint_every <= 0) throw ConfigInvalid("metrics.checkpoint_every: must be >= 1");
    if (intra_subset < 2) throw ConfigInvalid("metrics.intra_subset: must be >= 2");
    if (metric_probe < 2 * intra_subset)
        throw ConfigInvalid("metrics.probe: must be >= 2 * metrics.intra_subset");
    if (plot_every < 0) throw ConfigInvalid("output.plot_every: must be >= 0");
    if (save_state_every < 0) throw ConfigInvalid("output.checkpoint_every: must be >= 0");
    if (!(adam.lr > 0.0)) throw ConfigInvalid("optimizer.lr: must be > 0");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw ConfigInvalid("optimizer.beta1");
    if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw ConfigInvalid("optimizer.beta2");
}

AlphaSchedule TrainConfig::make_alpha() const {
    if (alpha_mode == AlphaSchedule::Mode::Static) return AlphaSchedule::fixed(alpha_static);
    return AlphaSchedule::learned(alpha_fn, beta0, adam);
}

MicrobatchPartition partition(std::size_t batch, std::size_t k, Rng& rng) {
    if (k == 0) throw ConfigInvalid("partition: k must be >= 1");
    if (batch == 0 || batch % k != 0)
        throw IndivisibleBatch("partition: batch " + std::to_string(batch) +
                               " not divisible by k " + std::to_string(k));
    MicrobatchPartition part;
    part.batch = batch;
    part.m = batch / k;
    part.complements.resize(k);
    if (k == 1) return part; // no outside samples exist

    // Pool of indices outside kk's primary range, ascending; a partial
    // Fisher-Yates of its first m slots is a uniform draw w/o replacement.
    std::vector<std::uint32_t> pool(batch - part.m);
    for (std::size_t kk = 0; kk < k; ++kk) {
        std::size_t w = 0;
        for (std::size_t i = 0; i < batch; ++i)
            if (i < kk * part.m || i >= (kk + 1) * part.m) pool[w++] = std::uint32_t(i);
        for (std::size_t j = 0; j < part.m; ++j)
            std::swap(pool[j], pool[j + rng.below(pool.size() - j)]);
        part.complements[kk].assign(pool.begin(), pool.begin() + std::ptrdiff_t(part.m));
    }
    return part;
}

namespace {

// Per-row head terms: log D, log(1-D) and their derivatives w.r.t. the raw
// score, for both head modes. Logit uses exact log-sigmoid forms; the
// softplus head is clamped to [1e-7, 1-1e-7] with zero derivative in the
// clamped regions.
struct HeadTerms {
    double log_d, log_1md;
    double dlog_d, dlog_1md;
};

inline HeadTerms head_terms(double s, HeadMode head) {
    HeadTerms t;
    if (head == HeadMode::Logit) {
        t.log_d = log_sigmoid(s);
        t.log_1md = log_sigmoid(-s);
        t.dlog_d = sigmoid(-s);
        t.dlog_1md = -sigmoid(s);
        return t;
    }
    const double sp = softplus(s);
    constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
    const double p = sp < lo ? lo : (sp > hi ? hi : sp);
    const double dp = (sp < lo || sp > hi) ? 0.0 : sigmoid(s);
    t.log_d = std::log(p);
    t.log_1md = std::log(1.0 - p);
    t.dlog_d = dp / p;
    t.dlog_1md = -dp / (1.0 - p);
    return t;
}

Matrix vcat(const Matrix& a, const Matrix& b) {
    if (b.rows() == 0) return a;
    Matrix out(a.rows() + b.rows(), a.cols());
    std::memcpy(out.data(), a.data(), a.size() * sizeof(double));
    std::memcpy(out.row(a.rows()), b.data(), b.size() * sizeof(double));
    return out;
}

void check_d_batches(const MlpParams& d, const Matrix& real_micro, const Matrix& fake_micro,
                     const Matrix& fake_complement) {
    const std::size_t m = fake_micro.rows();
    if (m == 0) throw EmptyBatch("d_loss: empty microbatch");
    if (real_micro.rows() != m)
        throw DimensionMismatch("d_loss: real microbatch has " +
                                std::to_string(real_micro.rows()) + " rows, fake has " +
                                std::to_string(m));
    if (fake_complement.rows() != 0 && fake_complement.rows() != m)
        throw DimensionMismatch("d_loss: complement must have 0 or m rows");
    if (real_micro.cols() != d.input_width() || fake_micro.cols() != d.input_width())
        throw DimensionMismatch("d_loss: sample width vs discriminator input width");
    if (d.output_width() != 1)
        throw DimensionMismatch("d_loss: discriminator must output one score per sample");
}

} // namespace

double d_loss(const MlpParams& d, const Matrix& real_micro, const Matrix& fake_micro,
              const Matrix& fake_complement, double alpha, HeadMode head) {
    check_d_batches(d, real_micro, fake_micro, fake_complement);
    const std::size_t m = fake_micro.rows();
    const std::size_t mc = fake_complement.rows();
    const Matrix x = vcat(vcat(real_micro, fake_micro), fake_complement);
    const Matrix s = mlp_forward(d, x).first;

    const double inv_m = 1.0 / double(m);
    double real_term = 0.0, own_term = 0.0, comp_term = 0.0;
    for (std::size_t i = 0; i < m; ++i) real_term += head_terms(s(i, 0), head).log_d;
    for (std::size_t i = 0; i < m; ++i) own_term += head_terms(s(m + i, 0), head).log_1md;
    for (std::size_t i = 0; i < mc; ++i)
        comp_term += head_terms(s(2 * m + i, 0), head).log_d;
    return inv_m * real_term + inv_m * own_term + alpha * inv_m * comp_term;
}

DLossGrads d_loss_grads(const MlpParams& d, const Matrix& real_micro, const Matrix& fake_micro,
                        const Matrix& fake_complement, double alpha, HeadMode head) {
    check_d_batches(d, real_micro, fake_micro, fake_complement);
    const std::size_t m = fake_micro.rows();
    const std::size_t mc = fake_complement.rows();
    const Matrix x = vcat(vcat(real_micro, fake_micro), fake_complement);
    auto [s, tape] = mlp_forward(d, x);

    const double inv_m = 1.0 / double(m);
    const double alpha_inv_m = alpha * inv_m;
    Matrix og(s.rows(), 1);
    double real_term = 0.0, own_term = 0.0, comp_term = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const HeadTerms t = head_terms(s(i, 0), head);
        real_term += t.log_d;
        og(i, 0) = inv_m * t.dlog_d;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const HeadTerms t = head_terms(s(m + i, 0), head);
        own_term += t.log_1md;
        og(m + i, 0) = inv_m * t.dlog_1md;
    }
    for (std::size_t i = 0; i < mc; ++i) {
        const HeadTerms t = head_terms(s(2 * m + i, 0), head);
        comp_term += t.log_d;
        og(2 * m + i, 0) = alpha_inv_m * t.dlog_d;
    }

    DLossGrads out;
    out.value = inv_m * real_term + inv_m * own_term + alpha * inv_m * comp_term;
    out.grads = mlp_backward(d, tape, og).param_grads;
    return out;
}

GLossValue g_loss(std::span<const MlpParams> ds, std::span<const Matrix> fake_micro_per_k,
                  std::span<const Matrix> fake_complement_per_k, double alpha, HeadMode head) {
    const std::size_t k = ds.size();
    if (k == 0) throw EmptyBatch("g_loss: no discriminators");
    if (fake_micro_per_k.size() != k || fake_complement_per_k.size() != k)
        throw DimensionMismatch("g_loss: need one microbatch and one complement per k");

    GLossValue out;
    for (std::size_t kk = 0; kk < k; ++kk) {
        const Matrix& own = fake_micro_per_k[kk];
        const Matrix& comp = fake_complement_per_k[kk];
        const std::size_t m = own.rows();
        if (m == 0) throw EmptyBatch("g_loss: empty microbatch");
        if (comp.rows() != 0 && comp.rows() != m)
            throw DimensionMismatch("g_loss: complement must have 0 or m rows");
        const Matrix s = mlp_forward(ds[kk], vcat(own, comp)).first;
        const double inv_m = 1.0 / double(m);
        double own_term = 0.0, comp_term = 0.0;
        for (std::size_t i = 0; i < m; ++i) own_term += head_terms(s(i, 0), head).log_1md;
        for (std::size_t i = 0; i < comp.rows(); ++i)
            comp_term += head_terms(s(m + i, 0), head).log_d;
        out.value += inv_m * own_term + alpha * inv_m * comp_term;
        out.dloss_dalpha += inv_m * comp_term;
    }
    return out;
}

GLossGrads g_loss_grads(const MlpParams& g, const ForwardTape& g_tape, const Matrix& fake,
                        std::span<const MlpParams> ds, const MicrobatchPartition& part,
                        double alpha, HeadMode head) {
    const std::size_t k = ds.size();
    if (k != part.complements.size())
        throw DimensionMismatch("g_loss_grads: partition is for " +
                                std::to_string(part.complements.size()) + " discriminators");
    if (fake.rows() != part.batch) throw DimensionMismatch("g_loss_grads: fake rows vs batch");
    const std::size_t m = part.m;
    if (m == 0) throw EmptyBatch("g_loss_grads: empty microbatch");

    GLossGrads out;
    out.fake_grad = Matrix(fake.rows(), fake.cols());
    const double inv_m = 1.0 / double(m);
    const double alpha_inv_m = alpha * inv_m;

    for (std::size_t kk = 0; kk < k; ++kk) {
        const auto range = part.primary(kk);
        const auto& comp_idx = part.complements[kk];
        const Matrix own = fake.slice_rows(range.begin, range.end);
        const Matrix comp = fake.gather_rows(comp_idx);
        auto [s, tape] = mlp_forward(ds[kk], vcat(own, comp));

        Matrix og(s.rows(), 1);
        double own_term = 0.0, comp_term = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const HeadTerms t = head_terms(s(i, 0), head);
            own_term += t.log_1md;
            og(i, 0) = inv_m * t.dlog_1md;
        }
        for (std::size_t i = 0; i < comp_idx.size(); ++i) {
            const HeadTerms t = head_terms(s(m + i, 0), head);
            comp_term += t.log_d;
            og(m + i, 0) = alpha_inv_m * t.dlog_d;
        }
        out.value += inv_m * own_term + alpha * inv_m * comp_term;
        out.dloss_dalpha += inv_m * comp_term;

        const Matrix ig = mlp_backward(ds[kk], tape, og).input_grad;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < fake.cols(); ++c)
                out.fake_grad(range.begin + i, c) += ig(i, c);
        for (std::size_t i = 0; i < comp_idx.size(); ++i)
            for (std::size_t c = 0; c < fake.cols(); ++c)
                out.fake_grad(comp_idx[i], c) += ig(m + i, c);
    }

    out.grads = mlp_backward(g, g_tape, out.fake_grad).param_grads;
    return out;
}

TrainerState TrainerState::init(const TrainConfig& cfg) {
    cfg.validate();
    TrainerState st;
    st.cfg = cfg;
    st.rng = Rng(cfg.seed);
    st.g = init_generator(cfg.gen, st.rng);
    st.d.reserve(cfg.k);
    for (std::size_t i = 0; i < cfg.k; ++i) st.d.push_back(init_discriminator(cfg.disc, st.rng));
    st.g_adam = AdamState::for_params(st.g, cfg.adam);
    st.d_adam.reserve(cfg.k);
    for (std::size_t i = 0; i < cfg.k; ++i)
        st.d_adam.push_back(AdamState::for_params(st.d[i], cfg.adam));
    st.alpha = cfg.make_alpha();
    st.last_d_losses.assign(cfg.k, 0.0);
    return st;
}

void train_step(TrainerState& st) {
    const TrainConfig& cfg = st.cfg;
    const std::size_t b = cfg.batch_size;
    try {
        const Matrix z = sample_latent(cfg.gen.latent_dim, b, st.rng);
        const Matrix x = sample_real(cfg.data, b, st.rng);
        const MicrobatchPartition part = partition(b, cfg.k, st.rng);

        auto [fake, g_tape] = mlp_forward(st.g, z);
        const double a = alpha_value(st.alpha);

        for (std::size_t kk = 0; kk < cfg.k; ++kk) {
            const auto range = part.primary(kk);
            const Matrix real_k = x.slice_rows(range.begin, range.end);
            const Matrix own_k = fake.slice_rows(range.begin, range.end);
            const Matrix comp_k = fake.gather_rows(part.complements[kk]);
            DLossGrads dg = d_loss_grads(st.d[kk], real_k, own_k, comp_k, a, cfg.head);
            adam_step(st.d_adam[kk], st.d[kk], dg.grads, Direction::Ascend);
            st.last_d_losses[kk] = dg.value;
        }

        GLossGrads gg = g_loss_grads(st.g, g_tape, fake, st.d, part, a, cfg.head);
        adam_step(st.g_adam, st.g, gg.grads, Direction::Descend);
        st.last_g_loss = gg.value;

        if (st.alpha.mode == AlphaSchedule::Mode::Learned) update_beta(st.alpha, gg.dloss_dalpha);
    } catch (const NonFiniteGradient& e) {
        throw NonFiniteGradient(std::string(e.what()) + " (iteration " +
                                std::to_string(st.iteration + 1) + ")");
    }
    st.iteration += 1;
}

SpreadStats output_spread(const Matrix& outputs) {
    SpreadStats s;
    const std::size_t n = outputs.rows();
    if (n < 2) return s;
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += outputs(i, c);
        mean /= double(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = outputs(i, c) - mean;
            ss += d * d;
        }
        s.per_dim_std[c] = std::sqrt(ss / double(n - 1));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = outputs(i, 0) - outputs(j, 0);
            const double dy = outputs(i, 1) - outputs(j, 1);
            total += std::sqrt(dx * dx + dy * dy);
        }
    s.mean_pairwise_dist = total / (double(n) * double(n - 1) / 2.0);
    return s;
}

FrozenResult frozen_d_g_training(const TrainConfig& cfg, std::span<const MlpParams> frozen_ds,
                                 double alpha, std::int64_t steps, std::uint64_t seed) {
    if (frozen_ds.size() != cfg.k)
        throw DimensionMismatch("frozen_d_g_training: cfg.k vs discriminator count");
    if (steps < 0) throw Error("frozen_d_g_training: steps must be >= 0");

    Rng rng(seed);
    FrozenResult out;
    out.g = init_generator(cfg.gen, rng);
    AdamState g_adam = AdamState::for_params(out.g, cfg.adam);

    const std::size_t b = cfg.batch_size;
    for (std::int64_t it = 0; it < steps; ++it) {
        const Matrix z = sample_latent(cfg.gen.latent_dim, b, rng);
        const MicrobatchPartition part = partition(b, cfg.k, rng);
        auto [fake, g_tape] = mlp_forward(out.g, z);
        GLossGrads gg = g_loss_grads(out.g, g_tape, fake, frozen_ds, part, alpha, cfg.head);
        adam_step(g_adam, out.g, gg.grads, Direction::Descend);
    }

    const Matrix probe_z = sample_latent(cfg.gen.latent_dim, 4096, rng);
    const Matrix probe = mlp_forward(out.g, probe_z).first;
    out.spread = output_spread(probe);
    return out;
}

} // namespace mbgan

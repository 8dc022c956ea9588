#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mbgan/errors.hpp"
#include "mbgan/models.hpp"

using namespace mbgan;

namespace {

bool params_equal(const MlpParams& a, const MlpParams& b) {
    if (a.tensor_count() != b.tensor_count()) return false;
    for (std::size_t t = 0; t < a.tensor_count(); ++t)
        if (!(a.tensor(t) == b.tensor(t))) return false;
    return true;
}

} // namespace

TEST_CASE("init_params: determinism, zero biases, seed sensitivity") {
    const GeneratorSpec spec;
    const MlpParams a = init_generator(spec, std::uint64_t{123});
    const MlpParams b = init_generator(spec, std::uint64_t{123});
    CHECK(params_equal(a, b));

    for (const Layer& l : a.layers)
        for (double v : l.b.values()) CHECK(v == 0.0);

    const MlpParams c = init_generator(spec, std::uint64_t{124});
    CHECK(!params_equal(a, c));
}

TEST_CASE("init_params: He variance on a 128x128 relu layer") {
    Rng rng(55);
    const MlpParams p = init_params({128, 128, 2},
                                    {ActivationTag::Relu, ActivationTag::Linear}, rng);
    const Matrix& w = p.layers[0].w;
    double mean = 0.0;
    for (double v : w.values()) mean += v;
    mean /= double(w.size());
    double var = 0.0;
    for (double v : w.values()) var += (v - mean) * (v - mean);
    var /= double(w.size() - 1);
    const double expected = 2.0 / 128.0;
    CHECK(var > 0.8 * expected);
    CHECK(var < 1.2 * expected);

    // non-relu layer uses 1/fan_in
    const Matrix& w2 = p.layers[1].w;
    double var2 = 0.0;
    for (double v : w2.values()) var2 += v * v;
    var2 /= double(w2.size());
    CHECK(var2 < 2.0 / 128.0); // loose: just distinguishes the gains
}

TEST_CASE("discriminator_prob: head semantics and open-interval range") {
    DiscriminatorSpec spec;
    MlpParams zero_d;
    zero_d.layers.push_back({Matrix(2, 4), Matrix(1, 4), ActivationTag::Relu});
    zero_d.layers.push_back({Matrix(4, 1), Matrix(1, 1), ActivationTag::Linear});

    Rng rng(9);
    Matrix x(5, 2);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = 4.0 * rng.uniform01() - 2.0;

    // zero net => raw 0 => logit head gives exactly 0.5
    const Matrix p = discriminator_prob(zero_d, x, HeadMode::Logit);
    for (double v : p.values()) CHECK(v == 0.5);

    // softplus head saturates to the upper clamp for a large raw score
    MlpParams big;
    big.layers.push_back({Matrix(2, 1), Matrix::filled(1, 1, 10.0), ActivationTag::Linear});
    const Matrix ps = discriminator_prob(big, x, HeadMode::Softplus);
    for (double v : ps.values()) CHECK(v == 1.0 - 1e-7);

    // strictly inside (0,1) in both modes, even for extreme raw scores
    for (double raw : {-1e5, -40.0, 0.0, 40.0, 1e5}) {
        MlpParams d;
        d.layers.push_back({Matrix(2, 1), Matrix::filled(1, 1, raw), ActivationTag::Linear});
        for (HeadMode h : {HeadMode::Logit, HeadMode::Softplus}) {
            const Matrix pr = discriminator_prob(d, x, h);
            for (double v : pr.values()) {
                CHECK(v > 0.0);
                CHECK(v < 1.0);
            }
        }
    }

    CHECK_THROWS_AS(discriminator_prob(zero_d, Matrix(3, 5), HeadMode::Logit),
                    DimensionMismatch);
}

TEST_CASE("adam_step: zero grad, first-step magnitude, symmetry, determinism") {
    AdamConfig cfg; // lr 2e-4, beta1 0.5, beta2 0.999, eps 1e-8
    MlpParams p;
    p.layers.push_back({Matrix::filled(1, 1, 0.3), Matrix(1, 1), ActivationTag::Linear});

    SUBCASE("zero gradient leaves parameters untouched, bumps step_count") {
        AdamState st = AdamState::for_params(p, cfg);
        MlpParams copy = p;
        adam_step(st, p, p.zeros_like(), Direction::Descend);
        CHECK(params_equal(p, copy));
        CHECK(st.step_count == 1);
    }

    SUBCASE("first step is ~lr for unit gradient (bias correction)") {
        AdamState st = AdamState::for_params(p, cfg);
        MlpParams grads = p.zeros_like();
        grads.layers[0].w(0, 0) = 3.0;
        const double before = p.layers[0].w(0, 0);
        adam_step(st, p, grads, Direction::Descend);
        const double delta = p.layers[0].w(0, 0) - before;
        // mhat = g, vhat = g^2  =>  |delta| = lr * g / (|g| + eps)
        const double expected = cfg.lr * 3.0 / (3.0 + cfg.eps);
        CHECK(std::fabs(-delta - expected) < 1e-15);
        CHECK(std::fabs(delta) == doctest::Approx(cfg.lr).epsilon(1e-6));
    }

    SUBCASE("ascend then descend with fresh states nets out") {
        MlpParams grads = p.zeros_like();
        grads.layers[0].w(0, 0) = 0.7;
        MlpParams q = p;
        AdamState s1 = AdamState::for_params(q, cfg);
        adam_step(s1, q, grads, Direction::Ascend);
        AdamState s2 = AdamState::for_params(q, cfg);
        adam_step(s2, q, grads, Direction::Descend);
        CHECK(q.layers[0].w(0, 0) == doctest::Approx(p.layers[0].w(0, 0)).epsilon(1e-12));
    }

    SUBCASE("identical inputs give identical outputs") {
        Rng rng(77);
        MlpParams net = init_generator(GeneratorSpec{6, {5}, 2}, rng);
        MlpParams grads = net.zeros_like();
        for (std::size_t t = 0; t < grads.tensor_count(); ++t)
            for (double& v : grads.tensor(t).values()) v = rng.uniform01() - 0.5;
        MlpParams n1 = net, n2 = net;
        AdamState s1 = AdamState::for_params(net, cfg);
        AdamState s2 = AdamState::for_params(net, cfg);
        for (int i = 0; i < 5; ++i) {
            adam_step(s1, n1, grads, Direction::Descend);
            adam_step(s2, n2, grads, Direction::Descend);
        }
        CHECK(params_equal(n1, n2));
    }

    SUBCASE("non-finite gradient is rejected") {
        AdamState st = AdamState::for_params(p, cfg);
        MlpParams grads = p.zeros_like();
        grads.layers[0].w(0, 0) = std::nan("");
        CHECK_THROWS_AS(adam_step(st, p, grads, Direction::Descend), NonFiniteGradient);
    }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mbgan/alpha.hpp"
#include "mbgan/errors.hpp"

using namespace mbgan;

namespace {

AlphaSchedule learned_at(AlphaFn fn, double beta) {
    AlphaSchedule s = AlphaSchedule::learned(fn, AlphaSchedule::default_beta0(fn), AdamConfig{});
    s.beta = beta;
    return s;
}

const AlphaFn kAllFns[] = {AlphaFn::Sigm, AlphaFn::Soft, AlphaFn::Tanh, AlphaFn::Ident};
const AlphaFn kBoundedFns[] = {AlphaFn::Sigm, AlphaFn::Soft, AlphaFn::Tanh};

} // namespace

TEST_CASE("alpha_value: fixed points of the four functions") {
    CHECK(alpha_value(AlphaSchedule::fixed(0.3)) == 0.3);
    CHECK(alpha_value(learned_at(AlphaFn::Sigm, 0.0)) == 0.5);
    CHECK(alpha_value(learned_at(AlphaFn::Tanh, 0.0)) == 0.0);
    CHECK(alpha_value(learned_at(AlphaFn::Soft, 1.0)) == 0.5);
    CHECK(alpha_value(learned_at(AlphaFn::Ident, 0.37)) == 0.37);
    // default sigm start
    CHECK(alpha_value(learned_at(AlphaFn::Sigm, -1.8)) ==
          doctest::Approx(0.14185106490048777).epsilon(1e-9));

    CHECK_THROWS_AS(AlphaSchedule::fixed(1.5), Error);
    CHECK_THROWS_AS(AlphaSchedule::fixed(-0.1), Error);
}

TEST_CASE("alpha_derivative: closed forms and a central-difference check") {
    CHECK(alpha_derivative(learned_at(AlphaFn::Sigm, 0.0)) == 0.25);
    CHECK(alpha_derivative(learned_at(AlphaFn::Ident, 123.0)) == 1.0);
    CHECK(alpha_derivative(learned_at(AlphaFn::Tanh, 0.0)) == 1.0);

    for (AlphaFn fn : kAllFns)
        for (double beta : {-2.0, -0.3, 0.1, 1.7}) {
            const double h = 1e-6;
            const double num =
                (alpha_value(learned_at(fn, beta + h)) - alpha_value(learned_at(fn, beta - h))) /
                (2.0 * h);
            CHECK(alpha_derivative(learned_at(fn, beta)) == doctest::Approx(num).epsilon(1e-8));
        }

    CHECK_THROWS_AS(alpha_derivative(AlphaSchedule::fixed(0.5)),
                    StaticScheduleHasNoGradient);
}

TEST_CASE("alpha_value is non-decreasing in beta") {
    for (AlphaFn fn : kAllFns) {
        double prev = -1e18;
        for (double beta = -6.0; beta <= 6.0; beta += 0.05) {
            const double v = alpha_value(learned_at(fn, beta));
            CHECK(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("bounded functions stay in [0,1) above their floor") {
    for (AlphaFn fn : kBoundedFns) {
        const double floor = AlphaSchedule::default_beta0(fn);
        for (double beta = floor; beta <= 50.0; beta += 0.73) {
            const double v = alpha_value(learned_at(fn, beta));
            CHECK(v >= 0.0);
            CHECK(v < 1.0);
        }
    }
    // Ident is unbounded: surpasses 1 once beta does
    CHECK(alpha_value(learned_at(AlphaFn::Ident, 1.25)) > 1.0);
}

TEST_CASE("growth saturates for the bounded functions") {
    // Sigm and Tanh are far below 1e-3 at beta = 10; Softsign decays only
    // quadratically and sits at exactly 1/121 there.
    CHECK(alpha_derivative(learned_at(AlphaFn::Sigm, 10.0)) < 1e-3);
    CHECK(alpha_derivative(learned_at(AlphaFn::Tanh, 10.0)) < 1e-3);
    CHECK(alpha_derivative(learned_at(AlphaFn::Soft, 10.0)) == 1.0 / 121.0);
    CHECK(alpha_derivative(learned_at(AlphaFn::Soft, 10.0)) < 1e-2);
    // and keeps decaying
    CHECK(alpha_derivative(learned_at(AlphaFn::Soft, 40.0)) <
          alpha_derivative(learned_at(AlphaFn::Soft, 10.0)));
}

TEST_CASE("update_beta: direction, floor clamp, error paths") {
    SUBCASE("zero gradient leaves beta in place") {
        AlphaSchedule s = AlphaSchedule::learned(AlphaFn::Sigm, -1.8, AdamConfig{});
        update_beta(s, 0.0);
        CHECK(s.beta == -1.8);
    }

    SUBCASE("negative dloss_dalpha raises beta, never lowers it") {
        AlphaSchedule s = AlphaSchedule::learned(AlphaFn::Sigm, -1.8, AdamConfig{});
        Rng rng(5);
        double prev = s.beta;
        for (int i = 0; i < 200; ++i) {
            update_beta(s, -3.0 * rng.uniform01() - 0.01); // always < 0
            CHECK(s.beta >= prev);
            prev = s.beta;
        }
        CHECK(s.beta > -1.8);
    }

    SUBCASE("floor clamp holds at the Soft floor 0") {
        AlphaSchedule s = AlphaSchedule::learned(AlphaFn::Soft, 0.0, AdamConfig{});
        update_beta(s, +5.0); // pushes beta below 0
        CHECK(s.beta == 0.0);
    }

    SUBCASE("static schedules and non-finite gradients are rejected") {
        AlphaSchedule fixed = AlphaSchedule::fixed(0.2);
        CHECK_THROWS_AS(update_beta(fixed, -1.0), StaticScheduleHasNoGradient);
        AlphaSchedule s = AlphaSchedule::learned(AlphaFn::Tanh, 0.0, AdamConfig{});
        CHECK_THROWS_AS(update_beta(s, std::nan("")), NonFiniteGradient);
    }
}

#include "mbgan/synthdata.hpp"

#include <cmath>

#include "mbgan/errors.hpp"

namespace mbgan {

std::vector<std::array<double, 2>> RingMixture::centers() const {
    if (n_modes == 0) throw Error("RingMixture: n_modes must be >= 1");
    if (!(mode_std > 0.0)) throw Error("RingMixture: mode_std must be > 0");
    std::vector<std::array<double, 2>> out(n_modes);
    for (std::size_t k = 0; k < n_modes; ++k) {
        const double angle = 2.0 * 3.14159265358979323846 * double(k) / double(n_modes);
        out[k] = {radius * std::cos(angle), radius * std::sin(angle)};
    }
    return out;
}

Matrix sample_real(const RingMixture& mix, std::size_t n, Rng& rng) {
    const auto centers = mix.centers();
    Matrix out(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centers[rng.below(mix.n_modes)];
        out(i, 0) = c[0] + mix.mode_std * rng.normal();
        out(i, 1) = c[1] + mix.mode_std * rng.normal();
    }
    return out;
}

Matrix sample_latent(std::size_t dim, std::size_t n, Rng& rng) {
    Matrix out(n, dim);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = rng.normal();
    return out;
}

} // namespace mbgan

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "mbgan/matrix.hpp"
#include "mbgan/rng.hpp"

namespace mbgan {

// Ring of equally spaced isotropic Gaussians: the classic 2D mode-collapse
// benchmark. Centers sit exactly on the circle at angles 2*pi*k/n_modes.
struct RingMixture {
    std::size_t n_modes = 8;
    double radius = 2.0;
    double mode_std = 0.02;

    std::vector<std::array<double, 2>> centers() const;
};

// Each row: uniformly chosen center plus isotropic N(0, mode_std^2) noise.
// Draw order per row: center index, x-noise, y-noise.
Matrix sample_real(const RingMixture& mix, std::size_t n, Rng& rng);

// i.i.d. standard normal entries, drawn row-major.
Matrix sample_latent(std::size_t dim, std::size_t n, Rng& rng);

} // namespace mbgan

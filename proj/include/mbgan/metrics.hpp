#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mbgan/matrix.hpp"
#include "mbgan/rng.hpp"
#include "mbgan/synthdata.hpp"

namespace mbgan {

// Gaussian fit of a 2D sample set: mean, unbiased covariance, sample count.
struct GaussianMoments {
    std::array<double, 2> mean{};
    std::array<double, 4> cov{}; // row-major 2x2, symmetric
    std::size_t n = 0;
};

GaussianMoments fit_moments(const Matrix& samples); // TooFewSamples if n < 2

// Principal square root of a symmetric PSD 2x2 matrix, closed form:
// sqrt(A) = (A + sqrt(det A) I) / sqrt(tr A + 2 sqrt(det A)).
std::array<double, 4> sqrt2x2_psd(const std::array<double, 4>& a);

// Squared Frechet distance between two Gaussian fits:
//   |mu1-mu2|^2 + tr(S1 + S2 - 2 (S1 S2)^(1/2))
// with the cross term computed via the symmetrized product
// S1^(1/2) S2 S1^(1/2), exact at 2x2. Symmetric in its arguments,
// non-negative, zero iff the moments coincide.
double frechet_distance(const GaussianMoments& a, const GaussianMoments& b);

// Frechet distance between two disjoint random subsets of the generated
// set; zero under total collapse, sampling noise otherwise. Requires
// generated.rows() >= 2*subset_size.
double intra_fid(const Matrix& generated, std::size_t subset_size, Rng& rng);

struct ModeCoverage {
    std::size_t modes_captured = 0;
    double hq_fraction = 0.0;
    std::vector<double> per_mode_share; // hq samples per mode / total samples
};

// A sample is high-quality if it lies within threshold_stds * mode_std of
// its nearest center; a mode is captured if its high-quality share is at
// least 1% of all generated samples.
ModeCoverage mode_coverage(const Matrix& generated, const RingMixture& mix,
                           double threshold_stds = 3.0);

// Shannon entropy of the share distribution (shares normalized to sum 1;
// all-zero shares give 0). Measures spread across modes, not capture level.
double mode_entropy(std::span<const double> shares);

struct MetricsRecord {
    std::int64_t iteration = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double intra_fid = 0.0;
    double fid_to_real = 0.0;
    std::size_t modes_captured = 0;
    double hq_fraction = 0.0;
    std::vector<double> per_mode_share;
    std::vector<double> d_losses;
    double g_loss = 0.0;
};

double cumulative_intra_fid(std::span<const MetricsRecord> records);

// (mean, min) of fid_to_real across records. EmptySequence if none.
std::pair<double, double> mean_min_fid(std::span<const MetricsRecord> records);

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& r);

} // namespace mbgan

#include "mbgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mbgan/errors.hpp"

namespace mbgan {
namespace {

constexpr double kSymTol = 1e-12;
constexpr double kPsdTol = 1e-10;

// Eigenvalues of a symmetric 2x2 [[a,b],[b,d]].
std::pair<double, double> sym_eigenvalues(double a, double b, double d) {
    const double tr = a + d;
    const double det = a * d - b * b;
    double disc = tr * tr / 4.0 - det;
    if (disc < 0.0) disc = 0.0; // symmetric => real spectrum; noise only
    const double root = std::sqrt(disc);
    return {tr / 2.0 - root, tr / 2.0 + root};
}

void check_psd(const std::array<double, 4>& c, const char* which) {
    if (std::fabs(c[1] - c[2]) > kSymTol)
        throw NonPSDCovariance(std::string(which) + ": covariance not symmetric");
    const auto [lo, hi] = sym_eigenvalues(c[0], 0.5 * (c[1] + c[2]), c[3]);
    (void)hi;
    if (lo < -kPsdTol)
        throw NonPSDCovariance(std::string(which) + ": eigenvalue " + std::to_string(lo));
}

std::array<double, 4> mul2x2(const std::array<double, 4>& x, const std::array<double, 4>& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
            x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

GaussianMoments fit_moments(const Matrix& samples) {
    if (samples.cols() != 2)
        throw DimensionMismatch("fit_moments: expected 2 columns, got " +
                                std::to_string(samples.cols()));
    const std::size_t n = samples.rows();
    if (n < 2) throw TooFewSamples("fit_moments: need at least 2 samples");

    GaussianMoments g;
    g.n = n;
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += samples(i, 0);
        sy += samples(i, 1);
    }
    g.mean = {sx / double(n), sy / double(n)};
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = samples(i, 0) - g.mean[0];
        const double dy = samples(i, 1) - g.mean[1];
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }
    const double denom = double(n - 1);
    g.cov = {cxx / denom, cxy / denom, cxy / denom, cyy / denom};
    return g;
}

std::array<double, 4> sqrt2x2_psd(const std::array<double, 4>& a) {
    const double tr = a[0] + a[3];
    double det = a[0] * a[3] - a[1] * a[2];
    if (det < 0.0) det = 0.0;
    const double s = std::sqrt(det);
    const double t2 = tr + 2.0 * s;
    if (t2 <= 0.0) return {0.0, 0.0, 0.0, 0.0};
    const double t = std::sqrt(t2);
    return {(a[0] + s) / t, a[1] / t, a[2] / t, (a[3] + s) / t};
}

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b) {
    check_psd(a.cov, "frechet_distance: first argument");
    check_psd(b.cov, "frechet_distance: second argument");

    const double dx = a.mean[0] - b.mean[0];
    const double dy = a.mean[1] - b.mean[1];
    const double mean_term = dx * dx + dy * dy;

    // tr((S1 S2)^(1/2)) via the PSD product S1^(1/2) S2 S1^(1/2), which has
    // the same eigenvalues; for PSD 2x2, tr(sqrt(M)) = sqrt(tr M + 2 sqrt(det M)).
    const auto r1 = sqrt2x2_psd(a.cov);
    auto m = mul2x2(mul2x2(r1, b.cov), r1);
    const double off = 0.5 * (m[1] + m[2]);
    m[1] = off;
    m[2] = off;
    const double tr_m = m[0] + m[3];
    double det_m = m[0] * m[3] - m[1] * m[2];
    if (det_m < 0.0) det_m = 0.0;
    double inner = tr_m + 2.0 * std::sqrt(det_m);
    if (inner < 0.0) inner = 0.0;
    const double tr_sqrt = std::sqrt(inner);

    double d2 = mean_term + (a.cov[0] + a.cov[3]) + (b.cov[0] + b.cov[3]) - 2.0 * tr_sqrt;
    return d2 < 0.0 ? 0.0 : d2;
}

double intra_fid(const Matrix& generated, std::size_t subset_size, Rng& rng) {
    if (subset_size < 2) throw TooFewSamples("intra_fid: subset_size must be >= 2");
    const std::size_t n = generated.rows();
    if (n < 2 * subset_size)
        throw TooFewSamples("intra_fid: need at least " + std::to_string(2 * subset_size) +
                            " samples, got " + std::to_string(n));

    // Partial Fisher-Yates: the first 2*subset_size slots become a uniform
    // draw of distinct indices.
    std::vector<std::uint32_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = std::uint32_t(i);
    for (std::size_t i = 0; i < 2 * subset_size; ++i)
        std::swap(idx[i], idx[i + rng.below(n - i)]);

    const auto a = fit_moments(generated.gather_rows({idx.data(), subset_size}));
    const auto b = fit_moments(generated.gather_rows({idx.data() + subset_size, subset_size}));
    return frechet_distance(a, b);
}

ModeCoverage mode_coverage(const Matrix& generated, const RingMixture& mix,
                           double threshold_stds) {
    if (!(threshold_stds > 0.0)) throw Error("mode_coverage: threshold_stds must be > 0");
    const auto centers = mix.centers();
    ModeCoverage out;
    out.per_mode_share.assign(mix.n_modes, 0.0);
    const std::size_t n = generated.rows();
    if (n == 0) return out;

    const double hq_radius = threshold_stds * mix.mode_std;
    std::vector<std::size_t> hq_counts(mix.n_modes, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = generated(i, 0);
        const double y = generated(i, 1);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < mix.n_modes; ++k) {
            const double dx = x - centers[k][0];
            const double dy = y - centers[k][1];
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                best_k = k;
            }
        }
        if (best <= hq_radius * hq_radius) ++hq_counts[best_k];
    }

    std::size_t hq_total = 0;
    for (std::size_t k = 0; k < mix.n_modes; ++k) {
        out.per_mode_share[k] = double(hq_counts[k]) / double(n);
        hq_total += hq_counts[k];
        if (out.per_mode_share[k] >= 0.01) ++out.modes_captured;
    }
    out.hq_fraction = double(hq_total) / double(n);
    return out;
}

double mode_entropy(std::span<const double> shares) {
    double total = 0.0;
    for (double p : shares) total += p;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double p : shares)
        if (p > 0.0) {
            const double q = p / total;
            h -= q * std::log(q);
        }
    return h;
}

double cumulative_intra_fid(std::span<const MetricsRecord> records) {
    double sum = 0.0;
    for (const auto& r : records) sum += r.intra_fid;
    return sum;
}

std::pair<double, double> mean_min_fid(std::span<const MetricsRecord> records) {
    if (records.empty()) throw EmptySequence("mean_min_fid: no records");
    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        sum += r.fid_to_real;
        mn = std::min(mn, r.fid_to_real);
    }
    return {sum / double(records.size()), mn};
}

std::string metrics_csv_header() {
    return "iteration,alpha,beta,intra_fid,fid_to_real,modes_captured,hq_fraction,g_loss,"
           "d_loss_mean";
}

std::string metrics_csv_row(const MetricsRecord& r) {
    double d_mean = 0.0;
    for (double v : r.d_losses) d_mean += v;
    if (!r.d_losses.empty()) d_mean /= double(r.d_losses.size());
    std::string row = std::to_string(r.iteration);
    row += ',';
    row += fmt_double(r.alpha);
    row += ',';
    row += fmt_double(r.beta);
    row += ',';
    row += fmt_double(r.intra_fid);
    row += ',';
    row += fmt_double(r.fid_to_real);
    row += ',';
    row += std::to_string(r.modes_captured);
    row += ',';
    row += fmt_double(r.hq_fraction);
    row += ',';
    row += fmt_double(r.g_loss);
    row += ',';
    row += fmt_double(d_mean);
    return row;
}

} // namespace mbgan

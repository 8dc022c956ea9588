#include "mbgan/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "mbgan/errors.hpp"

namespace mbgan {
namespace {

constexpr double kExtent = 3.0; // viewport is [-3,3]^2
constexpr int kSize = 640;

double to_px(double v) { return (v + kExtent) / (2.0 * kExtent) * kSize; }

void append_points(std::string& svg, const Matrix& pts, const char* color, double radius) {
    char buf[160];
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        const double x = to_px(pts(i, 0));
        const double y = kSize - to_px(pts(i, 1));
        if (!std::isfinite(x) || !std::isfinite(y)) continue;
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\" "
                      "fill-opacity=\"0.6\"/>\n",
                      x, y, radius, color);
        svg += buf;
    }
}

double point_radius(std::size_t n) {
    if (n == 0) return 2.0;
    return std::clamp(60.0 / std::sqrt(double(n)), 0.6, 3.0);
}

} // namespace

std::string render_scatter_svg(const Matrix& real, const Matrix& fake) {
    if ((real.rows() > 0 && real.cols() != 2) || (fake.rows() > 0 && fake.cols() != 2))
        throw DimensionMismatch("render_scatter_svg: inputs must have 2 columns");

    std::string svg;
    svg.reserve(128 * (real.rows() + fake.rows()) + 512);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                  "viewBox=\"0 0 %d %d\">\n",
                  kSize, kSize, kSize, kSize);
    svg += buf;
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // light axes through the origin
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"0\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"#dddddd\"/>\n"
                  "<line x1=\"%d\" y1=\"0\" x2=\"%d\" y2=\"%d\" stroke=\"#dddddd\"/>\n",
                  kSize / 2, kSize, kSize / 2, kSize / 2, kSize / 2, kSize);
    svg += buf;
    append_points(svg, real, "#d62728", point_radius(real.rows()));
    append_points(svg, fake, "#1f77b4", point_radius(fake.rows()));
    svg += "</svg>\n";
    return svg;
}

void emit_scatter_svg(const Matrix& real, const Matrix& fake, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    const std::string svg = render_scatter_svg(real, fake);
    out.write(svg.data(), std::streamsize(svg.size()));
    if (!out) throw IoError("write failed: " + path);
}

} // namespace mbgan

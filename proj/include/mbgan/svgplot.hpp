#pragma once

#include <string>

#include "mbgan/matrix.hpp"

namespace mbgan {

// Standalone scatter plot: real points red, generated points blue, fixed
// [-3,3]^2 viewport, point radius scaled to the sample count. Same inputs
// produce byte-identical output.
std::string render_scatter_svg(const Matrix& real, const Matrix& fake);

void emit_scatter_svg(const Matrix& real, const Matrix& fake, const std::string& path);

} // namespace mbgan

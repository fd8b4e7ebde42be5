#pragma once

// Bilinear resampling with half-pixel centers (the "align_corners = false"
// convention): output pixel i samples source coordinate (i + 0.5) * scale - 0.5,
// clamped to the valid range.

#include <Eigen/Core>

namespace inptpu {

/// Samples a 2D array at fractional (row, col) with edge clamping.
float sample_bilinear(const Eigen::ArrayXXf& src, double row, double col);

/// Resizes a 2D array to rows x cols.
Eigen::ArrayXXf resize_bilinear(const Eigen::ArrayXXf& src, int rows, int cols);

}  // namespace inptpu

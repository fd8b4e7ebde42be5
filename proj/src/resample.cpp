#include "inptpu/resample.hpp"

#include <algorithm>
#include <cmath>

#include "inptpu/errors.hpp"

namespace inptpu {

float sample_bilinear(const Eigen::ArrayXXf& src, double row, double col) {
  const double max_r = static_cast<double>(src.rows() - 1);
  const double max_c = static_cast<double>(src.cols() - 1);
  row = std::clamp(row, 0.0, max_r);
  col = std::clamp(col, 0.0, max_c);
  const auto r0 = static_cast<Eigen::Index>(std::floor(row));
  const auto c0 = static_cast<Eigen::Index>(std::floor(col));
  const Eigen::Index r1 = std::min<Eigen::Index>(r0 + 1, src.rows() - 1);
  const Eigen::Index c1 = std::min<Eigen::Index>(c0 + 1, src.cols() - 1);
  const double fr = row - static_cast<double>(r0);
  const double fc = col - static_cast<double>(c0);
  const double top = (1.0 - fc) * src(r0, c0) + fc * src(r0, c1);
  const double bottom = (1.0 - fc) * src(r1, c0) + fc * src(r1, c1);
  return static_cast<float>((1.0 - fr) * top + fr * bottom);
}

Eigen::ArrayXXf resize_bilinear(const Eigen::ArrayXXf& src, int rows, int cols) {
  if (rows < 1 || cols < 1 || src.rows() < 1 || src.cols() < 1) {
    throw DimensionError("resize_bilinear: empty source or target");
  }
  const double sr = static_cast<double>(src.rows()) / rows;
  const double sc = static_cast<double>(src.cols()) / cols;
  Eigen::ArrayXXf out(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      out(r, c) = sample_bilinear(src, (r + 0.5) * sr - 0.5, (c + 0.5) * sc - 0.5);
    }
  }
  return out;
}

}  // namespace inptpu

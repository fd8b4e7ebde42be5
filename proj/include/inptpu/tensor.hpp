#pragma once

// Dense containers shared by every stage of the pipeline.  All pixel and
// latent data is stored frame-major, then row, column, channel, in a single
// contiguous Eigen array.

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "inptpu/errors.hpp"

namespace inptpu {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMatrixf = RowMatrix<float>;

struct Shape4 {
  int frames = 0;
  int height = 0;
  int width = 0;
  int channels = 0;

  [[nodiscard]] std::size_t size() const {
    return static_cast<std::size_t>(frames) * height * width * channels;
  }
  bool operator==(const Shape4&) const = default;
};

/// F x H x W x C block of scalars with frame-major layout.
template <typename Scalar>
struct Tensor4 {
  Shape4 shape;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> values;

  Tensor4() = default;
  explicit Tensor4(Shape4 s, Scalar fill = Scalar(0))
      : shape(s), values(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Constant(
                      static_cast<Eigen::Index>(s.size()), fill)) {}

  [[nodiscard]] Eigen::Index index(int f, int y, int x, int c) const {
    return ((static_cast<Eigen::Index>(f) * shape.height + y) * shape.width + x) *
               shape.channels + c;
  }
  Scalar& operator()(int f, int y, int x, int c) { return values[index(f, y, x, c)]; }
  Scalar operator()(int f, int y, int x, int c) const { return values[index(f, y, x, c)]; }

  [[nodiscard]] int frames() const { return shape.frames; }
  [[nodiscard]] int height() const { return shape.height; }
  [[nodiscard]] int width() const { return shape.width; }
  [[nodiscard]] int channels() const { return shape.channels; }
};

/// Pixel video, values in [0,1] at pipeline boundaries.  A single image is a
/// one-frame video.
struct VideoTensor : Tensor4<float> {
  double frame_rate = 8.0;

  VideoTensor() = default;
  explicit VideoTensor(Shape4 s, float fill = 0.0f) : Tensor4<float>(s, fill) {}

  [[nodiscard]] VideoTensor frame(int f) const;
  void set_frame(int f, const VideoTensor& image);
  [[nodiscard]] VideoTensor frames_range(int begin, int count) const;
};

/// Concatenates videos along the frame axis.
VideoTensor concat_frames(const std::vector<VideoTensor>& parts);

struct LatentTensor : Tensor4<float> {
  int spatial_factor = 4;
  int temporal_factor = 1;

  LatentTensor() = default;
  LatentTensor(Shape4 s, int spatial, int temporal, float fill = 0.0f)
      : Tensor4<float>(s, fill), spatial_factor(spatial), temporal_factor(temporal) {}
};

/// One mask frame; rows index image rows, columns index image columns.
using Mask2D = Eigen::ArrayXXf;

struct MaskVideo {
  std::vector<Mask2D> frames;

  MaskVideo() = default;
  explicit MaskVideo(std::vector<Mask2D> f) : frames(std::move(f)) {}
  MaskVideo(int count, int height, int width, float fill = 0.0f)
      : frames(static_cast<std::size_t>(count), Mask2D::Constant(height, width, fill)) {}

  [[nodiscard]] int size() const { return static_cast<int>(frames.size()); }
  [[nodiscard]] int height() const { return frames.empty() ? 0 : static_cast<int>(frames[0].rows()); }
  [[nodiscard]] int width() const { return frames.empty() ? 0 : static_cast<int>(frames[0].cols()); }
  [[nodiscard]] MaskVideo range(int begin, int count) const;
};

/// Object reference crop, H_r x W_r x C.
struct ReferenceImage {
  VideoTensor pixels;  // single frame

  ReferenceImage() = default;
  explicit ReferenceImage(VideoTensor p);
  [[nodiscard]] int height() const { return pixels.height(); }
  [[nodiscard]] int width() const { return pixels.width(); }
  [[nodiscard]] double aspect() const {
    return static_cast<double>(pixels.height()) / pixels.width();
  }
};

/// Replaces the masked region by neutral gray: v * (1 - m) + 0.5 * m.
VideoTensor apply_gray_fill(const VideoTensor& video, const MaskVideo& mask);

/// Pixel-space paste-back: generated * m + source * (1 - m).
VideoTensor composite(const VideoTensor& generated, const VideoTensor& source, const MaskVideo& mask);

/// Side-by-side join along the width axis; both parts need equal F, H, C.
VideoTensor hconcat(const VideoTensor& left, const VideoTensor& right);
MaskVideo hconcat(const MaskVideo& left, const MaskVideo& right);

bool all_finite(const VideoTensor& v);
bool in_unit_range(const VideoTensor& v);

}  // namespace inptpu

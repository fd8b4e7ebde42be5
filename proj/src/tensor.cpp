#include "inptpu/tensor.hpp"

#include <string>

namespace inptpu {

VideoTensor VideoTensor::frame(int f) const {
  return frames_range(f, 1);
}

VideoTensor VideoTensor::frames_range(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > shape.frames) {
    throw DimensionError("frame range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") outside video of " +
                         std::to_string(shape.frames) + " frames");
  }
  VideoTensor out(Shape4{count, shape.height, shape.width, shape.channels});
  out.frame_rate = frame_rate;
  const Eigen::Index per_frame = static_cast<Eigen::Index>(shape.height) * shape.width * shape.channels;
  out.values = values.segment(begin * per_frame, count * per_frame);
  return out;
}

void VideoTensor::set_frame(int f, const VideoTensor& image) {
  if (image.frames() != 1 || image.height() != shape.height || image.width() != shape.width ||
      image.channels() != shape.channels) {
    throw ShapeMismatchError("set_frame: image shape does not match video frame");
  }
  if (f < 0 || f >= shape.frames) throw DimensionError("set_frame: frame index out of range");
  const Eigen::Index per_frame = image.values.size();
  values.segment(f * per_frame, per_frame) = image.values;
}

VideoTensor concat_frames(const std::vector<VideoTensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_frames: no parts");
  Shape4 s = parts.front().shape;
  int total = 0;
  for (const auto& p : parts) {
    if (p.height() != s.height || p.width() != s.width || p.channels() != s.channels) {
      throw ShapeMismatchError("concat_frames: frame geometry differs between parts");
    }
    total += p.frames();
  }
  s.frames = total;
  VideoTensor out(s);
  out.frame_rate = parts.front().frame_rate;
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    out.values.segment(offset, p.values.size()) = p.values;
    offset += p.values.size();
  }
  return out;
}

MaskVideo MaskVideo::range(int begin, int count) const {
  if (begin < 0 || count < 0 || begin + count > size()) {
    throw DimensionError("mask frame range outside mask video");
  }
  return MaskVideo(std::vector<Mask2D>(frames.begin() + begin, frames.begin() + begin + count));
}

ReferenceImage::ReferenceImage(VideoTensor p) : pixels(std::move(p)) {
  if (pixels.frames() != 1 || pixels.height() < 1 || pixels.width() < 1) {
    throw DimensionError("reference image must be a single frame of at least 1x1 pixels");
  }
}

namespace {

void check_mask_matches(const VideoTensor& video, const MaskVideo& mask) {
  if (mask.size() != video.frames() || mask.height() != video.height() ||
      mask.width() != video.width()) {
    throw ShapeMismatchError("mask video geometry does not match video");
  }
}

}  // namespace

VideoTensor apply_gray_fill(const VideoTensor& video, const MaskVideo& mask) {
  check_mask_matches(video, mask);
  VideoTensor out = video;
  for (int f = 0; f < video.frames(); ++f) {
    const Mask2D& m = mask.frames[f];
    for (int y = 0; y < video.height(); ++y) {
      for (int x = 0; x < video.width(); ++x) {
        const float w = m(y, x);
        for (int c = 0; c < video.channels(); ++c) {
          float& v = out(f, y, x, c);
          v = v * (1.0f - w) + 0.5f * w;
        }
      }
    }
  }
  return out;
}

VideoTensor composite(const VideoTensor& generated, const VideoTensor& source, const MaskVideo& mask) {
  if (generated.shape != source.shape) throw ShapeMismatchError("composite: video shapes differ");
  check_mask_matches(source, mask);
  VideoTensor out = source;
  for (int f = 0; f < source.frames(); ++f) {
    const Mask2D& m = mask.frames[f];
    for (int y = 0; y < source.height(); ++y) {
      for (int x = 0; x < source.width(); ++x) {
        const float w = m(y, x);
        if (w == 0.0f) continue;
        for (int c = 0; c < source.channels(); ++c) {
          out(f, y, x, c) = generated(f, y, x, c) * w + source(f, y, x, c) * (1.0f - w);
        }
      }
    }
  }
  return out;
}

VideoTensor hconcat(const VideoTensor& left, const VideoTensor& right) {
  if (left.frames() != right.frames() || left.height() != right.height() ||
      left.channels() != right.channels()) {
    throw ShapeMismatchError("hconcat: videos differ in frames, height or channels");
  }
  VideoTensor out(Shape4{left.frames(), left.height(), left.width() + right.width(), left.channels()});
  out.frame_rate = left.frame_rate;
  for (int f = 0; f < left.frames(); ++f) {
    for (int y = 0; y < left.height(); ++y) {
      for (int x = 0; x < out.width(); ++x) {
        for (int c = 0; c < out.channels(); ++c) {
          out(f, y, x, c) = x < left.width() ? left(f, y, x, c) : right(f, y, x - left.width(), c);
        }
      }
    }
  }
  return out;
}

MaskVideo hconcat(const MaskVideo& left, const MaskVideo& right) {
  if (left.size() != right.size() || left.height() != right.height()) {
    throw ShapeMismatchError("hconcat: masks differ in frames or height");
  }
  MaskVideo out;
  out.frames.reserve(left.frames.size());
  for (int f = 0; f < left.size(); ++f) {
    Mask2D m(left.height(), left.width() + right.width());
    m << left.frames[f], right.frames[f];
    out.frames.push_back(std::move(m));
  }
  return out;
}

bool all_finite(const VideoTensor& v) { return v.values.isFinite().all(); }

bool in_unit_range(const VideoTensor& v) {
  return v.values.size() == 0 || (v.values.minCoeff() >= 0.0f && v.values.maxCoeff() <= 1.0f);
}

}  // namespace inptpu

#pragma once

// PNG frame directories: frames are `%05d.png`, 8-bit.  Videos are RGB,
// masks are grayscale with 0 -> 0.0 and 255 -> 1.0.

#include <filesystem>
#include <string>

#include "inptpu/tensor.hpp"

namespace inptpu::image_io {

/// Rounds every value to the nearest 8-bit level (what a PNG round trip keeps).
float quantize8(float v);
void quantize8(VideoTensor& video);
void quantize8(Mask2D& mask);

void write_png(const std::filesystem::path& path, const VideoTensor& image);  // one frame, 1 or 3 channels
VideoTensor read_png(const std::filesystem::path& path, int channels = 3);

void write_mask_png(const std::filesystem::path& path, const Mask2D& mask);
Mask2D read_mask_png(const std::filesystem::path& path);

std::string frame_name(int index);

void write_video_dir(const std::filesystem::path& dir, const VideoTensor& video);
VideoTensor read_video_dir(const std::filesystem::path& dir);

void write_mask_dir(const std::filesystem::path& dir, const MaskVideo& mask);
MaskVideo read_mask_dir(const std::filesystem::path& dir);

/// Number of consecutive `%05d.png` frames starting at 00000.
int count_frames(const std::filesystem::path& dir);

}  // namespace inptpu::image_io

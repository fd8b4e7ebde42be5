#include "inptpu/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace inptpu::image_io {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t to_byte(float v) {
  const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<std::uint8_t>(std::lround(c * 255.0f));
}

void write_raw(const fs::path& path, int height, int width, int channels, const std::vector<std::uint8_t>& bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw DataError("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed to encode '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(bytes.data() + y * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> read_raw(const fs::path& path, int channels, int& height, int& width) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw DataError("cannot open '" + path.string() + "'");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("failed to decode '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  const bool is_gray = color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA;
  if (channels == 3 && is_gray) png_set_gray_to_rgb(png);
  if (channels == 1 && !is_gray) png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(width) * channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("unsupported PNG layout in '" + path.string() + "'");
  }
  std::vector<std::uint8_t> bytes(rowbytes * height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) rows[y] = bytes.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return bytes;
}

}  // namespace

float quantize8(float v) { return static_cast<float>(to_byte(v)) / 255.0f; }

void quantize8(VideoTensor& video) {
  for (Eigen::Index i = 0; i < video.values.size(); ++i) video.values[i] = quantize8(video.values[i]);
}

void quantize8(Mask2D& mask) {
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = quantize8(mask.data()[i]);
}

void write_png(const fs::path& path, const VideoTensor& image) {
  if (image.frames() != 1 || (image.channels() != 1 && image.channels() != 3)) {
    throw DimensionError("write_png: expects one frame with 1 or 3 channels");
  }
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(image.values.size()));
  for (Eigen::Index i = 0; i < image.values.size(); ++i) bytes[i] = to_byte(image.values[i]);
  write_raw(path, image.height(), image.width(), image.channels(), bytes);
}

VideoTensor read_png(const fs::path& path, int channels) {
  if (channels != 1 && channels != 3) throw DimensionError("read_png: channels must be 1 or 3");
  int h = 0, w = 0;
  const std::vector<std::uint8_t> bytes = read_raw(path, channels, h, w);
  VideoTensor out(Shape4{1, h, w, channels});
  for (std::size_t i = 0; i < bytes.size(); ++i) out.values[static_cast<Eigen::Index>(i)] = bytes[i] / 255.0f;
  return out;
}

void write_mask_png(const fs::path& path, const Mask2D& mask) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(mask.size()));
  for (Eigen::Index r = 0; r < mask.rows(); ++r) {
    for (Eigen::Index c = 0; c < mask.cols(); ++c) bytes[r * mask.cols() + c] = to_byte(mask(r, c));
  }
  write_raw(path, static_cast<int>(mask.rows()), static_cast<int>(mask.cols()), 1, bytes);
}

Mask2D read_mask_png(const fs::path& path) {
  int h = 0, w = 0;
  const std::vector<std::uint8_t> bytes = read_raw(path, 1, h, w);
  Mask2D m(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) m(r, c) = bytes[static_cast<std::size_t>(r) * w + c] / 255.0f;
  }
  return m;
}

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05d.png", index);
  return buf;
}

int count_frames(const fs::path& dir) {
  int n = 0;
  while (fs::exists(dir / frame_name(n))) ++n;
  return n;
}

void write_video_dir(const fs::path& dir, const VideoTensor& video) {
  fs::create_directories(dir);
  for (int f = 0; f < video.frames(); ++f) write_png(dir / frame_name(f), video.frame(f));
}

VideoTensor read_video_dir(const fs::path& dir) {
  const int n = count_frames(dir);
  if (n == 0) throw DataError("no frames found in '" + dir.string() + "'");
  std::vector<VideoTensor> frames;
  frames.reserve(static_cast<std::size_t>(n));
  for (int f = 0; f < n; ++f) frames.push_back(read_png(dir / frame_name(f), 3));
  return concat_frames(frames);
}

void write_mask_dir(const fs::path& dir, const MaskVideo& mask) {
  fs::create_directories(dir);
  for (int f = 0; f < mask.size(); ++f) write_mask_png(dir / frame_name(f), mask.frames[f]);
}

MaskVideo read_mask_dir(const fs::path& dir) {
  const int n = count_frames(dir);
  if (n == 0) throw DataError("no mask frames found in '" + dir.string() + "'");
  MaskVideo m;
  for (int f = 0; f < n; ++f) m.frames.push_back(read_mask_png(dir / frame_name(f)));
  return m;
}

}  // namespace inptpu::image_io

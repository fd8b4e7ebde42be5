#include "inptpu/latent_codec.hpp"

#include <string>

namespace inptpu::latent_codec {

Shape4 latent_shape(const Shape4& v, int spatial_factor, int temporal_factor) {
  if (spatial_factor < 1 || temporal_factor < 1) {
    throw DimensionError("codec factors must be positive");
  }
  if (v.frames < 1 || v.height < 1 || v.width < 1 || v.channels < 1) {
    throw DimensionError("video must have at least one frame, pixel and channel");
  }
  if (v.height % spatial_factor != 0 || v.width % spatial_factor != 0) {
    throw DimensionError("video " + std::to_string(v.height) + "x" + std::to_string(v.width) +
                         " not divisible by spatial factor " + std::to_string(spatial_factor));
  }
  if (v.frames % temporal_factor != 0) {
    throw DimensionError("frame count " + std::to_string(v.frames) +
                         " not divisible by temporal factor " + std::to_string(temporal_factor));
  }
  return Shape4{v.frames / temporal_factor, v.height / spatial_factor, v.width / spatial_factor,
                v.channels * spatial_factor * spatial_factor * temporal_factor};
}

LatentTensor encode(const VideoTensor& video, int spatial_factor, int temporal_factor) {
  const Shape4 ls = latent_shape(video.shape, spatial_factor, temporal_factor);
  LatentTensor latent(ls, spatial_factor, temporal_factor);
  const int s = spatial_factor;
  const int C = video.channels();
  for (int f = 0; f < ls.frames; ++f) {
    for (int y = 0; y < ls.height; ++y) {
      for (int x = 0; x < ls.width; ++x) {
        for (int dt = 0; dt < temporal_factor; ++dt) {
          for (int dy = 0; dy < s; ++dy) {
            for (int dx = 0; dx < s; ++dx) {
              const int base = ((dt * s + dy) * s + dx) * C;
              for (int c = 0; c < C; ++c) {
                latent(f, y, x, base + c) =
                    video(f * temporal_factor + dt, y * s + dy, x * s + dx, c);
              }
            }
          }
        }
      }
    }
  }
  return latent;
}

VideoTensor decode(const LatentTensor& latent, int pixel_channels) {
  const int s = latent.spatial_factor;
  const int tf = latent.temporal_factor;
  if (s < 1 || tf < 1 || pixel_channels < 1) throw DimensionError("decode: invalid codec metadata");
  if (latent.channels() != pixel_channels * s * s * tf) {
    throw DimensionError("decode: latent has " + std::to_string(latent.channels()) +
                         " channels, expected " + std::to_string(pixel_channels * s * s * tf));
  }
  if (static_cast<Eigen::Index>(latent.shape.size()) != latent.values.size()) {
    throw DimensionError("decode: latent storage does not match its shape");
  }
  VideoTensor video(Shape4{latent.frames() * tf, latent.height() * s, latent.width() * s, pixel_channels});
  const int C = pixel_channels;
  for (int f = 0; f < latent.frames(); ++f) {
    for (int y = 0; y < latent.height(); ++y) {
      for (int x = 0; x < latent.width(); ++x) {
        for (int dt = 0; dt < tf; ++dt) {
          for (int dy = 0; dy < s; ++dy) {
            for (int dx = 0; dx < s; ++dx) {
              const int base = ((dt * s + dy) * s + dx) * C;
              for (int c = 0; c < C; ++c) {
                video(f * tf + dt, y * s + dy, x * s + dx, c) = latent(f, y, x, base + c);
              }
            }
          }
        }
      }
    }
  }
  return video;
}

}  // namespace inptpu::latent_codec

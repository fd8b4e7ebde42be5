#pragma once

// Invertible space-to-depth codec standing in for a learned video VAE.
//
// A video of shape F x H x W x C maps to a latent of shape
// (F/t) x (H/s) x (W/s) x (C*s*s*t) where s is the spatial factor and t the
// temporal factor.  Latent channel k of a block holds the pixel at offset
// (dt, dy, dx) and channel c with
//
//     k = ((dt * s + dy) * s + dx) * C + c
//
// i.e. row-major over the block, then the original channel.  The map is a
// permutation, so decode(encode(v)) == v bit for bit and the codec is linear.
// Values are never clamped.

#include "inptpu/tensor.hpp"

namespace inptpu::latent_codec {

inline constexpr int kDefaultSpatialFactor = 4;
inline constexpr int kDefaultTemporalFactor = 1;

LatentTensor encode(const VideoTensor& video, int spatial_factor = kDefaultSpatialFactor,
                    int temporal_factor = kDefaultTemporalFactor);

VideoTensor decode(const LatentTensor& latent, int pixel_channels = 3);

/// Latent shape produced by encode for a given video shape.
Shape4 latent_shape(const Shape4& video_shape, int spatial_factor = kDefaultSpatialFactor,
                    int temporal_factor = kDefaultTemporalFactor);

}  // namespace inptpu::latent_codec

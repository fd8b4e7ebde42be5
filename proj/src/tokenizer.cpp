#include "inptpu/tokenizer.hpp"

#include <string>

#include "inptpu/resample.hpp"

namespace inptpu::tokenizer {

TokenGrid grid_for(const Shape4& ls, const PatchSpec& patch) {
  if (patch.t < 1 || patch.h < 1 || patch.w < 1) throw DimensionError("patch sizes must be positive");
  if (ls.frames % patch.t != 0 || ls.height % patch.h != 0 || ls.width % patch.w != 0) {
    throw DimensionError("latent " + std::to_string(ls.frames) + "x" + std::to_string(ls.height) +
                         "x" + std::to_string(ls.width) + " not divisible by patch " +
                         std::to_string(patch.t) + "x" + std::to_string(patch.h) + "x" +
                         std::to_string(patch.w));
  }
  return TokenGrid{ls.frames / patch.t, ls.height / patch.h, ls.width / patch.w};
}

TokenSequence patchify(const LatentTensor& latent, const PatchSpec& patch,
                       const std::optional<LinearMap>& projection) {
  const TokenGrid grid = grid_for(latent.shape, patch);
  const int C = latent.channels();
  const int raw_dim = patch.t * patch.h * patch.w * C;
  RowMatrixf raw(grid.count(), raw_dim);
  for (int pf = 0; pf < grid.f; ++pf) {
    for (int py = 0; py < grid.h; ++py) {
      for (int px = 0; px < grid.w; ++px) {
        const int token = (pf * grid.h + py) * grid.w + px;
        for (int dt = 0; dt < patch.t; ++dt) {
          for (int dy = 0; dy < patch.h; ++dy) {
            for (int dx = 0; dx < patch.w; ++dx) {
              const int base = ((dt * patch.h + dy) * patch.w + dx) * C;
              for (int c = 0; c < C; ++c) {
                raw(token, base + c) =
                    latent(pf * patch.t + dt, py * patch.h + dy, px * patch.w + dx, c);
              }
            }
          }
        }
      }
    }
  }
  TokenSequence seq;
  seq.grid = grid;
  seq.patch = patch;
  seq.latent_channels = C;
  if (projection) {
    if (projection->weight.rows() != raw_dim || projection->bias.size() != projection->weight.cols()) {
      throw DimensionError("patchify: projection does not accept patch vectors of width " +
                           std::to_string(raw_dim));
    }
    seq.tokens = (raw * projection->weight).rowwise() + projection->bias;
  } else {
    seq.tokens = std::move(raw);
  }
  return seq;
}

LatentTensor unpatchify(const TokenSequence& seq, const std::optional<LinearMap>& out_projection,
                        int spatial_factor, int temporal_factor) {
  const TokenGrid& grid = seq.grid;
  const PatchSpec& patch = seq.patch;
  const int C = seq.latent_channels;
  if (grid.count() != seq.size()) {
    throw DimensionError("unpatchify: grid holds " + std::to_string(grid.count()) +
                         " tokens but sequence has " + std::to_string(seq.size()));
  }
  const int raw_dim = patch.t * patch.h * patch.w * C;
  RowMatrixf raw;
  if (out_projection) {
    if (out_projection->weight.rows() != seq.dim() || out_projection->weight.cols() != raw_dim ||
        out_projection->bias.size() != raw_dim) {
      throw DimensionError("unpatchify: out projection shape mismatch");
    }
    raw = (seq.tokens * out_projection->weight).rowwise() + out_projection->bias;
  } else {
    if (seq.dim() != raw_dim) {
      throw DimensionError("unpatchify: token width " + std::to_string(seq.dim()) +
                           " does not match patch volume " + std::to_string(raw_dim));
    }
    raw = seq.tokens;
  }
  LatentTensor latent(Shape4{grid.f * patch.t, grid.h * patch.h, grid.w * patch.w, C},
                      spatial_factor, temporal_factor);
  for (int pf = 0; pf < grid.f; ++pf) {
    for (int py = 0; py < grid.h; ++py) {
      for (int px = 0; px < grid.w; ++px) {
        const int token = (pf * grid.h + py) * grid.w + px;
        for (int dt = 0; dt < patch.t; ++dt) {
          for (int dy = 0; dy < patch.h; ++dy) {
            for (int dx = 0; dx < patch.w; ++dx) {
              const int base = ((dt * patch.h + dy) * patch.w + dx) * C;
              for (int c = 0; c < C; ++c) {
                latent(pf * patch.t + dt, py * patch.h + dy, px * patch.w + dx, c) =
                    raw(token, base + c);
              }
            }
          }
        }
      }
    }
  }
  return latent;
}

TokenMask mask_to_token_weights(const MaskVideo& mask, const Shape4& ls, const PatchSpec& patch,
                                int temporal_factor) {
  if (mask.size() != ls.frames * temporal_factor) {
    throw DimensionError("mask has " + std::to_string(mask.size()) + " frames, latent covers " +
                         std::to_string(ls.frames * temporal_factor));
  }
  const TokenGrid grid = grid_for(ls, patch);
  // Downsample each pixel frame to the latent grid; temporal compression
  // averages the frames that share a latent frame.
  std::vector<Eigen::ArrayXXf> small(static_cast<std::size_t>(ls.frames),
                                     Eigen::ArrayXXf::Zero(ls.height, ls.width));
  for (int f = 0; f < mask.size(); ++f) {
    small[f / temporal_factor] += resize_bilinear(mask.frames[f], ls.height, ls.width);
  }
  TokenMask out;
  out.grid = grid;
  out.weights.resize(grid.count());
  const float norm = 1.0f / static_cast<float>(patch.t * patch.h * patch.w * temporal_factor);
  for (int pf = 0; pf < grid.f; ++pf) {
    for (int py = 0; py < grid.h; ++py) {
      for (int px = 0; px < grid.w; ++px) {
        float acc = 0.0f;
        for (int dt = 0; dt < patch.t; ++dt) {
          acc += small[pf * patch.t + dt]
                     .block(py * patch.h, px * patch.w, patch.h, patch.w)
                     .sum();
        }
        const float w = acc * norm;
        out.weights[(pf * grid.h + py) * grid.w + px] = w < 0.0f ? 0.0f : (w > 1.0f ? 1.0f : w);
      }
    }
  }
  return out;
}

Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> token_coords(const TokenGrid& grid) {
  Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> coords(grid.count(), 3);
  for (int pf = 0; pf < grid.f; ++pf) {
    for (int py = 0; py < grid.h; ++py) {
      for (int px = 0; px < grid.w; ++px) {
        const int token = (pf * grid.h + py) * grid.w + px;
        coords.row(token) << pf, py, px;
      }
    }
  }
  return coords;
}

}  // namespace inptpu::tokenizer

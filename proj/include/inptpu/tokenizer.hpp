#pragma once

// Patch embedding between latents and token sequences.
//
// Token order is temporal-major, then row-major over the spatial patch grid:
//     token = (pf * grid_h + py) * grid_w + px
// Inside a token, the raw patch vector is laid out as
//     ((dt * patch_h + dy) * patch_w + dx) * latent_channels + c
// before the optional linear projection.

#include <optional>

#include "inptpu/tensor.hpp"

namespace inptpu {

struct PatchSpec {
  int t = 1;
  int h = 2;
  int w = 2;
  bool operator==(const PatchSpec&) const = default;
};

struct TokenGrid {
  int f = 0;
  int h = 0;
  int w = 0;
  [[nodiscard]] int count() const { return f * h * w; }
  bool operator==(const TokenGrid&) const = default;
};

/// Affine map applied row-wise: y = x * weight + bias.
struct LinearMap {
  RowMatrixf weight;
  Eigen::RowVectorXf bias;
};

struct TokenSequence {
  RowMatrixf tokens;  // N x d
  TokenGrid grid;
  PatchSpec patch;
  int latent_channels = 0;

  [[nodiscard]] int size() const { return static_cast<int>(tokens.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(tokens.cols()); }
};

struct TokenMask {
  Eigen::VectorXf weights;  // N, every entry in [0,1]
  TokenGrid grid;

  [[nodiscard]] int size() const { return static_cast<int>(weights.size()); }
};

namespace tokenizer {

TokenGrid grid_for(const Shape4& latent_shape, const PatchSpec& patch);

TokenSequence patchify(const LatentTensor& latent, const PatchSpec& patch = {},
                       const std::optional<LinearMap>& projection = std::nullopt);

/// Inverse of patchify; the latent's codec factors are taken from the arguments.
LatentTensor unpatchify(const TokenSequence& tokens,
                        const std::optional<LinearMap>& out_projection = std::nullopt,
                        int spatial_factor = 4, int temporal_factor = 1);

/// Bilinear downsample of each mask frame to the latent grid, then an average
/// over every patch block.  Weights follow patchify's token order.
TokenMask mask_to_token_weights(const MaskVideo& mask, const Shape4& latent_shape,
                                const PatchSpec& patch = {}, int temporal_factor = 1);

/// Integer (frame, row, col) token coordinates in token order.
Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> token_coords(const TokenGrid& grid);

}  // namespace tokenizer
}  // namespace inptpu

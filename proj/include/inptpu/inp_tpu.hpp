#pragma once

// Inpainting-based token process: blends masked-video tokens with spatially
// aligned reference tokens and assembles the denoiser input.  Nothing in this
// module is trainable.

#include <optional>

#include "inptpu/tensor.hpp"
#include "inptpu/tokenizer.hpp"

namespace inptpu {

enum class Stage { image, video };

struct ConditionBundle {
  Stage stage = Stage::image;
  TokenSequence x_cond;
  TokenMask x_mask;
  /// Clean tokens of frame 0, N_frame x d (video stage only).
  std::optional<TokenSequence> keyframe_tokens;
};

/// Per-token denoiser input [noisy | x_cond | x_mask (| clean indicator)] plus
/// integer token coordinates.
template <typename Scalar>
struct DenoiserInput {
  RowMatrix<Scalar> features;
  Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor> coords;
  /// 1 for tokens that carry clean conditioning (the keyframe) instead of noise.
  Eigen::VectorXf clean;

  [[nodiscard]] int size() const { return static_cast<int>(features.rows()); }
};

namespace inp_tpu {

inline constexpr std::size_t kTrainableParameters = 0;

/// X_cond = (1 - X_M) * X_tilde + X_M * X_ref, one weight per token broadcast
/// over the embedding channels.
TokenSequence blend_tokens(const TokenSequence& x_tilde, const TokenSequence& x_ref, const TokenMask& x_m);

struct ConditionOptions {
  /// Forces the blend weight to zero while keeping the mask channel.
  bool disable_reference_fusion = false;
  int spatial_factor = 4;
  PatchSpec patch{};
};

/// Condition tokens from already aligned streams: encode both videos,
/// patchify, downsample the mask to token weights and blend.
ConditionBundle condition_from_streams(const VideoTensor& masked_video, const VideoTensor& reference_video,
                                       const MaskVideo& mask, Stage stage, const ConditionOptions& options = {});

/// Full unit: per-frame reference placement, then condition_from_streams.
ConditionBundle build_condition(const VideoTensor& masked_video, const ReferenceImage& ref,
                                const MaskVideo& mask, Stage stage, const ConditionOptions& options = {});

/// Channel-wise concatenation per token.  Image stage width is 2d + 1; video
/// stage appends a clean-indicator channel (width 2d + 2) and, when keyframe
/// tokens are present, overwrites the leading frame's noisy tokens with them.
template <typename Scalar>
DenoiserInput<Scalar> assemble_input(const RowMatrix<Scalar>& x_rand, const ConditionBundle& bundle);

/// Input width for a token dimension and stage.
int input_width(int token_dim, Stage stage);

/// Number of tokens in the leading (keyframe) frame of a bundle.
int keyframe_token_count(const ConditionBundle& bundle);

extern template DenoiserInput<float> assemble_input<float>(const RowMatrix<float>&, const ConditionBundle&);
extern template DenoiserInput<double> assemble_input<double>(const RowMatrix<double>&, const ConditionBundle&);

}  // namespace inp_tpu
}  // namespace inptpu

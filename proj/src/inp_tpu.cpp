#include "inptpu/inp_tpu.hpp"

#include <string>

#include "inptpu/latent_codec.hpp"
#include "inptpu/masking.hpp"

namespace inptpu::inp_tpu {

TokenSequence blend_tokens(const TokenSequence& x_tilde, const TokenSequence& x_ref, const TokenMask& x_m) {
  if (x_tilde.size() != x_ref.size() || x_tilde.dim() != x_ref.dim() || x_tilde.grid != x_ref.grid) {
    throw ShapeMismatchError("blend_tokens: masked-video and reference tokens differ in shape");
  }
  if (x_m.size() != x_tilde.size() || x_m.grid != x_tilde.grid) {
    throw ShapeMismatchError("blend_tokens: token mask does not match token sequence");
  }
  TokenSequence out = x_tilde;
  for (int i = 0; i < out.size(); ++i) {
    const float w = x_m.weights[i];
    if (w == 0.0f) continue;
    if (w == 1.0f) {
      out.tokens.row(i) = x_ref.tokens.row(i);
    } else {
      const auto a = x_tilde.tokens.row(i).array();
      const auto b = x_ref.tokens.row(i).array();
      // Clamp to the segment so rounding never leaves the convex hull.
      out.tokens.row(i) = ((1.0f - w) * a + w * b).max(a.min(b)).min(a.max(b)).matrix();
    }
  }
  return out;
}

ConditionBundle condition_from_streams(const VideoTensor& masked_video, const VideoTensor& reference_video,
                                       const MaskVideo& mask, Stage stage, const ConditionOptions& options) {
  if (masked_video.shape != reference_video.shape) {
    throw ShapeMismatchError("condition: masked video and reference stream differ in shape");
  }
  if (mask.size() != masked_video.frames() || mask.height() != masked_video.height() ||
      mask.width() != masked_video.width()) {
    throw ShapeMismatchError("condition: mask geometry does not match video");
  }
  if (stage == Stage::image && masked_video.frames() != 1) {
    throw DimensionError("condition: image stage requires a single frame, got " +
                         std::to_string(masked_video.frames()));
  }
  const LatentTensor z_tilde = latent_codec::encode(masked_video, options.spatial_factor);
  const LatentTensor z_ref = latent_codec::encode(reference_video, options.spatial_factor);
  const TokenSequence x_tilde = tokenizer::patchify(z_tilde, options.patch);
  const TokenSequence x_ref = tokenizer::patchify(z_ref, options.patch);
  ConditionBundle bundle;
  bundle.stage = stage;
  bundle.x_mask = tokenizer::mask_to_token_weights(mask, z_tilde.shape, options.patch);
  if (options.disable_reference_fusion) {
    TokenMask none = bundle.x_mask;
    none.weights.setZero();
    bundle.x_cond = blend_tokens(x_tilde, x_ref, none);
  } else {
    bundle.x_cond = blend_tokens(x_tilde, x_ref, bundle.x_mask);
  }
  return bundle;
}

ConditionBundle build_condition(const VideoTensor& masked_video, const ReferenceImage& ref,
                                const MaskVideo& mask, Stage stage, const ConditionOptions& options) {
  const VideoTensor aligned = masking::align_reference_video(ref, mask);
  return condition_from_streams(masked_video, aligned, mask, stage, options);
}

int input_width(int token_dim, Stage stage) { return 2 * token_dim + (stage == Stage::video ? 2 : 1); }

int keyframe_token_count(const ConditionBundle& bundle) {
  return bundle.x_cond.grid.h * bundle.x_cond.grid.w;
}

template <typename Scalar>
DenoiserInput<Scalar> assemble_input(const RowMatrix<Scalar>& x_rand, const ConditionBundle& bundle) {
  const int n = bundle.x_cond.size();
  const int d = bundle.x_cond.dim();
  if (x_rand.rows() != n || x_rand.cols() != d) {
    throw ShapeMismatchError("assemble_input: noise tokens are " + std::to_string(x_rand.rows()) + "x" +
                             std::to_string(x_rand.cols()) + ", condition is " + std::to_string(n) + "x" +
                             std::to_string(d));
  }
  if (bundle.x_mask.size() != n) throw ShapeMismatchError("assemble_input: mask token count mismatch");
  DenoiserInput<Scalar> in;
  in.features.resize(n, input_width(d, bundle.stage));
  in.features.leftCols(d) = x_rand;
  in.features.middleCols(d, d) = bundle.x_cond.tokens.template cast<Scalar>();
  in.features.col(2 * d) = bundle.x_mask.weights.template cast<Scalar>();
  in.coords = tokenizer::token_coords(bundle.x_cond.grid);
  in.clean = Eigen::VectorXf::Zero(n);
  if (bundle.stage == Stage::video) {
    in.features.col(2 * d + 1).setZero();
    if (bundle.keyframe_tokens) {
      const int k = keyframe_token_count(bundle);
      if (bundle.keyframe_tokens->size() != k || bundle.keyframe_tokens->dim() != d) {
        throw ShapeMismatchError("assemble_input: keyframe tokens do not cover one frame");
      }
      in.features.topLeftCorner(k, d) = bundle.keyframe_tokens->tokens.template cast<Scalar>();
      in.features.col(2 * d + 1).head(k).setOnes();
      in.clean.head(k).setOnes();
    }
  } else if (bundle.keyframe_tokens) {
    throw ShapeMismatchError("assemble_input: keyframe tokens are only valid for the video stage");
  }
  return in;
}

template DenoiserInput<float> assemble_input<float>(const RowMatrix<float>&, const ConditionBundle&);
template DenoiserInput<double> assemble_input<double>(const RowMatrix<double>&, const ConditionBundle&);

}  // namespace inptpu::inp_tpu

#pragma once

// Two-stage reenactment: an image model generates the key frame on a
// side-by-side canvas [reference panel | masked first frame], then a video
// model generates the clip with the key frame pinned as clean frame-0
// tokens.  Long videos chain clips through their last frame.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "inptpu/dit.hpp"
#include "inptpu/flow.hpp"
#include "inptpu/inp_tpu.hpp"
#include "inptpu/tensor.hpp"

namespace inptpu {

enum class ReenactMode { self, cross };

struct ReenactmentJob {
  VideoTensor source_video;
  MaskVideo source_mask;
  ReferenceImage reference;
  ReenactMode mode = ReenactMode::self;
  std::uint64_t seed = 0;
  int clip_length = 16;

  /// Throws ShapeMismatchError / DimensionError for inconsistent members.
  void validate() const;
};

struct KeyFrameResult {
  VideoTensor keyframe;                 // 1 x H x W x C
  VideoTensor reconstructed_reference;  // the canvas reference panel, 1 x H x W x C
};

struct ModelPair {
  ModelBundle image;
  ModelBundle video;
};

struct GenerationOptions {
  NoiseSchedule schedule{};
  /// Generate frame 0 with the image model and pin it in the video model.
  bool use_keyframe = true;
  /// Blend the aligned reference into the video model's condition tokens.
  bool reference_fusion = true;
  /// Restore pixels outside the mask from the source after decoding.
  bool paste_back = true;
};

enum class Ablation { full, no_keyframe, no_reference_fusion };

const char* ablation_name(Ablation arm);
GenerationOptions ablation_options(Ablation arm, GenerationOptions base = {});

namespace pipeline {

/// [left | right] along the width axis and its exact inverse.
VideoTensor join_canvas(const VideoTensor& left, const VideoTensor& right);
std::pair<VideoTensor, VideoTensor> split_canvas(const VideoTensor& canvas, int left_width);

/// Mask a job actually inpaints: the source mask in self mode, the adaptive
/// ellipse for the reference's aspect in cross mode.
MaskVideo job_mask(const ReenactmentJob& job);

/// Clean keyframe canvas [reference panel | frame].
VideoTensor keyframe_canvas(const VideoTensor& frame, const ReferenceImage& ref);

/// Image-stage condition over the canvas.  The panel half is fully masked
/// and filled from the panel itself; the frame half is the gray-filled frame
/// blended with the placed reference.
ConditionBundle keyframe_condition(const VideoTensor& frame, const Mask2D& mask, const ReferenceImage& ref);

/// Video-stage condition; `keyframe` (1 frame) becomes the pinned frame-0
/// tokens when given.
ConditionBundle video_condition(const VideoTensor& video, const MaskVideo& mask, const ReferenceImage& ref,
                                const std::optional<VideoTensor>& keyframe, bool reference_fusion);

/// Clean tokens of a pixel video.
TokenSequence video_tokens(const VideoTensor& video);
/// Pixels of a token sequence produced for `shape`, clamped to [0, 1].
VideoTensor tokens_to_video(const TokenSequence& tokens, int channels = 3);

KeyFrameResult generate_keyframe(const ModelBundle& m_img, const ReenactmentJob& job,
                                 const GenerationOptions& options = {});

/// Generates `job.clip_length` frames from the start of the job's source.
/// With a keyframe, output frame 0 equals it bit for bit.
VideoTensor generate_video(const ModelBundle& m_vid, const ReenactmentJob& job,
                           const std::optional<VideoTensor>& keyframe, const GenerationOptions& options = {});

/// Keyframe then video for a single clip.
VideoTensor reenact(const ModelPair& models, const ReenactmentJob& job, const GenerationOptions& options = {});

/// Per-clip outputs before boundary deduplication.  Clip k covers source
/// frames [k(F-1), k(F-1)+F) with seed + k and starts from clip k-1's last
/// frame.
std::vector<VideoTensor> generate_clips(const ModelPair& models, const ReenactmentJob& job, int n_clips,
                                        const GenerationOptions& options = {});

/// Chained clips with shared boundary frames emitted once:
/// n_clips * (F - 1) + 1 frames.
VideoTensor generate_long_video(const ModelPair& models, const ReenactmentJob& job, int n_clips,
                                const GenerationOptions& options = {});

/// Gray-filled source over the job's clip; the "do nothing" floor.
VideoTensor gray_fill_baseline(const ReenactmentJob& job);

}  // namespace pipeline
}  // namespace inptpu

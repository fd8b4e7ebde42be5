#include "inptpu/pipeline.hpp"

#include <string>

#include "inptpu/latent_codec.hpp"
#include "inptpu/masking.hpp"

namespace inptpu {

const char* ablation_name(Ablation arm) {
  switch (arm) {
    case Ablation::full: return "full";
    case Ablation::no_keyframe: return "no-keyframe";
    case Ablation::no_reference_fusion: return "no-ref-fusion";
  }
  return "unknown";
}

GenerationOptions ablation_options(Ablation arm, GenerationOptions base) {
  base.use_keyframe = arm != Ablation::no_keyframe;
  base.reference_fusion = arm != Ablation::no_reference_fusion;
  return base;
}

void ReenactmentJob::validate() const {
  if (clip_length < 2) throw DimensionError("job: clip_length must be >= 2");
  if (source_video.channels() != 3) throw DimensionError("job: source video must be RGB");
  if (source_mask.size() != source_video.frames() || source_mask.height() != source_video.height() ||
      source_mask.width() != source_video.width()) {
    throw ShapeMismatchError("job: mask and video must share F x H x W");
  }
  if (reference.pixels.frames() != 1 || reference.pixels.channels() != source_video.channels()) {
    throw ShapeMismatchError("job: reference must be a single frame with the video's channels");
  }
}

namespace pipeline {

namespace {

std::uint64_t video_seed(std::uint64_t seed) { return seed ^ 0xA5A5F00DULL; }

VideoTensor clamp01(VideoTensor v) {
  v.values = v.values.max(0.0f).min(1.0f);
  return v;
}

ReenactmentJob clip_job(const ReenactmentJob& job, const MaskVideo& mask, int clip) {
  const int step = job.clip_length - 1;
  ReenactmentJob sub = job;
  sub.source_video = job.source_video.frames_range(clip * step, job.clip_length);
  sub.source_mask = mask.range(clip * step, job.clip_length);
  // The mask is already final; cross-mode adaptation must not run twice.
  sub.mode = ReenactMode::self;
  sub.seed = job.seed + static_cast<std::uint64_t>(clip);
  return sub;
}

}  // namespace

VideoTensor join_canvas(const VideoTensor& left, const VideoTensor& right) { return hconcat(left, right); }

std::pair<VideoTensor, VideoTensor> split_canvas(const VideoTensor& canvas, int left_width) {
  if (left_width < 0 || left_width > canvas.width()) throw DimensionError("split_canvas: split outside canvas");
  const int f = canvas.frames(), h = canvas.height(), c = canvas.channels();
  VideoTensor left(Shape4{f, h, left_width, c}), right(Shape4{f, h, canvas.width() - left_width, c});
  left.frame_rate = right.frame_rate = canvas.frame_rate;
  for (int t = 0; t < f; ++t) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < canvas.width(); ++x) {
        for (int k = 0; k < c; ++k) {
          if (x < left_width) {
            left(t, y, x, k) = canvas(t, y, x, k);
          } else {
            right(t, y, x - left_width, k) = canvas(t, y, x, k);
          }
        }
      }
    }
  }
  return {left, right};
}

MaskVideo job_mask(const ReenactmentJob& job) {
  if (job.mode == ReenactMode::self) return job.source_mask;
  return masking::adaptive_mask_video(job.source_mask, job.reference.aspect());
}

VideoTensor keyframe_canvas(const VideoTensor& frame, const ReferenceImage& ref) {
  return join_canvas(masking::reference_panel(ref, frame.height(), frame.width()), frame);
}

ConditionBundle keyframe_condition(const VideoTensor& frame, const Mask2D& mask, const ReferenceImage& ref) {
  if (frame.frames() != 1) throw DimensionError("keyframe_condition: expects a single frame");
  const int h = frame.height(), w = frame.width();
  const MaskVideo frame_mask(std::vector<Mask2D>{mask});
  const MaskVideo panel_mask(1, h, w, 1.0f);
  const VideoTensor masked =
      join_canvas(VideoTensor(Shape4{1, h, w, frame.channels()}, masking::kNeutralGray), apply_gray_fill(frame, frame_mask));
  const VideoTensor ref_stream =
      join_canvas(masking::reference_panel(ref, h, w), masking::align_reference_video(ref, frame_mask));
  return inp_tpu::condition_from_streams(masked, ref_stream, hconcat(panel_mask, frame_mask), Stage::image);
}

ConditionBundle video_condition(const VideoTensor& video, const MaskVideo& mask, const ReferenceImage& ref,
                                const std::optional<VideoTensor>& keyframe, bool reference_fusion) {
  inp_tpu::ConditionOptions opts;
  opts.disable_reference_fusion = !reference_fusion;
  ConditionBundle bundle =
      inp_tpu::build_condition(apply_gray_fill(video, mask), ref, mask, Stage::video, opts);
  if (keyframe) {
    if (keyframe->frames() != 1 || keyframe->height() != video.height() || keyframe->width() != video.width() ||
        keyframe->channels() != video.channels()) {
      throw ShapeMismatchError("video_condition: keyframe does not match the video frame shape");
    }
    bundle.keyframe_tokens = video_tokens(*keyframe);
  }
  return bundle;
}

TokenSequence video_tokens(const VideoTensor& video) { return tokenizer::patchify(latent_codec::encode(video)); }

VideoTensor tokens_to_video(const TokenSequence& tokens, int channels) {
  return clamp01(latent_codec::decode(tokenizer::unpatchify(tokens), channels));
}

KeyFrameResult generate_keyframe(const ModelBundle& m_img, const ReenactmentJob& job,
                                 const GenerationOptions& options) {
  if (m_img.stage != Stage::image) throw ShapeMismatchError("generate_keyframe: model is not an image-stage model");
  job.validate();
  const MaskVideo mask = job_mask(job);
  const VideoTensor first = job.source_video.frame(0);
  const ConditionBundle bundle = keyframe_condition(first, mask.frames[0], job.reference);
  TokenSequence out = bundle.x_cond;
  out.tokens = flow::sample(m_img, bundle, options.schedule, job.seed);
  auto [panel, frame] = split_canvas(tokens_to_video(out, first.channels()), first.width());
  if (options.paste_back) frame = composite(frame, first, MaskVideo(std::vector<Mask2D>{mask.frames[0]}));
  frame.frame_rate = job.source_video.frame_rate;
  return KeyFrameResult{frame, panel};
}

VideoTensor generate_video(const ModelBundle& m_vid, const ReenactmentJob& job,
                           const std::optional<VideoTensor>& keyframe, const GenerationOptions& options) {
  if (m_vid.stage != Stage::video) throw ShapeMismatchError("generate_video: model is not a video-stage model");
  job.validate();
  if (job.source_video.frames() < job.clip_length) {
    throw DimensionError("generate_video: source has " + std::to_string(job.source_video.frames()) +
                         " frames, clip needs " + std::to_string(job.clip_length));
  }
  const VideoTensor source = job.source_video.frames_range(0, job.clip_length);
  const MaskVideo mask = job_mask(job).range(0, job.clip_length);
  const ConditionBundle bundle = video_condition(source, mask, job.reference, keyframe, options.reference_fusion);
  TokenSequence out = bundle.x_cond;
  out.tokens = flow::sample(m_vid, bundle, options.schedule, video_seed(job.seed));
  VideoTensor video = tokens_to_video(out, source.channels());
  if (options.paste_back) {
    const VideoTensor restored = composite(video, source, mask);
    // A pinned keyframe already is the final frame 0.
    for (int f = keyframe ? 1 : 0; f < video.frames(); ++f) video.set_frame(f, restored.frame(f));
  }
  video.frame_rate = job.source_video.frame_rate;
  return video;
}

VideoTensor reenact(const ModelPair& models, const ReenactmentJob& job, const GenerationOptions& options) {
  std::optional<VideoTensor> keyframe;
  if (options.use_keyframe) keyframe = generate_keyframe(models.image, job, options).keyframe;
  return generate_video(models.video, job, keyframe, options);
}

std::vector<VideoTensor> generate_clips(const ModelPair& models, const ReenactmentJob& job, int n_clips,
                                        const GenerationOptions& options) {
  job.validate();
  if (n_clips < 1) throw DimensionError("generate_long_video: n_clips must be >= 1");
  const int needed = n_clips * (job.clip_length - 1) + 1;
  if (job.source_video.frames() < needed) {
    throw DimensionError("generate_long_video: " + std::to_string(n_clips) + " clips need " +
                         std::to_string(needed) + " source frames, got " +
                         std::to_string(job.source_video.frames()));
  }
  const MaskVideo mask = job_mask(job);
  std::vector<VideoTensor> clips;
  for (int k = 0; k < n_clips; ++k) {
    const ReenactmentJob sub = clip_job(job, mask, k);
    std::optional<VideoTensor> keyframe;
    if (k > 0) {
      keyframe = clips.back().frame(job.clip_length - 1);
    } else if (options.use_keyframe) {
      keyframe = generate_keyframe(models.image, sub, options).keyframe;
    }
    clips.push_back(generate_video(models.video, sub, keyframe, options));
  }
  return clips;
}

VideoTensor generate_long_video(const ModelPair& models, const ReenactmentJob& job, int n_clips,
                                const GenerationOptions& options) {
  const std::vector<VideoTensor> clips = generate_clips(models, job, n_clips, options);
  std::vector<VideoTensor> parts;
  for (std::size_t k = 0; k < clips.size(); ++k) {
    parts.push_back(k == 0 ? clips[k] : clips[k].frames_range(1, clips[k].frames() - 1));
  }
  return concat_frames(parts);
}

VideoTensor gray_fill_baseline(const ReenactmentJob& job) {
  job.validate();
  const int f = std::min(job.clip_length, job.source_video.frames());
  return apply_gray_fill(job.source_video.frames_range(0, f), job_mask(job).range(0, f));
}

}  // namespace pipeline
}  // namespace inptpu

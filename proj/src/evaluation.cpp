#include "inptpu/evaluation.hpp"

#include <cstdio>

#include "inptpu/image_io.hpp"

namespace inptpu::evaluation {

ReenactmentJob clip_job(const ClipData& clip, ReenactMode mode, std::uint64_t seed, const ClipData* other) {
  ReenactmentJob job;
  job.source_video = clip.video;
  job.source_mask = clip.mask;
  job.reference = (mode == ReenactMode::cross && other) ? other->reference : clip.reference;
  job.mode = mode;
  job.seed = seed;
  job.clip_length = clip.video.frames();
  return job;
}

std::size_t cross_partner(const std::vector<ClipData>& clips, std::size_t index) {
  for (std::size_t k = 1; k < clips.size(); ++k) {
    const std::size_t j = (index + k) % clips.size();
    if (clips[j].spec.sprite_id != clips[index].spec.sprite_id) return j;
  }
  return (index + 1) % clips.size();
}

SplitRun run_split(const ModelPair& models, const std::vector<ClipData>& clips, const std::vector<std::string>& names,
                   const std::vector<Ablation>& arms, std::uint64_t seed, const GenerationOptions& base,
                   const std::filesystem::path& out_dir) {
  if (clips.empty()) throw DataError("run_split: no clips");
  if (names.size() != clips.size()) throw DataError("run_split: one name per clip required");
  SplitRun run;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const ReenactmentJob job = clip_job(clips[i], ReenactMode::self, seed + i);
    run.baseline_psnr.push_back(metrics::psnr(pipeline::gray_fill_baseline(job), clips[i].video));
  }
  for (double b : run.baseline_psnr) run.baseline_mean += b;
  run.baseline_mean /= static_cast<double>(clips.size());
  for (Ablation arm : arms) {
    ArmResult result;
    result.arm = arm;
    const GenerationOptions options = ablation_options(arm, base);
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const ReenactmentJob job = clip_job(clips[i], ReenactMode::self, seed + i);
      const VideoTensor out = pipeline::reenact(models, job, options);
      result.clips.push_back(metrics::score_clip(names[i], out, clips[i].video, pipeline::job_mask(job)));
      if (!out_dir.empty()) {
        const std::filesystem::path dir = out_dir / ablation_name(arm) / names[i];
        image_io::write_video_dir(dir / "frames", out);
        image_io::write_mask_dir(dir / "masks", pipeline::job_mask(job));
      }
    }
    result.mean = metrics::aggregate(result.clips);
    run.arms.push_back(std::move(result));
  }
  return run;
}

std::string comparison_table(const SplitRun& run) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %9s %10s %10s\n", "arm", "psnr_db", "subject", "smooth");
  out += buf;
  for (const ArmResult& a : run.arms) {
    std::snprintf(buf, sizeof(buf), "%-16s %9.3f %10.4f %10.4f\n", ablation_name(a.arm), a.mean.psnr,
                  a.mean.subject_consistency, a.mean.motion_smoothness);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-16s %9.3f %10s %10s\n", "gray-fill", run.baseline_mean, "-", "-");
  out += buf;
  return out;
}

}  // namespace inptpu::evaluation

#pragma once

// Evaluation metrics.  PSNR measures self-reenactment fidelity; subject
// consistency and motion smoothness are handcrafted proxies for the
// VBench-style video-quality scores (no pretrained features), so their
// absolute values are only comparable within this project.

#include <filesystem>
#include <string>
#include <vector>

#include "inptpu/tensor.hpp"

namespace inptpu {

struct ClipScores {
  std::string name;
  int frames = 0;
  double psnr = 0.0;
  double subject_consistency = 0.0;
  double motion_smoothness = 0.0;
};

struct EvalReport {
  std::vector<ClipScores> clips;
  ClipScores mean;  // arithmetic means over clips
  std::filesystem::path run_dir, gt_dir, mask_dir;

  [[nodiscard]] int count() const { return static_cast<int>(clips.size()); }
};

namespace metrics {

inline constexpr double kPsnrCap = 99.0;
inline constexpr double kExactMse = 1e-10;
inline constexpr int kFeatureSize = 16;

/// Frame-averaged 10 log10(1 / MSE) for values in [0, 1], each frame capped
/// at 99 dB.
double psnr(const VideoTensor& a, const VideoTensor& b);
double psnr_frame(const VideoTensor& a, const VideoTensor& b, int frame);

/// Subject feature of one frame: luma of the mask's bounding box, bilinear
/// resize to 16 x 16, mean-centered and L2-normalized (zero when flat).
Eigen::VectorXd subject_feature(const VideoTensor& video, int frame, const Mask2D& mask);

/// Mean over t >= 1 of (cos(f_t, f_0) + cos(f_t, f_{t-1})) / 2, clamped to
/// [0, 1]; 1 for single-frame videos.
double subject_consistency(const VideoTensor& video, const MaskVideo& mask);

/// 1 - mean|second difference| / (2 mean|first difference| + 1e-8), clamped
/// to [0, 1].
double motion_smoothness(const VideoTensor& video);

/// Scores every clip of `run_dir` against `gt_dir`, with masks from
/// `mask_dir`.  A root is either one clip or a directory of clip
/// directories; frames are read from `<clip>/frames` (masks from
/// `<clip>/masks`) when present, else from `<clip>` itself.
EvalReport evaluate(const std::filesystem::path& run_dir, const std::filesystem::path& gt_dir,
                    const std::filesystem::path& mask_dir);

ClipScores score_clip(const std::string& name, const VideoTensor& run, const VideoTensor& gt, const MaskVideo& mask);

/// Means of the per-clip values.
ClipScores aggregate(const std::vector<ClipScores>& clips);

std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);
/// Writes report.json and report.txt into `dir`.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace metrics
}  // namespace inptpu

#include "inptpu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "inptpu/image_io.hpp"
#include "inptpu/resample.hpp"

namespace inptpu::metrics {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

void check_same_shape(const VideoTensor& a, const VideoTensor& b, const char* what) {
  if (a.shape != b.shape) throw ShapeMismatchError(std::string(what) + ": videos differ in shape");
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

bool is_clip_dir(const fs::path& dir) {
  return fs::is_directory(dir / "frames") || fs::exists(dir / image_io::frame_name(0));
}

/// Clip name -> directory.  A root that is itself a clip maps "" to itself.
std::map<std::string, fs::path> clip_dirs(const fs::path& root) {
  if (!fs::is_directory(root)) throw DataError("'" + root.string() + "' is not a directory");
  std::map<std::string, fs::path> out;
  if (is_clip_dir(root)) {
    out.emplace("", root);
    return out;
  }
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && is_clip_dir(entry.path())) out.emplace(entry.path().filename().string(), entry.path());
  }
  return out;
}

fs::path sub_or_self(const fs::path& dir, const char* sub) {
  return fs::is_directory(dir / sub) ? dir / sub : dir;
}

}  // namespace

double psnr_frame(const VideoTensor& a, const VideoTensor& b, int f) {
  const Eigen::Index n = static_cast<Eigen::Index>(a.height()) * a.width() * a.channels();
  const Eigen::Index off = a.index(f, 0, 0, 0);
  const double mse = (a.values.segment(off, n).cast<double>() - b.values.segment(off, n).cast<double>())
                         .square()
                         .mean();
  if (mse < kExactMse) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double psnr(const VideoTensor& a, const VideoTensor& b) {
  check_same_shape(a, b, "psnr");
  if (a.frames() == 0) throw DimensionError("psnr: empty video");
  double total = 0.0;
  for (int f = 0; f < a.frames(); ++f) total += psnr_frame(a, b, f);
  return total / a.frames();
}

Eigen::VectorXd subject_feature(const VideoTensor& video, int frame, const Mask2D& mask) {
  if (mask.rows() != video.height() || mask.cols() != video.width()) {
    throw ShapeMismatchError("subject_feature: mask does not match frame");
  }
  auto bbox = [&](auto pred, int& r0, int& r1, int& c0, int& c1) {
    r0 = video.height(), r1 = -1, c0 = video.width(), c1 = -1;
    for (int r = 0; r < video.height(); ++r) {
      for (int c = 0; c < video.width(); ++c) {
        if (pred(mask(r, c))) {
          r0 = std::min(r0, r), r1 = std::max(r1, r), c0 = std::min(c0, c), c1 = std::max(c1, c);
        }
      }
    }
    return r1 >= 0;
  };
  int r0, r1, c0, c1;
  if (!bbox([](float v) { return v >= 0.5f; }, r0, r1, c0, c1) &&
      !bbox([](float v) { return v > 0.0f; }, r0, r1, c0, c1)) {
    throw EmptyMaskError("subject_consistency: frame " + std::to_string(frame) + " has no mask foreground");
  }
  Eigen::ArrayXXf luma(r1 - r0 + 1, c1 - c0 + 1);
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      float y = video(frame, r, c, 0);
      if (video.channels() >= 3) {
        y = 0.299f * video(frame, r, c, 0) + 0.587f * video(frame, r, c, 1) + 0.114f * video(frame, r, c, 2);
      }
      luma(r - r0, c - c0) = y;
    }
  }
  const Eigen::ArrayXXf small = resize_bilinear(luma, kFeatureSize, kFeatureSize);
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXf>(small.data(), small.size()).cast<double>();
  f.array() -= f.mean();
  const double n = f.norm();
  // Flat crops (up to rounding) carry no structure.
  if (n < 1e-9) return Eigen::VectorXd::Zero(f.size());
  return f / n;
}

double subject_consistency(const VideoTensor& video, const MaskVideo& mask) {
  if (mask.size() != video.frames() || mask.height() != video.height() || mask.width() != video.width()) {
    throw ShapeMismatchError("subject_consistency: mask and video differ in shape");
  }
  if (video.frames() == 0) throw DimensionError("subject_consistency: empty video");
  std::vector<Eigen::VectorXd> feats;
  for (int f = 0; f < video.frames(); ++f) feats.push_back(subject_feature(video, f, mask.frames[f]));
  if (video.frames() == 1) return 1.0;
  double total = 0.0;
  for (int t = 1; t < video.frames(); ++t) {
    total += 0.5 * (cosine(feats[t], feats[0]) + cosine(feats[t], feats[t - 1]));
  }
  return std::clamp(total / (video.frames() - 1), 0.0, 1.0);
}

double motion_smoothness(const VideoTensor& video) {
  const int F = video.frames();
  if (F < 3) throw DimensionError("motion_smoothness: needs at least 3 frames");
  const Eigen::Index n = static_cast<Eigen::Index>(video.height()) * video.width() * video.channels();
  auto frame = [&](int f) { return video.values.segment(static_cast<Eigen::Index>(f) * n, n).cast<double>(); };
  double second = 0.0, first = 0.0;
  for (int t = 1; t + 1 < F; ++t) second += (frame(t + 1) - 2.0 * frame(t) + frame(t - 1)).abs().mean();
  for (int t = 0; t + 1 < F; ++t) first += (frame(t + 1) - frame(t)).abs().mean();
  second /= (F - 2);
  first /= (F - 1);
  return std::clamp(1.0 - second / (2.0 * first + 1e-8), 0.0, 1.0);
}

ClipScores score_clip(const std::string& name, const VideoTensor& run, const VideoTensor& gt, const MaskVideo& mask) {
  ClipScores s;
  s.name = name;
  s.frames = run.frames();
  s.psnr = psnr(run, gt);
  s.subject_consistency = subject_consistency(run, mask);
  s.motion_smoothness = motion_smoothness(run);
  return s;
}

ClipScores aggregate(const std::vector<ClipScores>& clips) {
  ClipScores m;
  m.name = "mean";
  if (clips.empty()) return m;
  for (const ClipScores& c : clips) {
    m.frames += c.frames;
    m.psnr += c.psnr;
    m.subject_consistency += c.subject_consistency;
    m.motion_smoothness += c.motion_smoothness;
  }
  const double n = static_cast<double>(clips.size());
  m.psnr /= n;
  m.subject_consistency /= n;
  m.motion_smoothness /= n;
  return m;
}

EvalReport evaluate(const fs::path& run_dir, const fs::path& gt_dir, const fs::path& mask_dir) {
  const auto runs = clip_dirs(run_dir);
  const auto gts = clip_dirs(gt_dir);
  const auto masks = clip_dirs(mask_dir);
  EvalReport report;
  report.run_dir = run_dir;
  report.gt_dir = gt_dir;
  report.mask_dir = mask_dir;
  if (runs.empty()) throw DataError("no clips found in '" + run_dir.string() + "'");
  for (const auto& [name, dir] : runs) {
    // A single-clip root matches a single-clip ground truth.
    const auto gt = gts.count(name) ? gts.find(name) : (gts.size() == 1 && runs.size() == 1 ? gts.begin() : gts.end());
    const auto mk =
        masks.count(name) ? masks.find(name) : (masks.size() == 1 && runs.size() == 1 ? masks.begin() : masks.end());
    if (gt == gts.end() || mk == masks.end()) {
      throw DataError("clip '" + name + "' of '" + run_dir.string() + "' has no ground truth or mask counterpart");
    }
    const VideoTensor run = image_io::read_video_dir(sub_or_self(dir, "frames"));
    const VideoTensor truth = image_io::read_video_dir(sub_or_self(gt->second, "frames"));
    const MaskVideo mask = image_io::read_mask_dir(sub_or_self(mk->second, "masks"));
    if (run.shape != truth.shape || mask.size() != run.frames()) {
      throw DataError("clip '" + name + "': run, ground truth and mask disagree in shape");
    }
    report.clips.push_back(score_clip(name.empty() ? run_dir.filename().string() : name, run, truth, mask));
  }
  report.mean = aggregate(report.clips);
  return report;
}

std::string report_json(const EvalReport& r) {
  auto scores = [](const ClipScores& c) {
    return Json{{"name", c.name},
                {"frames", c.frames},
                {"psnr", c.psnr},
                {"subject_consistency", c.subject_consistency},
                {"motion_smoothness", c.motion_smoothness}};
  };
  Json clips = Json::array();
  for (const ClipScores& c : r.clips) clips.push_back(scores(c));
  const Json j{{"count", r.count()},
               {"psnr", r.mean.psnr},
               {"subject_consistency", r.mean.subject_consistency},
               {"motion_smoothness", r.mean.motion_smoothness},
               {"clips", clips},
               {"config",
                {{"run_dir", r.run_dir.string()},
                 {"gt_dir", r.gt_dir.string()},
                 {"mask_dir", r.mask_dir.string()},
                 {"psnr_cap_db", kPsnrCap},
                 {"feature_size", kFeatureSize}}}};
  return j.dump(2) + "\n";
}

std::string report_table(const EvalReport& r) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-16s %6s %9s %10s %10s\n", "clip", "frames", "psnr_db", "subject", "smooth");
  out += buf;
  for (const ClipScores& c : r.clips) {
    std::snprintf(buf, sizeof(buf), "%-16s %6d %9.3f %10.4f %10.4f\n", c.name.c_str(), c.frames, c.psnr,
                  c.subject_consistency, c.motion_smoothness);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "%-16s %6d %9.3f %10.4f %10.4f\n", "mean", r.count(), r.mean.psnr,
                r.mean.subject_consistency, r.mean.motion_smoothness);
  out += buf;
  return out;
}

void write_report(const fs::path& dir, const EvalReport& report) {
  fs::create_directories(dir);
  std::ofstream(dir / "report.json") << report_json(report);
  std::ofstream(dir / "report.txt") << report_table(report);
}

}  // namespace inptpu::metrics

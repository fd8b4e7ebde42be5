#pragma once

// Split-level reenactment runs shared by the command line and the acceptance
// suite: one job per clip, the three ablation arms, and the gray-fill floor.

#include <filesystem>
#include <vector>

#include "inptpu/metrics.hpp"
#include "inptpu/pipeline.hpp"
#include "inptpu/synthdata.hpp"

namespace inptpu::evaluation {

/// Job for a dataset clip.  Cross mode takes the reference of `other`.
ReenactmentJob clip_job(const ClipData& clip, ReenactMode mode, std::uint64_t seed,
                        const ClipData* other = nullptr);

/// Clip whose reference a cross job uses: the next clip with a different
/// sprite, wrapping around.
std::size_t cross_partner(const std::vector<ClipData>& clips, std::size_t index);

struct ArmResult {
  Ablation arm = Ablation::full;
  std::vector<ClipScores> clips;
  ClipScores mean;
};

struct SplitRun {
  std::vector<ArmResult> arms;
  std::vector<double> baseline_psnr;  // gray fill, per clip
  double baseline_mean = 0.0;
};

/// Self-reenacts every clip under each arm with seed + clip index.  Generated
/// frames and masks go to `out_dir/<arm>/<clip>` when a directory is given.
SplitRun run_split(const ModelPair& models, const std::vector<ClipData>& clips,
                   const std::vector<std::string>& names, const std::vector<Ablation>& arms,
                   std::uint64_t seed, const GenerationOptions& base = {},
                   const std::filesystem::path& out_dir = {});

std::string comparison_table(const SplitRun& run);

}  // namespace inptpu::evaluation

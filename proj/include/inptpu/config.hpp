#pragma once

// JSON forms of the model and training configuration.  Readers reject
// unknown keys so that typos in experiment files fail loudly.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "inptpu/dit.hpp"

namespace inptpu {

struct TrainConfig {
  double lr = 1e-4;
  int batch = 8;
  int steps = 500;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 1.0;  // global-norm clip, 0 disables
  int warmup_steps = 0;
  /// "constant", or "cosine" decay to 10% of lr over the post-warmup steps.
  std::string lr_decay = "constant";
  int checkpoint_every = 100;
  /// Probability of replacing a training mask by its adaptive ellipse.
  double ellipse_mask_prob = 0.5;
  /// Video stage: probability of dropping the clean keyframe.
  double keyframe_drop_prob = 0.2;
  /// Video stage: probability of zeroing the reference blend.
  double ref_fusion_drop_prob = 0.2;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

namespace config {

using Json = nlohmann::json;

const char* stage_name(Stage stage);
const char* prediction_name(Prediction p);
/// Accepts "image"/"keyframe" and "video".
Stage parse_stage(const std::string& name);

Json to_json(const DiTConfig& c);
Json to_json(const TrainConfig& c);

/// Overlay the keys of `j` onto `base`; unknown keys throw SpecError.
DiTConfig merge(DiTConfig base, const Json& j);
TrainConfig merge(TrainConfig base, const Json& j);

Json read_file(const std::string& path);
void write_file(const std::string& path, const Json& j);

}  // namespace config
}  // namespace inptpu

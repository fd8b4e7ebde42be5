#pragma once

// Self-supervised reconstruction training for both stages and the on-disk
// checkpoint format.
//
// A checkpoint directory holds
//   config.json       stage, model and train configuration
//   params.bin        little-endian float32, slots concatenated in name order
//   manifest.json     slot name -> offset (in floats) and shape
//   optimizer.bin     Adam first then second moments, same layout as params
//   train_state.json  last completed step
//   loss.csv          step,loss for every completed step
//
// Every step draws from its own generator seeded by (seed, step), which is
// what makes a resumed run identical to an uninterrupted one.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <vector>

#include "inptpu/config.hpp"
#include "inptpu/dit.hpp"
#include "inptpu/synthdata.hpp"

namespace inptpu {

struct AdamState {
  ParamStore<float> m;
  ParamStore<float> v;
};

struct Checkpoint {
  ModelBundle model;
  TrainConfig train;
  AdamState adam;
  int step = 0;
  std::vector<double> losses;  // losses[i] belongs to step i + 1
};

/// One training example: clean tokens and their condition.
struct TrainingPair {
  RowMatrixf x0;
  ConditionBundle bundle;
};

struct TrainResult {
  ModelBundle model;
  std::vector<double> losses;
};

namespace training {

std::uint64_t step_seed(std::uint64_t seed, int step);

/// Keyframe task: random frame t, canvas [reference panel | masked frame t].
TrainingPair keyframe_pair(const ClipData& clip, const TrainConfig& cfg, std::mt19937_64& rng);

/// Video task: the whole clip with teacher-forced ground-truth frame 0 as
/// the keyframe, subject to keyframe and reference-fusion dropout.
TrainingPair video_pair(const ClipData& clip, const TrainConfig& cfg, std::mt19937_64& rng);

TrainingPair make_pair(Stage stage, const std::vector<ClipData>& clips, const TrainConfig& cfg,
                       std::mt19937_64& rng);

/// One Adam update with bias correction; lr is the already scheduled rate.
void adam_update(ParamStore<float>& params, const ParamStore<float>& grads, AdamState& state, int step,
                 const TrainConfig& cfg, double lr);

/// Learning rate for a 1-based step: linear warmup, then constant or cosine.
double scheduled_lr(const TrainConfig& cfg, int step);

using StepCallback = std::function<void(int step, double loss)>;

/// Runs steps state.step + 1 .. cfg.steps on `state` in place.  With a
/// directory, checkpoints every `checkpoint_every` steps and at the end.
void run(Checkpoint& state, const std::vector<ClipData>& clips, const std::filesystem::path& checkpoint_dir = {},
         const StepCallback& on_step = {});

/// Fresh model from `model_config`, trained for cfg.steps.
TrainResult train(const DiTConfig& model_config, Stage stage, const std::vector<ClipData>& clips,
                  const TrainConfig& cfg, const std::filesystem::path& checkpoint_dir = {},
                  const StepCallback& on_step = {});

Checkpoint fresh_state(const DiTConfig& model_config, Stage stage, const TrainConfig& cfg);

}  // namespace training

namespace checkpoint {

void save(const std::filesystem::path& dir, const Checkpoint& state);
Checkpoint load(const std::filesystem::path& dir);
/// Model only (config.json, manifest.json, params.bin).
ModelBundle load_model(const std::filesystem::path& dir);

void write_params(const std::filesystem::path& path, const ParamStore<float>& params);
void read_params(const std::filesystem::path& path, ParamStore<float>& params);

}  // namespace checkpoint
}  // namespace inptpu

#include "inptpu/train.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "inptpu/flow.hpp"
#include "inptpu/masking.hpp"
#include "inptpu/pipeline.hpp"

namespace inptpu {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace training {

std::uint64_t step_seed(std::uint64_t seed, int step) {
  std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(step) + 0x632BE59BD9B4E019ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

TrainingPair keyframe_pair(const ClipData& clip, const TrainConfig& cfg, std::mt19937_64& rng) {
  const int frames = clip.video.frames();
  const int t = std::uniform_int_distribution<int>(0, frames - 1)(rng);
  Mask2D mask = clip.mask.frames[t];
  if (coin(rng, cfg.ellipse_mask_prob)) {
    mask = masking::adaptive_ellipse_mask(masking::compute_obb(mask), clip.reference.aspect(),
                                          static_cast<int>(mask.rows()), static_cast<int>(mask.cols()));
  }
  const VideoTensor frame = clip.video.frame(t);
  TrainingPair pair;
  pair.bundle = pipeline::keyframe_condition(frame, mask, clip.reference);
  pair.x0 = pipeline::video_tokens(pipeline::keyframe_canvas(frame, clip.reference)).tokens;
  return pair;
}

TrainingPair video_pair(const ClipData& clip, const TrainConfig& cfg, std::mt19937_64& rng) {
  MaskVideo mask = clip.mask;
  if (coin(rng, cfg.ellipse_mask_prob)) mask = masking::adaptive_mask_video(mask, clip.reference.aspect());
  const bool drop_keyframe = coin(rng, cfg.keyframe_drop_prob);
  const bool drop_fusion = coin(rng, cfg.ref_fusion_drop_prob);
  std::optional<VideoTensor> keyframe;
  if (!drop_keyframe) keyframe = clip.video.frame(0);
  TrainingPair pair;
  pair.bundle = pipeline::video_condition(clip.video, mask, clip.reference, keyframe, !drop_fusion);
  pair.x0 = pipeline::video_tokens(clip.video).tokens;
  return pair;
}

TrainingPair make_pair(Stage stage, const std::vector<ClipData>& clips, const TrainConfig& cfg,
                       std::mt19937_64& rng) {
  if (clips.empty()) throw DataError("training set is empty");
  const auto index = std::uniform_int_distribution<std::size_t>(0, clips.size() - 1)(rng);
  const ClipData& clip = clips[index];
  if (clip.video.frames() < 1 || clip.mask.size() != clip.video.frames()) {
    throw DataError("malformed training clip " + std::to_string(index));
  }
  return stage == Stage::image ? keyframe_pair(clip, cfg, rng) : video_pair(clip, cfg, rng);
}

double scheduled_lr(const TrainConfig& cfg, int step) {
  if (cfg.warmup_steps > 0 && step <= cfg.warmup_steps) return cfg.lr * step / cfg.warmup_steps;
  if (cfg.lr_decay == "constant" || cfg.steps <= cfg.warmup_steps) return cfg.lr;
  const double progress = static_cast<double>(step - cfg.warmup_steps) / (cfg.steps - cfg.warmup_steps);
  return cfg.lr * (0.1 + 0.45 * (1.0 + std::cos(std::numbers::pi * progress)));
}

void adam_update(ParamStore<float>& params, const ParamStore<float>& grads, AdamState& state, int step,
                 const TrainConfig& cfg, double lr) {
  const double c1 = 1.0 - std::pow(cfg.beta1, step);
  const double c2 = 1.0 - std::pow(cfg.beta2, step);
  const float b1 = static_cast<float>(cfg.beta1), b2 = static_cast<float>(cfg.beta2);
  const float step_size = static_cast<float>(lr / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float eps = static_cast<float>(cfg.adam_eps);
  for (auto& [name, p] : params.slots) {
    const auto& g = grads.at(name).array();
    auto m = state.m[name].array();
    auto v = state.v[name].array();
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.square();
    p.array() -= step_size * m / ((v * inv_c2).sqrt() + eps);
  }
}

Checkpoint fresh_state(const DiTConfig& model_config, Stage stage, const TrainConfig& cfg) {
  cfg.validate();
  Checkpoint s;
  s.model = init_model<float>(model_config, stage, cfg.seed);
  s.train = cfg;
  s.adam.m = dit::zeros_like(s.model.params);
  s.adam.v = dit::zeros_like(s.model.params);
  return s;
}

void run(Checkpoint& state, const std::vector<ClipData>& clips, const fs::path& checkpoint_dir,
         const StepCallback& on_step) {
  const TrainConfig& cfg = state.train;
  cfg.validate();
  if (clips.empty()) throw DataError("training set is empty");
  ParamStore<float> grads = dit::zeros_like(state.model.params);
  for (int step = state.step + 1; step <= cfg.steps; ++step) {
    std::mt19937_64 rng(step_seed(cfg.seed, step));
    grads.set_zero();
    double loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const TrainingPair pair = make_pair(state.model.stage, clips, cfg, rng);
      const FlowDraw<float> draw = flow::draw<float>(pair.x0, pair.bundle, rng);
      loss += flow::loss_and_grad(state.model, draw, grads);
    }
    loss /= cfg.batch;
    double norm2 = 0.0;
    for (auto& [name, g] : grads.slots) {
      g *= 1.0f / static_cast<float>(cfg.batch);
      norm2 += static_cast<double>(g.squaredNorm());
    }
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm)) throw NonFiniteError("train: non-finite gradient at step " + std::to_string(step));
    if (cfg.grad_clip > 0.0 && norm > cfg.grad_clip) {
      const float scale = static_cast<float>(cfg.grad_clip / norm);
      for (auto& [name, g] : grads.slots) g *= scale;
    }
    const double lr = scheduled_lr(cfg, step);
    if (lr > 0.0) adam_update(state.model.params, grads, state.adam, step, cfg, lr);
    state.step = step;
    state.losses.push_back(loss);
    if (on_step) on_step(step, loss);
    if (!checkpoint_dir.empty() && ((cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) ||
                                    step == cfg.steps)) {
      checkpoint::save(checkpoint_dir, state);
    }
  }
  if (!checkpoint_dir.empty() && state.step == cfg.steps && cfg.steps == 0) checkpoint::save(checkpoint_dir, state);
}

TrainResult train(const DiTConfig& model_config, Stage stage, const std::vector<ClipData>& clips,
                  const TrainConfig& cfg, const fs::path& checkpoint_dir, const StepCallback& on_step) {
  Checkpoint state = fresh_state(model_config, stage, cfg);
  run(state, clips, checkpoint_dir, on_step);
  return TrainResult{std::move(state.model), std::move(state.losses)};
}

}  // namespace training

namespace checkpoint {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

void write_floats(const fs::path& path, const std::vector<const ParamStore<float>*>& stores) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    for (const ParamStore<float>* s : stores) {
      for (const auto& [name, m] : s->slots) {
        out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
      }
    }
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

void read_floats(const fs::path& path, const std::vector<ParamStore<float>*>& stores) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::size_t expected = 0;
  for (const ParamStore<float>* s : stores) expected += s->parameter_count();
  if (static_cast<std::size_t>(in.tellg()) != expected * sizeof(float)) {
    throw DataError("'" + path.string() + "' holds " + std::to_string(in.tellg()) + " bytes, expected " +
                    std::to_string(expected * sizeof(float)));
  }
  in.seekg(0);
  for (ParamStore<float>* s : stores) {
    for (auto& [name, m] : s->slots) {
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
    }
  }
  if (!in) throw DataError("failed reading '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out) throw DataError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Json manifest_json(const ParamStore<float>& params) {
  Json slots = Json::array();
  std::size_t offset = 0;
  for (const auto& [name, m] : params.slots) {
    slots.push_back({{"name", name}, {"offset", offset}, {"shape", {m.rows(), m.cols()}}});
    offset += static_cast<std::size_t>(m.size());
  }
  return Json{{"dtype", "float32"}, {"byte_order", "little"}, {"order", "name-sorted"}, {"total", offset},
              {"slots", slots}};
}

struct Header {
  DiTConfig model;
  Stage stage = Stage::image;
  TrainConfig train;
};

Header read_header(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("checkpoint directory '" + dir.string() + "' does not exist");
  const Json j = config::read_file((dir / "config.json").string());
  Header h;
  try {
    h.stage = config::parse_stage(j.at("stage").get<std::string>());
    h.model = config::merge(DiTConfig{}, j.at("model"));
    if (j.contains("train")) h.train = config::merge(TrainConfig{}, j.at("train"));
  } catch (const Json::exception& e) {
    throw DataError("malformed checkpoint config in '" + dir.string() + "': " + e.what());
  } catch (const SpecError& e) {
    throw DataError("checkpoint config in '" + dir.string() + "': " + e.what());
  }
  return h;
}

ParamStore<float> shaped_store(const DiTConfig& c, Stage stage) {
  ParamStore<float> p;
  for (const auto& [name, shape] : parameter_shapes(c, stage)) p[name] = RowMatrixf::Zero(shape.first, shape.second);
  return p;
}

void check_manifest(const fs::path& dir, const ParamStore<float>& params) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) return;
  const Json expected = manifest_json(params);
  const Json found = config::read_file(path.string());
  if (found.value("slots", Json()) != expected["slots"]) {
    throw DataError("manifest in '" + dir.string() + "' does not match the configured model");
  }
}

}  // namespace

void write_params(const fs::path& path, const ParamStore<float>& params) { write_floats(path, {&params}); }

void read_params(const fs::path& path, ParamStore<float>& params) { read_floats(path, {&params}); }

void save(const fs::path& dir, const Checkpoint& state) {
  fs::create_directories(dir);
  config::write_file((dir / "config.json").string(), Json{{"stage", config::stage_name(state.model.stage)},
                                                          {"model", config::to_json(state.model.config)},
                                                          {"train", config::to_json(state.train)}});
  config::write_file((dir / "manifest.json").string(), manifest_json(state.model.params));
  write_params(dir / "params.bin", state.model.params);
  write_floats(dir / "optimizer.bin", {&state.adam.m, &state.adam.v});
  std::ostringstream csv;
  csv << "step,loss\n";
  for (std::size_t i = 0; i < state.losses.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, state.losses[i]);
    csv << buf;
  }
  write_text(dir / "loss.csv", csv.str());
  write_text(dir / "train_state.json", Json{{"step", state.step}, {"seed", state.train.seed}}.dump(2) + "\n");
}

ModelBundle load_model(const fs::path& dir) {
  const Header h = read_header(dir);
  ModelBundle m{h.model, h.stage, shaped_store(h.model, h.stage)};
  check_manifest(dir, m.params);
  read_params(dir / "params.bin", m.params);
  if (!m.params.all_finite()) throw DataError("checkpoint '" + dir.string() + "' holds non-finite parameters");
  return m;
}

Checkpoint load(const fs::path& dir) {
  const Header h = read_header(dir);
  Checkpoint s;
  s.model = load_model(dir);
  s.train = h.train;
  s.adam.m = shaped_store(h.model, h.stage);
  s.adam.v = shaped_store(h.model, h.stage);
  if (fs::exists(dir / "optimizer.bin")) read_floats(dir / "optimizer.bin", {&s.adam.m, &s.adam.v});
  if (fs::exists(dir / "train_state.json")) {
    try {
      s.step = config::read_file((dir / "train_state.json").string()).at("step").get<int>();
    } catch (const Json::exception& e) {
      throw DataError("malformed train_state.json in '" + dir.string() + "': " + e.what());
    }
  }
  std::ifstream csv(dir / "loss.csv");
  std::string line;
  std::getline(csv, line);
  while (std::getline(csv, line) && static_cast<int>(s.losses.size()) < s.step) {
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("malformed loss.csv in '" + dir.string() + "'");
    s.losses.push_back(std::stod(line.substr(comma + 1)));
  }
  if (static_cast<int>(s.losses.size()) != s.step) {
    throw DataError("loss.csv in '" + dir.string() + "' has fewer rows than the recorded step");
  }
  return s;
}

}  // namespace checkpoint
}  // namespace inptpu

#include "inptpu/config.hpp"

#include <fstream>
#include <set>

namespace inptpu {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) throw SpecError("train: lr must be >= 0");
  if (batch < 1) throw SpecError("train: batch must be >= 1");
  if (steps < 0) throw SpecError("train: steps must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw SpecError("train: betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw SpecError("train: adam_eps must be > 0");
  if (!(grad_clip >= 0.0)) throw SpecError("train: grad_clip must be >= 0");
  if (lr_decay != "constant" && lr_decay != "cosine") throw SpecError("train: lr_decay must be constant or cosine");
  if (warmup_steps < 0 || checkpoint_every < 0) throw SpecError("train: step counts must be >= 0");
  for (double p : {ellipse_mask_prob, keyframe_drop_prob, ref_fusion_drop_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) throw SpecError("train: probabilities must lie in [0, 1]");
  }
}

namespace config {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const char* what) {
  if (!j.is_object()) throw SpecError(std::string(what) + " config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw SpecError(std::string("unknown ") + what + " config key '" + key + "'");
  }
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw SpecError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

const char* stage_name(Stage stage) { return stage == Stage::image ? "image" : "video"; }

Stage parse_stage(const std::string& name) {
  if (name == "image" || name == "keyframe") return Stage::image;
  if (name == "video") return Stage::video;
  throw SpecError("unknown stage '" + name + "' (expected keyframe or video)");
}

const char* prediction_name(Prediction p) {
  switch (p) {
    case Prediction::velocity: return "velocity";
    case Prediction::clean: return "clean";
    case Prediction::residual: return "residual";
  }
  return "?";
}

Json to_json(const DiTConfig& c) {
  return Json{{"depth", c.depth},
              {"dim", c.dim},
              {"heads", c.heads},
              {"mlp_ratio", c.mlp_ratio},
              {"patch", {c.patch.t, c.patch.h, c.patch.w}},
              {"max_grid", {c.max_grid.f, c.max_grid.h, c.max_grid.w}},
              {"token_dim", c.token_dim},
              {"prediction", prediction_name(c.prediction)}};
}

Json to_json(const TrainConfig& c) {
  return Json{{"lr", c.lr},
              {"batch", c.batch},
              {"steps", c.steps},
              {"seed", c.seed},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"adam_eps", c.adam_eps},
              {"grad_clip", c.grad_clip},
              {"warmup_steps", c.warmup_steps},
              {"lr_decay", c.lr_decay},
              {"checkpoint_every", c.checkpoint_every},
              {"ellipse_mask_prob", c.ellipse_mask_prob},
              {"keyframe_drop_prob", c.keyframe_drop_prob},
              {"ref_fusion_drop_prob", c.ref_fusion_drop_prob}};
}

DiTConfig merge(DiTConfig c, const Json& j) {
  reject_unknown(j, {"depth", "dim", "heads", "mlp_ratio", "patch", "max_grid", "token_dim", "prediction"}, "model");
  take(j, "depth", c.depth);
  take(j, "dim", c.dim);
  take(j, "heads", c.heads);
  take(j, "mlp_ratio", c.mlp_ratio);
  take(j, "token_dim", c.token_dim);
  if (j.contains("prediction")) {
    std::string p;
    take(j, "prediction", p);
    if (p == "clean") c.prediction = Prediction::clean;
    else if (p == "residual") c.prediction = Prediction::residual;
    else if (p == "velocity") c.prediction = Prediction::velocity;
    else throw SpecError("model: prediction must be velocity, clean or residual");
  }
  std::array<int, 3> v{};
  if (j.contains("patch")) {
    take(j, "patch", v);
    c.patch = PatchSpec{v[0], v[1], v[2]};
  }
  if (j.contains("max_grid")) {
    take(j, "max_grid", v);
    c.max_grid = TokenGrid{v[0], v[1], v[2]};
  }
  try {
    c.validate();
  } catch (const DimensionError& e) {
    throw SpecError(e.what());
  }
  return c;
}

TrainConfig merge(TrainConfig c, const Json& j) {
  reject_unknown(j,
                 {"lr", "batch", "steps", "seed", "beta1", "beta2", "adam_eps", "grad_clip", "warmup_steps",
                  "lr_decay", "checkpoint_every", "ellipse_mask_prob", "keyframe_drop_prob", "ref_fusion_drop_prob"},
                 "train");
  take(j, "lr", c.lr);
  take(j, "batch", c.batch);
  take(j, "steps", c.steps);
  take(j, "seed", c.seed);
  take(j, "beta1", c.beta1);
  take(j, "beta2", c.beta2);
  take(j, "adam_eps", c.adam_eps);
  take(j, "grad_clip", c.grad_clip);
  take(j, "warmup_steps", c.warmup_steps);
  take(j, "lr_decay", c.lr_decay);
  take(j, "checkpoint_every", c.checkpoint_every);
  take(j, "ellipse_mask_prob", c.ellipse_mask_prob);
  take(j, "keyframe_drop_prob", c.keyframe_drop_prob);
  take(j, "ref_fusion_drop_prob", c.ref_fusion_drop_prob);
  c.validate();
  return c;
}

Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("malformed JSON in '" + path + "': " + e.what());
  }
}

void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace config
}  // namespace inptpu

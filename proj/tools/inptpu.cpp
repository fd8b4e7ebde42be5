// inptpu: dataset synthesis, two-stage training, reenactment and evaluation.
//
// Exit codes: 0 success, 1 internal error, 2 usage or data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include "inptpu/config.hpp"
#include "inptpu/evaluation.hpp"
#include "inptpu/image_io.hpp"
#include "inptpu/masking.hpp"
#include "inptpu/metrics.hpp"
#include "inptpu/pipeline.hpp"
#include "inptpu/synthdata.hpp"
#include "inptpu/train.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace inptpu;

namespace {

constexpr int kOk = 0;
constexpr int kInternal = 1;
constexpr int kUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

fs::path output_root() {
  const char* env = std::getenv("INPTPU_OUT");
  return env && *env ? fs::path(env) : fs::path("runs");
}

fs::path resolve(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal(); }

ReenactMode parse_mode(const std::string& s) {
  if (s == "self") return ReenactMode::self;
  if (s == "cross") return ReenactMode::cross;
  throw UsageError("unknown mode '" + s + "' (expected self or cross)");
}

Ablation parse_arm(const std::string& s) {
  for (Ablation a : {Ablation::full, Ablation::no_keyframe, Ablation::no_reference_fusion}) {
    if (s == ablation_name(a)) return a;
  }
  throw UsageError("unknown arm '" + s + "' (expected full, no-keyframe or no-ref-fusion)");
}

void require_dir(const fs::path& p, const char* what) {
  if (!fs::is_directory(p)) throw UsageError(std::string(what) + " '" + p.string() + "' does not exist");
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  int n = 200;
  std::string out;
  std::uint64_t seed = 7;
  int frames = 16;
  double ratio = 0.8;
  int workers = 1;
};

int cmd_synth(const SynthArgs& a) {
  if (a.n < 2) throw UsageError("--n must be at least 2 (one clip per split)");
  const fs::path out = a.out.empty() ? output_root() / "data" : resolve(a.out);
  synthdata::DatasetOptions opts;
  opts.count = a.n;
  opts.split_ratio = a.ratio;
  opts.seed = a.seed;
  opts.frames = a.frames;
  opts.workers = a.workers;
  const synthdata::Manifest m = synthdata::make_dataset(out, opts);
  int train = 0;
  for (const auto& r : m.records) train += r.split == "train";
  std::printf("wrote %d clips (%d train, %d test) to %s\n", m.count, train, m.count - train, out.c_str());
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string stage;
  std::string data;
  std::string out;
  std::string config;
  std::string split = "train";
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  std::optional<int> batch;
  std::optional<int> max_clips;
  bool resume = false;
  int log_every = 10;
};

int cmd_train(const TrainArgs& a) {
  DiTConfig model;
  TrainConfig train;
  std::string stage_name = a.stage, data = a.data, out = a.out;
  if (!a.config.empty()) {
    const Json j = config::read_file(a.config);
    if (!j.is_object()) throw SpecError("run config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key == "model") {
        model = config::merge(model, value);
      } else if (key == "train") {
        train = config::merge(train, value);
      } else if (key == "stage" || key == "data" || key == "out") {
        const std::string v = value.get<std::string>();
        std::string& slot = key == "stage" ? stage_name : (key == "data" ? data : out);
        if (slot.empty()) slot = v;  // flags win
      } else {
        throw SpecError("unknown run config key '" + key + "'");
      }
    }
  }
  if (stage_name.empty()) throw UsageError("--stage is required (keyframe or video)");
  if (data.empty()) throw UsageError("--data is required");
  const Stage stage = config::parse_stage(stage_name);
  if (a.steps) train.steps = *a.steps;
  if (a.seed) train.seed = *a.seed;
  if (a.lr) train.lr = *a.lr;
  if (a.batch) train.batch = *a.batch;
  train.validate();
  const fs::path data_root = resolve(data);
  require_dir(data_root, "dataset");
  const fs::path out_dir =
      out.empty() ? output_root() / (stage == Stage::image ? "keyframe" : "video") : resolve(out);

  std::vector<ClipData> clips = synthdata::load_split(data_root, a.split);
  if (a.max_clips && *a.max_clips < static_cast<int>(clips.size())) clips.resize(static_cast<std::size_t>(*a.max_clips));

  Checkpoint state;
  if (a.resume && fs::exists(out_dir / "config.json")) {
    state = checkpoint::load(out_dir);
    if (state.model.stage != stage) throw UsageError("checkpoint in '" + out_dir.string() + "' is for another stage");
    if (a.steps) state.train.steps = *a.steps;
    std::printf("resuming %s from step %d\n", out_dir.c_str(), state.step);
  } else {
    state = training::fresh_state(model, stage, train);
  }
  std::printf("training %s model: %zu parameters, %zu clips, %d steps\n", config::stage_name(stage),
              state.model.params.parameter_count(), clips.size(), state.train.steps);
  const auto start = std::chrono::steady_clock::now();
  training::run(state, clips, out_dir, [&](int step, double loss) {
    if (a.log_every > 0 && (step % a.log_every == 0 || step == state.train.steps)) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("step %6d  loss %.5f  %.1fs\n", step, loss, secs);
      std::fflush(stdout);
    }
  });
  if (state.train.steps == state.step) checkpoint::save(out_dir, state);
  std::printf("checkpoint: %s\n", out_dir.c_str());
  return kOk;
}

// ---------------------------------------------------------------- reenact

struct ReenactArgs {
  std::string job;
  std::string source, mask, reference;
  std::string mode = "self";
  std::uint64_t seed = 0;
  int clip_length = 16;
  int clips = 1;
  std::string ckpt_img, ckpt_vid;
  std::string out;
  std::string data, split = "test";
  std::optional<int> max_clips;
  std::string arm = "full";
  int sampler_steps = 20;
};

void check_cross_coverage(const MaskVideo& source, const MaskVideo& used) {
  for (int f = 0; f < source.size(); ++f) {
    const Mask2D& s = source.frames[f];
    const Mask2D& u = used.frames[f];
    if (((s >= masking::kBinarizeThreshold).cast<float>() * (1.0f - 1e-6f - u)).maxCoeff() > 0.0f) {
      throw Error("adaptive mask fails to cover the source foreground in frame " + std::to_string(f));
    }
  }
}

void write_run(const fs::path& dir, const VideoTensor& video, const MaskVideo& mask, const Json& echo) {
  image_io::write_video_dir(dir / "frames", video);
  image_io::write_mask_dir(dir / "masks", mask);
  config::write_file((dir / "job.json").string(), echo);
}

int cmd_reenact(ReenactArgs a) {
  int n_clips = a.clips;
  if (!a.job.empty()) {
    const Json j = config::read_file(a.job);
    static const std::set<std::string> known{"source_dir", "mask_dir",       "reference_png",  "mode",
                                             "seed",       "clip_length",    "n_clips",        "checkpoint_img",
                                             "checkpoint_vid", "out_dir"};
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw SpecError("unknown job key '" + key + "'");
    }
    try {
      if (a.source.empty()) a.source = j.value("source_dir", "");
      if (a.mask.empty()) a.mask = j.value("mask_dir", "");
      if (a.reference.empty()) a.reference = j.value("reference_png", "");
      if (a.ckpt_img.empty()) a.ckpt_img = j.value("checkpoint_img", "");
      if (a.ckpt_vid.empty()) a.ckpt_vid = j.value("checkpoint_vid", "");
      if (a.out.empty()) a.out = j.value("out_dir", "");
      a.mode = j.value("mode", a.mode);
      a.seed = j.value("seed", a.seed);
      a.clip_length = j.value("clip_length", a.clip_length);
      n_clips = j.value("n_clips", n_clips);
    } catch (const Json::exception& e) {
      throw SpecError(std::string("job file: ") + e.what());
    }
  }
  const ReenactMode mode = parse_mode(a.mode);
  GenerationOptions options = ablation_options(parse_arm(a.arm));
  options.schedule.steps = a.sampler_steps;
  if (a.ckpt_img.empty() || a.ckpt_vid.empty()) throw UsageError("--ckpt-img and --ckpt-vid are required");
  require_dir(resolve(a.ckpt_img), "checkpoint");
  require_dir(resolve(a.ckpt_vid), "checkpoint");
  const ModelPair models{checkpoint::load_model(resolve(a.ckpt_img)), checkpoint::load_model(resolve(a.ckpt_vid))};
  const fs::path out = a.out.empty() ? output_root() / "reenact" : resolve(a.out);

  auto run_one = [&](const ReenactmentJob& job, const fs::path& dir, const Json& echo) {
    const MaskVideo used = pipeline::job_mask(job);
    if (job.mode == ReenactMode::cross) check_cross_coverage(job.source_mask, used);
    const VideoTensor video = n_clips == 1 ? pipeline::reenact(models, job, options)
                                           : pipeline::generate_long_video(models, job, n_clips, options);
    write_run(dir, video, used.range(0, video.frames()), echo);
    return video.frames();
  };

  if (!a.data.empty()) {
    const fs::path root = resolve(a.data);
    require_dir(root, "dataset");
    const std::vector<fs::path> dirs = synthdata::split_dirs(root, a.split);
    std::vector<ClipData> clips;
    for (const fs::path& d : dirs) clips.push_back(synthdata::read_clip(d));
    std::size_t count = clips.size();
    if (a.max_clips) count = std::min(count, static_cast<std::size_t>(std::max(0, *a.max_clips)));
    for (std::size_t i = 0; i < count; ++i) {
      const ClipData* other = mode == ReenactMode::cross ? &clips[evaluation::cross_partner(clips, i)] : nullptr;
      ReenactmentJob job = evaluation::clip_job(clips[i], mode, a.seed + i, other);
      job.clip_length = std::min(a.clip_length, clips[i].video.frames());
      const std::string name = dirs[i].filename().string();
      Json echo{{"source_dir", (dirs[i] / "frames").string()}, {"mode", a.mode}, {"seed", job.seed},
                {"clip_length", job.clip_length}, {"n_clips", n_clips}, {"arm", a.arm},
                {"checkpoint_img", resolve(a.ckpt_img).string()}, {"checkpoint_vid", resolve(a.ckpt_vid).string()}};
      if (other) echo["reference_sprite"] = other->spec.sprite_id;
      const int frames = run_one(job, out / name, echo);
      std::printf("%s: %d frames\n", name.c_str(), frames);
    }
    std::printf("output: %s\n", out.c_str());
    return kOk;
  }

  if (a.source.empty() || a.mask.empty() || a.reference.empty()) {
    throw UsageError("give --job, --data, or all of --source, --mask and --reference");
  }
  for (const std::string& d : {a.source, a.mask}) require_dir(resolve(d), "input directory");
  if (!fs::exists(resolve(a.reference))) throw UsageError("reference '" + a.reference + "' does not exist");
  ReenactmentJob job;
  job.source_video = image_io::read_video_dir(resolve(a.source));
  job.source_mask = image_io::read_mask_dir(resolve(a.mask));
  job.reference = ReferenceImage(image_io::read_png(resolve(a.reference), 3));
  job.mode = mode;
  job.seed = a.seed;
  job.clip_length = a.clip_length;
  const Json echo{{"source_dir", resolve(a.source).string()}, {"mask_dir", resolve(a.mask).string()},
                  {"reference_png", resolve(a.reference).string()}, {"mode", a.mode}, {"seed", a.seed},
                  {"clip_length", a.clip_length}, {"n_clips", n_clips}, {"arm", a.arm},
                  {"checkpoint_img", resolve(a.ckpt_img).string()}, {"checkpoint_vid", resolve(a.ckpt_vid).string()},
                  {"out_dir", out.string()}};
  const int frames = run_one(job, out, echo);
  std::printf("wrote %d frames to %s\n", frames, out.c_str());
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string run;
  std::string data;
  std::string gt;
  std::string masks;
  std::string split = "test";
  bool ablate = false;
  std::string ckpt_img, ckpt_vid;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<int> max_clips;
  int sampler_steps = 20;
};

int cmd_eval(const EvalArgs& a) {
  if (a.ablate) {
    if (a.data.empty() || a.ckpt_img.empty() || a.ckpt_vid.empty()) {
      throw UsageError("--ablate needs --data, --ckpt-img and --ckpt-vid");
    }
    const fs::path root = resolve(a.data);
    require_dir(root, "dataset");
    require_dir(resolve(a.ckpt_img), "checkpoint");
    require_dir(resolve(a.ckpt_vid), "checkpoint");
    const ModelPair models{checkpoint::load_model(resolve(a.ckpt_img)), checkpoint::load_model(resolve(a.ckpt_vid))};
    std::vector<fs::path> dirs = synthdata::split_dirs(root, a.split);
    if (a.max_clips && *a.max_clips < static_cast<int>(dirs.size())) dirs.resize(static_cast<std::size_t>(*a.max_clips));
    std::vector<ClipData> clips;
    std::vector<std::string> names;
    for (const fs::path& d : dirs) {
      clips.push_back(synthdata::read_clip(d));
      names.push_back(d.filename().string());
    }
    GenerationOptions base;
    base.schedule.steps = a.sampler_steps;
    const fs::path out = a.out.empty() ? (a.run.empty() ? output_root() / "ablation" : resolve(a.run)) : resolve(a.out);
    const evaluation::SplitRun run =
        evaluation::run_split(models, clips, names, {Ablation::full, Ablation::no_reference_fusion, Ablation::no_keyframe},
                              a.seed, base, out);
    Json arms = Json::array();
    for (const auto& arm : run.arms) {
      EvalReport r;
      r.clips = arm.clips;
      r.mean = arm.mean;
      r.run_dir = out / ablation_name(arm.arm);
      r.gt_dir = root / a.split;
      r.mask_dir = r.run_dir;
      metrics::write_report(r.run_dir, r);
      arms.push_back({{"arm", ablation_name(arm.arm)},
                      {"psnr", arm.mean.psnr},
                      {"subject_consistency", arm.mean.subject_consistency},
                      {"motion_smoothness", arm.mean.motion_smoothness}});
    }
    const std::string table = evaluation::comparison_table(run);
    config::write_file((out / "ablation.json").string(),
                       Json{{"arms", arms}, {"gray_fill_psnr", run.baseline_mean}, {"clips", clips.size()},
                            {"seed", a.seed}});
    std::ofstream(out / "ablation.txt") << table;
    std::cout << table;
    return kOk;
  }
  if (a.run.empty()) throw UsageError("--run is required");
  const fs::path run = resolve(a.run);
  require_dir(run, "run directory");
  fs::path gt;
  if (!a.gt.empty()) {
    gt = resolve(a.gt);
  } else if (!a.data.empty()) {
    gt = resolve(a.data) / a.split;
  } else {
    throw UsageError("give --data or --gt for the ground truth");
  }
  require_dir(gt, "ground truth");
  const fs::path masks = a.masks.empty() ? run : resolve(a.masks);
  require_dir(masks, "mask directory");
  const EvalReport report = metrics::evaluate(run, gt, masks);
  metrics::write_report(run, report);
  std::cout << metrics::report_table(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inpainting-based token process for hand-object reenactment (desk scale)", "inptpu"};
  app.require_subcommand(1);

  SynthArgs synth;
  CLI::App* s = app.add_subcommand("synth", "Render a synthetic sprite dataset");
  s->add_option("--n", synth.n, "Number of clips (>= 2)")->capture_default_str();
  s->add_option("--out", synth.out, "Dataset root (default $INPTPU_OUT/data)");
  s->add_option("--seed", synth.seed, "Dataset seed")->capture_default_str();
  s->add_option("--frames", synth.frames, "Frames per clip")->capture_default_str();
  s->add_option("--ratio", synth.ratio, "Fraction of clips in the train split")->capture_default_str();
  s->add_option("--workers", synth.workers, "Parallel render workers")->capture_default_str();

  TrainArgs train;
  CLI::App* t = app.add_subcommand("train", "Train the keyframe or the video model");
  t->add_option("--stage", train.stage, "keyframe or video");
  t->add_option("--data", train.data, "Dataset root");
  t->add_option("--out", train.out, "Checkpoint directory (default $INPTPU_OUT/<stage>)");
  t->add_option("--config", train.config, "Run config JSON {model, train, stage, data, out}; flags win");
  t->add_option("--steps", train.steps, "Total optimizer steps");
  t->add_option("--seed", train.seed, "Training seed");
  t->add_option("--lr", train.lr, "Learning rate");
  t->add_option("--batch", train.batch, "Clips per step");
  t->add_option("--split", train.split, "Dataset split to train on")->capture_default_str();
  t->add_option("--max-clips", train.max_clips, "Use only the first N clips of the split");
  t->add_flag("--resume", train.resume, "Continue from the checkpoint in --out");
  t->add_option("--log-every", train.log_every, "Progress line interval")->capture_default_str();

  ReenactArgs re;
  CLI::App* r = app.add_subcommand("reenact", "Self or cross reenactment of a clip or a dataset split");
  r->add_option("--job", re.job, "Job JSON {source_dir, mask_dir, reference_png, mode, seed, clip_length, "
                                 "n_clips, checkpoint_img, checkpoint_vid, out_dir}");
  r->add_option("--source", re.source, "Source frame directory");
  r->add_option("--mask", re.mask, "Source mask directory");
  r->add_option("--reference", re.reference, "Reference PNG");
  r->add_option("--mode", re.mode, "self or cross")->capture_default_str();
  r->add_option("--seed", re.seed, "Sampling seed")->capture_default_str();
  r->add_option("--clip-length", re.clip_length, "Frames per generated clip")->capture_default_str();
  r->add_option("--clips", re.clips, "Number of chained clips")->capture_default_str();
  r->add_option("--ckpt-img", re.ckpt_img, "Keyframe model checkpoint");
  r->add_option("--ckpt-vid", re.ckpt_vid, "Video model checkpoint");
  r->add_option("--out", re.out, "Output directory (default $INPTPU_OUT/reenact)");
  r->add_option("--data", re.data, "Dataset root: reenact every clip of --split");
  r->add_option("--split", re.split, "Split for --data")->capture_default_str();
  r->add_option("--max-clips", re.max_clips, "Only the first N clips of the split");
  r->add_option("--arm", re.arm, "full, no-keyframe or no-ref-fusion")->capture_default_str();
  r->add_option("--sampler-steps", re.sampler_steps, "Euler steps")->capture_default_str();

  EvalArgs ev;
  CLI::App* e = app.add_subcommand("eval", "Score a run directory or run the ablation arms");
  e->add_option("--run", ev.run, "Run directory written by reenact");
  e->add_option("--data", ev.data, "Dataset root (ground truth is <data>/<split>)");
  e->add_option("--gt", ev.gt, "Ground-truth root, overrides --data");
  e->add_option("--masks", ev.masks, "Mask root (default: the run directory)");
  e->add_option("--split", ev.split, "Split for --data")->capture_default_str();
  e->add_flag("--ablate", ev.ablate, "Run full / no-ref-fusion / no-keyframe on --data and compare");
  e->add_option("--ckpt-img", ev.ckpt_img, "Keyframe model checkpoint (--ablate)");
  e->add_option("--ckpt-vid", ev.ckpt_vid, "Video model checkpoint (--ablate)");
  e->add_option("--out", ev.out, "Ablation output directory");
  e->add_option("--seed", ev.seed, "Sampling seed")->capture_default_str();
  e->add_option("--max-clips", ev.max_clips, "Only the first N clips of the split");
  e->add_option("--sampler-steps", ev.sampler_steps, "Euler steps")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (t->parsed()) return cmd_train(train);
    if (r->parsed()) return cmd_reenact(re);
    if (e->parsed()) return cmd_eval(ev);
  } catch (const UsageError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const SpecError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const DataError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const DimensionError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const ShapeMismatchError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const EmptyMaskError& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "internal error: %s\n", err.what());
    return kInternal;
  }
  return kUsage;
}

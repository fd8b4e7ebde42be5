// Acceptance suite: one PASS/FAIL line per headline criterion.
//
// Trained criteria use the reference recipe (configs/keyframe.json and
// configs/video.json on the 200-clip seed-7 dataset).  Checkpoints are cached
// under --cache and trained there when missing, which takes hours on one CPU
// core; --ckpt-img / --ckpt-vid point at existing ones instead.  --quick runs
// only the criteria that need no training.
//
// Exit code 0 when every criterion that ran passed.

#include <CLI11.hpp>

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "inptpu/config.hpp"
#include "inptpu/evaluation.hpp"
#include "inptpu/latent_codec.hpp"
#include "inptpu/masking.hpp"
#include "inptpu/metrics.hpp"
#include "inptpu/pipeline.hpp"
#include "inptpu/synthdata.hpp"
#include "inptpu/tokenizer.hpp"
#include "inptpu/train.hpp"

#ifndef INPTPU_SOURCE_DIR
#define INPTPU_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using namespace inptpu;
using Clock = std::chrono::steady_clock;

namespace {

struct Options {
  bool quick = false;
  std::string cache = "acceptance_cache";
  std::string data;
  std::string ckpt_img;
  std::string ckpt_vid;
  std::string configs = std::string(INPTPU_SOURCE_DIR) + "/configs";
  int max_clips = 0;
  int sampler_steps = 20;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o, double seconds, double limit = 0.0) {
  bool pass = o.pass;
  std::string detail = o.detail;
  if (limit > 0.0 && seconds > limit) {
    pass = false;
    detail += " (over the " + std::to_string(static_cast<int>(limit)) + " s budget)";
  }
  if (!pass) ++failures;
  std::printf("%s  %-28s %7.1f s  %s\n", pass ? "PASS" : "FAIL", name.c_str(), seconds, detail.c_str());
  std::fflush(stdout);
}

void skip(const std::string& name, const std::string& why) {
  std::printf("SKIP  %-28s %9s  %s\n", name.c_str(), "", why.c_str());
  std::fflush(stdout);
}

void timed(const std::string& name, double limit, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("threw: ") + e.what()};
  }
  report(name, o, std::chrono::duration<double>(Clock::now() - t0).count(), limit);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

template <typename T>
bool bit_equal(const T& a, const T& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(*a.data()) * static_cast<std::size_t>(a.size())) == 0;
}

// ------------------------------------------------------------ criteria

Outcome blend_exactness() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto tokens = [&](int n, int d, double lo, double hi) {
    TokenSequence s;
    s.tokens.resize(n, d);
    for (Eigen::Index i = 0; i < s.tokens.size(); ++i) s.tokens.data()[i] = static_cast<float>(lo + (hi - lo) * u(rng));
    s.grid = TokenGrid{1, 1, n};
    return s;
  };
  TokenMask m;
  m.grid = TokenGrid{1, 1, 64};
  const TokenSequence a = tokens(64, 192, -3, 3), b = tokens(64, 192, -3, 3);
  m.weights = Eigen::VectorXf::Zero(64);
  bool ok = bit_equal(inp_tpu::blend_tokens(a, b, m).tokens, a.tokens);
  m.weights.setOnes();
  ok = ok && bit_equal(inp_tpu::blend_tokens(a, b, m).tokens, b.tokens);
  int bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double lo = -4.0 * u(rng), hi = lo + 0.01 + 4.0 * u(rng);
    const TokenSequence x = tokens(16, 24, lo, hi), y = tokens(16, 24, lo, hi);
    TokenMask w;
    w.grid = x.grid;
    w.weights.resize(16);
    for (int i = 0; i < 16; ++i) w.weights[i] = u(rng) < 0.25 ? 0.0f : static_cast<float>(u(rng));
    const TokenSequence out = inp_tpu::blend_tokens(x, y, w);
    const float lo_in = std::min(x.tokens.minCoeff(), y.tokens.minCoeff());
    const float hi_in = std::max(x.tokens.maxCoeff(), y.tokens.maxCoeff());
    bool inst = out.tokens.minCoeff() >= lo_in && out.tokens.maxCoeff() <= hi_in;
    for (int i = 0; i < 16; ++i) {
      if (w.weights[i] == 0.0f) inst = inst && bit_equal(out.tokens.row(i).eval(), x.tokens.row(i).eval());
    }
    bad += !inst;
  }
  return {ok && bad == 0, "passthrough " + std::string(ok ? "bit-exact" : "MISMATCH") + ", " +
                              std::to_string(1000 - bad) + "/1000 convex instances"};
}

Outcome round_trips() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  int codec_ok = 0, tok_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    VideoTensor v(Shape4{1 + trial % 4, 16 + 8 * (trial % 3), 32, 3});
    for (Eigen::Index i = 0; i < v.values.size(); ++i) v.values[i] = static_cast<float>(n(rng));
    codec_ok += bit_equal(latent_codec::decode(latent_codec::encode(v)).values, v.values);
    LatentTensor z(Shape4{1 + trial % 4, 4 + 2 * (trial % 3), 8, 48}, 4, 1);
    for (Eigen::Index i = 0; i < z.values.size(); ++i) z.values[i] = static_cast<float>(n(rng));
    tok_ok += bit_equal(tokenizer::unpatchify(tokenizer::patchify(z)).values, z.values);
  }
  return {codec_ok == 100 && tok_ok == 100,
          "codec " + std::to_string(codec_ok) + "/100, tokenizer " + std::to_string(tok_ok) + "/100 bit-exact"};
}

Mask2D random_blob(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(14.0, 50.0), rad(1.5, 10.0), ang(0.0, std::numbers::pi);
  Mask2D m = Mask2D::Zero(64, 64);
  const int parts = 1 + static_cast<int>(rng() % 3);
  for (int p = 0; p < parts; ++p) {
    const double cr = pos(rng), cc = pos(rng), ra = rad(rng), rb = rad(rng), t = ang(rng);
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        const double dr = r - cr, dc = c - cc;
        const double a = (dr * std::cos(t) + dc * std::sin(t)) / ra, b = (-dr * std::sin(t) + dc * std::cos(t)) / rb;
        if (a * a + b * b <= 1.0) m(r, c) = 1.0f;
      }
    }
  }
  if (m.maxCoeff() == 0.0f) m(32, 32) = 1.0f;
  return m;
}

Outcome mask_geometry() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ext(1.0, 40.0), ang(-std::numbers::pi / 4, std::numbers::pi / 4),
      ratio(0.2, 5.0);
  double worst_corner = 0.0, worst_ratio = 0.0;
  bool shrink = false;
  for (int trial = 0; trial < 1000; ++trial) {
    OrientedBox b;
    b.center = {32.0, 32.0};
    b.height = ext(rng);
    b.width = ext(rng);
    b.angle = ang(rng);
    const EllipseAxes own = masking::adaptive_axes(b, b.height / b.width);
    for (const auto& c : b.corners()) {
      worst_corner = std::max(worst_corner, std::abs(masking::normalized_radius(b, own, c.x(), c.y()) - 1.0));
    }
    const double r = ratio(rng);
    const EllipseAxes g = masking::adaptive_axes(b, r);
    worst_ratio = std::max(worst_ratio, std::abs(g.a / g.b - r) / r);
    shrink = shrink || g.a < std::numbers::sqrt2 * b.height / 2 - 1e-12 || g.b < std::numbers::sqrt2 * b.width / 2 - 1e-12;
  }
  int covered = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Mask2D src = random_blob(rng);
    const Mask2D m = masking::adaptive_ellipse_mask(masking::compute_obb(src), ratio(rng), 64, 64);
    bool ok = true;
    for (Eigen::Index i = 0; i < src.size(); ++i) ok = ok && (src.data()[i] < 0.5f || m.data()[i] >= 1.0f - 1e-6f);
    covered += ok;
  }
  const bool pass = worst_corner <= 1e-9 && worst_ratio <= 1e-9 && !shrink && covered == 500;
  return {pass, fmt("corner |rho-1| max %.2g, ratio rel err max %.2g, ", worst_corner, worst_ratio) +
                    (shrink ? "an axis shrank, " : "no shrink, ") + std::to_string(covered) + "/500 masks covered"};
}

Outcome obb_oracle() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Eigen::Vector2d> pts(3 + rng() % 40);
    for (auto& p : pts) p = {u(rng), u(rng)};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const Eigen::Vector2d e = (pts[j] - pts[i]).normalized(), n(-e.y(), e.x());
        double a0 = 1e300, a1 = -1e300, b0 = 1e300, b1 = -1e300;
        for (const auto& p : pts) {
          a0 = std::min(a0, p.dot(e)), a1 = std::max(a1, p.dot(e));
          b0 = std::min(b0, p.dot(n)), b1 = std::max(b1, p.dot(n));
        }
        best = std::min(best, (a1 - a0) * (b1 - b0));
      }
    }
    worst = std::max(worst, std::abs(masking::min_area_rect(pts).area() - best) / best);
  }
  return {worst <= 1e-6, fmt("max relative area error %.2g over 200 sets", worst)};
}

Outcome gradient_check() {
  DiTConfig cfg;
  cfg.depth = 2;
  cfg.dim = 16;
  cfg.heads = 4;
  cfg.token_dim = 12;
  double worst = 0.0;
  std::size_t slots = 0;
  for (Prediction mode : {Prediction::residual, Prediction::clean, Prediction::velocity}) {
    cfg.prediction = mode;
    Model<double> model = init_model<double>(cfg, Stage::video, 3);
    randomize_parameters(model, 11, 1.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ConditionBundle b;
    b.stage = Stage::video;
    b.x_cond.grid = TokenGrid{2, 2, 2};
    b.x_cond.patch = PatchSpec{1, 2, 2};
    b.x_cond.latent_channels = 3;
    b.x_cond.tokens.resize(8, 12);
    for (Eigen::Index i = 0; i < b.x_cond.tokens.size(); ++i) b.x_cond.tokens.data()[i] = static_cast<float>(u(rng));
    b.x_mask.grid = b.x_cond.grid;
    b.x_mask.weights.resize(8);
    for (int i = 0; i < 8; ++i) b.x_mask.weights[i] = static_cast<float>(u(rng));
    TokenSequence k = b.x_cond;
    k.grid.f = 1;
    k.tokens = b.x_cond.tokens.topRows(4).array() + 0.1f;
    b.keyframe_tokens = k;
    const RowMatrix<double> x0 = RowMatrix<double>::Random(8, 12);
    const FlowDraw<double> draw = flow::draw<double>(x0, b, rng);
    ParamStore<double> g = dit::zeros_like(model.params);
    flow::loss_and_grad(model, draw, g);
    for (auto& [name, slot] : model.params.slots) {
      RowMatrix<double> fd(slot.rows(), slot.cols());
      for (Eigen::Index i = 0; i < slot.size(); ++i) {
        const double keep = slot.data()[i];
        slot.data()[i] = keep + 1e-4;
        const double up = flow::draw_loss(model, draw);
        slot.data()[i] = keep - 1e-4;
        const double down = flow::draw_loss(model, draw);
        slot.data()[i] = keep;
        fd.data()[i] = (up - down) / 2e-4;
      }
      const RowMatrix<double>& an = g.at(name);
      worst = std::max(worst, (an - fd).norm() / std::max({an.norm(), fd.norm(), 1e-300}));
    }
    slots += g.slots.size();
  }
  return {worst < 1e-4, fmt("max relative error %.2g over %.0f slots (all heads)", worst, static_cast<double>(slots))};
}

double half_loss_ratio(const std::vector<double>& losses) {
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 50; ++i) {
    first += losses[i] / 50;
    last += losses[losses.size() - 50 + i] / 50;
  }
  return last / first;
}

// The criterion runs the default (velocity) head.  The residual head of the
// shipped recipe starts at the copy solution, so its ratio is reported
// alongside without gating.
Outcome training_smoke(const fs::path& data) {
  std::vector<ClipData> clips = synthdata::load_split(data, "train");
  clips.resize(std::min<std::size_t>(clips.size(), 32));
  const TrainConfig cfg;  // lr 1e-4, batch 8, 500 steps, seed 0
  const TrainResult r = training::train(DiTConfig{}, Stage::image, clips, cfg);
  const double ratio = half_loss_ratio(r.losses);
  TrainConfig prefix = cfg;
  prefix.steps = 20;
  const TrainResult again = training::train(DiTConfig{}, Stage::image, clips, prefix);
  const bool same = std::equal(again.losses.begin(), again.losses.end(), r.losses.begin());
  DiTConfig residual;
  residual.prediction = Prediction::residual;
  const double residual_ratio = half_loss_ratio(training::train(residual, Stage::image, clips, cfg).losses);
  return {ratio < 0.5 && same, fmt("velocity head: last-50 / first-50 mean %.3f; ", ratio) +
                                   (same ? "rerun prefix bit-identical" : "rerun prefix DIFFERS") +
                                   fmt("; residual head (info): %.3f", residual_ratio)};
}

// ------------------------------------------------------------ recipe

struct Recipe {
  Stage stage;
  DiTConfig model;
  TrainConfig train;
};

Recipe read_recipe(const fs::path& path) {
  const config::Json j = config::read_file(path.string());
  Recipe r{config::parse_stage(j.at("stage").get<std::string>()), config::merge(DiTConfig{}, j.value("model", config::Json::object())),
           config::merge(TrainConfig{}, j.value("train", config::Json::object()))};
  return r;
}

ModelBundle recipe_model(const fs::path& recipe_file, const fs::path& dir, const fs::path& data) {
  const Recipe r = read_recipe(recipe_file);
  if (fs::exists(dir / "train_state.json")) {
    Checkpoint c = checkpoint::load(dir);
    if (c.step >= r.train.steps) return c.model;
    std::fprintf(stderr, "resuming %s from step %d\n", dir.c_str(), c.step);
    training::run(c, synthdata::load_split(data, "train"), dir, [](int step, double loss) {
      if (step % 100 == 0) std::fprintf(stderr, "  step %5d  loss %.5f\n", step, loss);
    });
    return c.model;
  }
  std::fprintf(stderr, "training %s (%s, %d steps)\n", dir.c_str(), recipe_file.c_str(), r.train.steps);
  return training::train(r.model, r.stage, synthdata::load_split(data, "train"), r.train, dir,
                         [](int step, double loss) {
                           if (step % 100 == 0) std::fprintf(stderr, "  step %5d  loss %.5f\n", step, loss);
                         })
      .model;
}

ModelPair tiny_models() {
  DiTConfig cfg;
  cfg.depth = 1;
  cfg.dim = 32;
  cfg.heads = 2;
  ModelPair m{init_model<float>(cfg, Stage::image, 1), init_model<float>(cfg, Stage::video, 2)};
  randomize_parameters(m.image, 3, 0.2);
  randomize_parameters(m.video, 4, 0.2);
  return m;
}

Outcome keyframe_and_chaining(const ModelPair& models, const GenerationOptions& opt, int test_sprite) {
  SceneSpec spec = random_scene(test_sprite, 1234, 46);
  const ClipData clip = render_clip(spec);
  ReenactmentJob job = evaluation::clip_job(clip, ReenactMode::self, 3);
  job.clip_length = 16;
  const VideoTensor kf = pipeline::generate_keyframe(models.image, job, opt).keyframe;
  const VideoTensor v = pipeline::generate_video(models.video, job, kf, opt);
  const bool frame0 = bit_equal(v.frame(0).values, kf.values);
  const std::vector<VideoTensor> clips = pipeline::generate_clips(models, job, 3, opt);
  int boundaries = 0;
  for (int k = 0; k + 1 < 3; ++k) boundaries += bit_equal(clips[k].frame(15).values, clips[k + 1].frame(0).values);
  const int frames = pipeline::generate_long_video(models, job, 3, opt).frames();
  return {frame0 && boundaries == 2 && frames == 46,
          std::string("frame 0 ") + (frame0 ? "bit-exact" : "DIFFERS") + ", " + std::to_string(boundaries) +
              "/2 boundaries identical, " + std::to_string(frames) + " frames"};
}

Outcome metric_goldens() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  VideoTensor a(Shape4{4, 16, 16, 3});
  for (Eigen::Index i = 0; i < a.values.size(); ++i) a.values[i] = static_cast<float>(u(rng));
  // Uniform 0.1 difference; adding 0.1f to random values would round per
  // element, so compare a zero video with a constant one.
  const double p = metrics::psnr(VideoTensor(a.shape, 0.0f), VideoTensor(a.shape, 0.1f));
  VideoTensor still(Shape4{5, 16, 16, 3});
  for (int f = 0; f < 5; ++f) still.set_frame(f, a.frame(0));
  Mask2D box = Mask2D::Zero(16, 16);
  box.block(3, 4, 8, 6) = 1.0f;
  const MaskVideo m(std::vector<Mask2D>(5, box));
  const double ms = metrics::motion_smoothness(still), sc = metrics::subject_consistency(still, m);
  VideoTensor alt(Shape4{6, 16, 16, 3});
  for (int f = 0; f < 6; ++f) alt.set_frame(f, a.frame(f % 2));
  const double ab = metrics::motion_smoothness(alt);
  // The 1e-8 denominator guard keeps the alternating score a hair above 0.
  const bool pass = std::abs(p - 20.0) <= 1e-6 && ms == 1.0 && std::abs(sc - 1.0) <= 1e-12 && ab <= 1e-6;
  return {pass, fmt("psnr %.9f dB, static smoothness %.6f / consistency %.6f, alternating %.2g", p, ms, sc, ab)};
}

struct CrossScores {
  double full = 0.0, no_ref = 0.0;
  int covered = 0, count = 0;
  bool deterministic = false;
};

CrossScores unseen_objects(const ModelPair& models, const std::vector<ClipData>& clips, const GenerationOptions& base,
                           std::uint64_t seed) {
  CrossScores s;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const ClipData& other = clips[evaluation::cross_partner(clips, i)];
    const ReenactmentJob job = evaluation::clip_job(clips[i], ReenactMode::cross, seed + i, &other);
    const MaskVideo used = pipeline::job_mask(job);
    bool ok = true;
    for (int f = 0; f < used.size(); ++f) {
      for (Eigen::Index k = 0; k < used.frames[f].size(); ++k) {
        ok = ok && (job.source_mask.frames[f].data()[k] < 0.5f || used.frames[f].data()[k] >= 1.0f - 1e-6f);
      }
    }
    s.covered += ok;
    const VideoTensor full = pipeline::reenact(models, job, ablation_options(Ablation::full, base));
    const VideoTensor no_ref = pipeline::reenact(models, job, ablation_options(Ablation::no_reference_fusion, base));
    s.full += metrics::subject_consistency(full, used);
    s.no_ref += metrics::subject_consistency(no_ref, used);
    if (i == 0) s.deterministic = bit_equal(full.values, pipeline::reenact(models, job, ablation_options(Ablation::full, base)).values);
    ++s.count;
  }
  s.full /= s.count;
  s.no_ref /= s.count;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Acceptance suite: one PASS/FAIL line per criterion"};
  app.add_flag("--quick", o.quick, "Only criteria that need no training");
  app.add_option("--cache", o.cache, "Dataset and checkpoint cache")->capture_default_str();
  app.add_option("--data", o.data, "Existing 200-clip dataset (default <cache>/data)");
  app.add_option("--ckpt-img", o.ckpt_img, "Existing keyframe checkpoint");
  app.add_option("--ckpt-vid", o.ckpt_vid, "Existing video checkpoint");
  app.add_option("--configs", o.configs, "Directory holding keyframe.json and video.json")->capture_default_str();
  app.add_option("--max-clips", o.max_clips, "Limit test clips for the trained criteria (0 = all)");
  app.add_option("--sampler-steps", o.sampler_steps, "Euler steps")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  timed("blend exactness", 1.0, blend_exactness);
  timed("codec/tokenizer round trips", 5.0, round_trips);
  timed("adaptive mask geometry", 10.0, mask_geometry);
  timed("OBB vs brute force", 30.0, obb_oracle);
  timed("gradient check", 120.0, gradient_check);
  timed("metric golden values", 0.0, metric_goldens);

  GenerationOptions opt;
  opt.schedule.steps = o.sampler_steps;
  std::vector<int> train_ids, test_ids;
  synthdata::split_sprite_pool(7, 0.8, train_ids, test_ids);

  if (o.quick) {
    timed("keyframe and chaining", 0.0, [&] { return keyframe_and_chaining(tiny_models(), opt, test_ids.front()); });
    for (const char* name : {"training smoke", "end-to-end self", "ablation ordering", "unseen objects"}) {
      skip(name, "needs training (run without --quick)");
    }
    return failures == 0 ? 0 : 1;
  }

  const fs::path cache = fs::absolute(o.cache);
  const fs::path data = o.data.empty() ? cache / "data" : fs::absolute(o.data);
  if (!fs::exists(data / "manifest.json")) {
    std::fprintf(stderr, "rendering the 200-clip dataset into %s\n", data.c_str());
    synthdata::make_dataset(data, synthdata::DatasetOptions{});
  }

  timed("training smoke", 1800.0, [&] { return training_smoke(data); });

  ModelPair models;
  try {
    models.image = o.ckpt_img.empty() ? recipe_model(fs::path(o.configs) / "keyframe.json", cache / "keyframe", data)
                                      : checkpoint::load_model(o.ckpt_img);
    models.video = o.ckpt_vid.empty() ? recipe_model(fs::path(o.configs) / "video.json", cache / "video", data)
                                      : checkpoint::load_model(o.ckpt_vid);
  } catch (const std::exception& e) {
    for (const char* name : {"keyframe and chaining", "end-to-end self", "ablation ordering", "unseen objects"}) {
      report(name, {false, std::string("no models: ") + e.what()}, 0.0);
    }
    return 1;
  }

  timed("keyframe and chaining", 0.0, [&] { return keyframe_and_chaining(models, opt, test_ids.front()); });

  std::vector<ClipData> clips = synthdata::load_split(data, "test");
  std::vector<fs::path> dirs = synthdata::split_dirs(data, "test");
  if (o.max_clips > 0 && static_cast<std::size_t>(o.max_clips) < clips.size()) {
    clips.resize(o.max_clips);
    dirs.resize(o.max_clips);
  }
  std::vector<std::string> names;
  for (const auto& d : dirs) names.push_back(d.filename().string());

  const auto t0 = Clock::now();
  std::optional<evaluation::SplitRun> split;
  std::string split_error;
  try {
    split = evaluation::run_split(models, clips, names,
                                  {Ablation::full, Ablation::no_reference_fusion, Ablation::no_keyframe}, 0, opt);
  } catch (const std::exception& e) {
    split_error = e.what();
  }
  const double split_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  if (split) {
    const auto& full = split->arms[0];
    int beat = 0;
    for (std::size_t i = 0; i < full.clips.size(); ++i) beat += full.clips[i].psnr > split->baseline_psnr[i];
    const double gain = full.mean.psnr - split->baseline_mean;
    report("end-to-end self", {beat == static_cast<int>(full.clips.size()) && gain >= 3.0,
                               std::to_string(beat) + "/" + std::to_string(full.clips.size()) +
                                   fmt(" clips above gray fill; mean %.2f dB vs %.2f dB (+%.2f, need +3.00)",
                                       full.mean.psnr, split->baseline_mean, gain)},
           split_seconds);
    const double pf = split->arms[0].mean.psnr, pr = split->arms[1].mean.psnr, pk = split->arms[2].mean.psnr;
    report("ablation ordering",
           {pf > pr && pr > pk, fmt("full %.3f, no-ref-fusion %.3f, no-keyframe %.3f dB", pf, pr, pk)}, 0.0);
    std::printf("%s", evaluation::comparison_table(*split).c_str());
  } else {
    report("end-to-end self", {false, "threw: " + split_error}, split_seconds);
    report("ablation ordering", {false, "threw: " + split_error}, 0.0);
  }

  timed("unseen objects", 0.0, [&]() -> Outcome {
    for (const ClipData& c : clips) {
      if (std::find(train_ids.begin(), train_ids.end(), c.spec.sprite_id) != train_ids.end()) {
        return {false, "test clip uses a training sprite"};
      }
    }
    const CrossScores s = unseen_objects(models, clips, opt, 0);
    const bool pass = s.covered == s.count && s.deterministic && s.full > s.no_ref;
    return {pass, std::to_string(s.covered) + "/" + std::to_string(s.count) + " masks covered, " +
                      (s.deterministic ? "deterministic" : "NOT deterministic") +
                      fmt(", subject consistency full %.4f vs no-ref-fusion %.4f", s.full, s.no_ref)};
  });

  return failures == 0 ? 0 : 1;
}

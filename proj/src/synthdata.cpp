#include "inptpu/synthdata.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <json.hpp>

#include "inptpu/image_io.hpp"

namespace inptpu {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

constexpr int kSupersample = 4;
constexpr float kGray = 0.5f;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Eigen::Vector3f hsv(double h, double s, double v) {
  const double c = v * s;
  const double hp = std::fmod(h, 1.0) * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) r = c, g = x;
  else if (hp < 2) r = x, g = c;
  else if (hp < 3) g = c, b = x;
  else if (hp < 4) g = x, b = c;
  else if (hp < 5) r = x, b = c;
  else r = c, b = x;
  const double m = v - c;
  return Eigen::Vector3f(static_cast<float>(r + m), static_cast<float>(g + m), static_cast<float>(b + m));
}

bool inside_star(double nu, double nv) {
  // Five-pointed star, one point up, inner radius 0.5.
  constexpr int kPoints = 10;
  double xs[kPoints], ys[kPoints];
  for (int i = 0; i < kPoints; ++i) {
    const double r = (i % 2 == 0) ? 1.0 : 0.5;
    const double th = -std::numbers::pi / 2 + i * std::numbers::pi / 5;
    xs[i] = r * std::cos(th);
    ys[i] = r * std::sin(th);
  }
  bool in = false;
  for (int i = 0, j = kPoints - 1; i < kPoints; j = i++) {
    if ((ys[i] > nv) != (ys[j] > nv) && nu < (xs[j] - xs[i]) * (nv - ys[i]) / (ys[j] - ys[i]) + xs[i]) in = !in;
  }
  return in;
}

/// Shape test in sprite-local pixel units: u along the width axis, v along
/// the height axis (positive v points down the sprite).
bool inside_sprite(SpriteKind kind, double hh, double hw, double u, double v) {
  const double nu = u / hw;
  const double nv = v / hh;
  switch (kind) {
    case SpriteKind::bottle:
      if (nv >= -0.3 && nv <= 1.0) return std::abs(nu) <= 1.0;
      if (nv >= -0.55 && nv < -0.3) return std::abs(nu) <= 1.0 - 0.6 * (-0.3 - nv) / 0.25;
      return nv >= -1.0 && nv < -0.55 && std::abs(nu) <= 0.4;
    case SpriteKind::can:
      return std::pow(std::abs(nu), 6) + std::pow(std::abs(nv), 6) <= 1.0;
    case SpriteKind::box:
      return std::abs(nu) <= 1.0 && std::abs(nv) <= 1.0;
    case SpriteKind::ellipse:
      return nu * nu + nv * nv <= 1.0;
    case SpriteKind::star:
      return inside_star(nu, nv);
    case SpriteKind::capsule: {
      const double r = std::min(hh, hw);
      const double du = std::max(0.0, std::abs(u) - (hw - r));
      const double dv = std::max(0.0, std::abs(v) - (hh - r));
      return du * du + dv * dv <= r * r;
    }
    case SpriteKind::wedge:
      return nv >= -1.0 && nv <= 1.0 && std::abs(nu) <= 0.5 * (nv + 1.0);
    case SpriteKind::ring: {
      const double r2 = nu * nu + nv * nv;
      return r2 <= 1.0 && r2 >= 0.55 * 0.55;
    }
  }
  return false;
}

Eigen::Vector3f sprite_color(const SpriteIdentity& id, double nu, double nv) {
  if (std::abs(nv - 0.1) < 0.18) return id.band;
  const float shade = static_cast<float>(0.8 + 0.15 * (nu + 1.0));
  return (id.tint * shade).cwiseMin(1.0f);
}

struct SpriteSampler {
  SpriteIdentity id;
  double hh, hw, cos_t, sin_t;

  SpriteSampler(const SceneSpec& spec)
      : id(sprite_identity(spec.sprite_id)),
        hh(id.half_height * spec.sprite_scale),
        hw(id.half_width * spec.sprite_scale),
        cos_t(std::cos(spec.tilt)),
        sin_t(std::sin(spec.tilt)) {}

  /// Color at an offset (dr, dc) from the sprite center, if covered.
  bool sample(double dr, double dc, Eigen::Vector3f& color) const {
    const double u = dc * cos_t + dr * sin_t;
    const double v = -dc * sin_t + dr * cos_t;
    if (!inside_sprite(id.kind, hh, hw, u, v)) return false;
    color = sprite_color(id, u / hw, v / hh);
    return true;
  }
};

Eigen::Vector3f background_at(const SceneSpec& spec, double row, double col) {
  if (!spec.gradient) return spec.background0;
  const double ca = std::cos(spec.gradient_angle), sa = std::sin(spec.gradient_angle);
  const double half = 0.5 * std::hypot(spec.height, spec.width);
  const double proj = ((col - 0.5 * spec.width) * ca + (row - 0.5 * spec.height) * sa) / (2.0 * half) + 0.5;
  const float w = static_cast<float>(std::clamp(proj, 0.0, 1.0));
  return (1.0f - w) * spec.background0 + w * spec.background1;
}

Eigen::Vector2d catmull_rom(const std::vector<Eigen::Vector2d>& pts, double s) {
  const int n = static_cast<int>(pts.size());
  if (n == 1) return pts[0];
  const double x = std::clamp(s, 0.0, 1.0) * (n - 1);
  const int seg = std::min(static_cast<int>(x), n - 2);
  const double t = x - seg;
  const auto at = [&](int i) { return pts[std::clamp(i, 0, n - 1)]; };
  const Eigen::Vector2d p0 = at(seg - 1), p1 = at(seg), p2 = at(seg + 1), p3 = at(seg + 2);
  const double t2 = t * t, t3 = t2 * t;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * t + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * t3);
}

Json vec_json(const Eigen::Vector3f& v) { return Json::array({v[0], v[1], v[2]}); }
Json vec_json(const Eigen::Vector2d& v) { return Json::array({v[0], v[1]}); }

Eigen::Vector3f vec3f(const Json& j) { return {j.at(0).get<float>(), j.at(1).get<float>(), j.at(2).get<float>()}; }
Eigen::Vector2d vec2d(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Json spec_json(const SceneSpec& s) {
  Json w = Json::array();
  for (const auto& p : s.waypoints) w.push_back(vec_json(p));
  const SpriteIdentity id = sprite_identity(s.sprite_id);
  return Json{{"height", s.height},
              {"width", s.width},
              {"frames", s.frames},
              {"seed", s.seed},
              {"waypoints", w},
              {"hold_frames", s.hold_frames},
              {"grabber_radius", s.grabber_radius},
              {"grabber_color", vec_json(s.grabber_color)},
              {"sprite_id", s.sprite_id},
              {"sprite_kind", sprite_kind_name(id.kind)},
              {"sprite_scale", s.sprite_scale},
              {"tilt", s.tilt},
              {"object_offset", vec_json(s.object_offset)},
              {"gradient", s.gradient},
              {"background0", vec_json(s.background0)},
              {"background1", vec_json(s.background1)},
              {"gradient_angle", s.gradient_angle}};
}

SceneSpec spec_from_json(const Json& j) {
  SceneSpec s;
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.frames = j.at("frames").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.waypoints.clear();
  for (const auto& p : j.at("waypoints")) s.waypoints.push_back(vec2d(p));
  s.hold_frames = j.at("hold_frames").get<int>();
  s.grabber_radius = j.at("grabber_radius").get<double>();
  s.grabber_color = vec3f(j.at("grabber_color"));
  s.sprite_id = j.at("sprite_id").get<int>();
  s.sprite_scale = j.at("sprite_scale").get<double>();
  s.tilt = j.at("tilt").get<double>();
  s.object_offset = vec2d(j.at("object_offset"));
  s.gradient = j.at("gradient").get<bool>();
  s.background0 = vec3f(j.at("background0"));
  s.background1 = vec3f(j.at("background1"));
  s.gradient_angle = j.at("gradient_angle").get<double>();
  return s;
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

std::string clip_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%04d", index);
  return buf;
}

}  // namespace

const char* sprite_kind_name(SpriteKind kind) {
  switch (kind) {
    case SpriteKind::bottle: return "bottle";
    case SpriteKind::can: return "can";
    case SpriteKind::box: return "box";
    case SpriteKind::ellipse: return "ellipse";
    case SpriteKind::star: return "star";
    case SpriteKind::capsule: return "capsule";
    case SpriteKind::wedge: return "wedge";
    case SpriteKind::ring: return "ring";
  }
  return "unknown";
}

SpriteIdentity sprite_identity(int sprite_id) {
  if (sprite_id < 0 || sprite_id >= kSpritePool) {
    throw SpecError("sprite id " + std::to_string(sprite_id) + " outside [0, " + std::to_string(kSpritePool) + ")");
  }
  // Base half extents: tall, squat and round shapes so that cross swaps
  // exercise the aspect adjustment.
  static constexpr double kBase[kSpriteKinds][2] = {{11.0, 5.0}, {6.0, 9.0}, {8.0, 8.0}, {7.0, 10.0},
                                                    {9.0, 9.0},  {5.0, 11.0}, {9.0, 8.0}, {9.0, 9.0}};
  SpriteIdentity id;
  id.id = sprite_id;
  id.kind = static_cast<SpriteKind>(sprite_id % kSpriteKinds);
  std::mt19937_64 rng(splitmix64(0x5A17E5ULL + static_cast<std::uint64_t>(sprite_id)));
  id.half_height = kBase[sprite_id % kSpriteKinds][0] * uniform(rng, 0.85, 1.15);
  id.half_width = kBase[sprite_id % kSpriteKinds][1] * uniform(rng, 0.85, 1.15);
  const double hue = uniform(rng, 0.0, 1.0);
  id.tint = hsv(hue, uniform(rng, 0.55, 0.95), uniform(rng, 0.55, 0.95));
  id.band = hsv(hue + 0.5, uniform(rng, 0.2, 0.8), uniform(rng, 0.7, 1.0));
  return id;
}

void SceneSpec::validate() const {
  if (height < 8 || width < 8) throw SpecError("scene canvas must be at least 8x8");
  if (frames < 2) throw SpecError("scene needs at least 2 frames");
  if (waypoints.empty()) throw SpecError("scene trajectory has no waypoints");
  if (hold_frames < 1) throw SpecError("hold_frames must be >= 1");
  if (!(grabber_radius > 0.0) || !(sprite_scale > 0.0)) throw SpecError("scene radii must be positive");
  (void)sprite_identity(sprite_id);
  const double r = object_radius();
  for (int f = 0; f < frames; ++f) {
    const Eigen::Vector2d c = object_center(f);
    if (c.x() - r < -0.5 || c.x() + r > height - 0.5 || c.y() - r < -0.5 || c.y() + r > width - 0.5) {
      throw SpecError("object leaves the canvas at frame " + std::to_string(f));
    }
  }
}

Eigen::Vector2d SceneSpec::grabber_center(int frame) const {
  const int held = (frame / hold_frames) * hold_frames;
  const double s = frames > 1 ? static_cast<double>(held) / (frames - 1) : 0.0;
  return catmull_rom(waypoints, s);
}

Eigen::Vector2d SceneSpec::object_center(int frame) const { return grabber_center(frame) + object_offset; }

double SceneSpec::object_radius() const {
  const SpriteIdentity id = sprite_identity(sprite_id);
  return sprite_scale * std::hypot(id.half_height, id.half_width);
}

SceneSpec random_scene(int sprite_id, std::uint64_t seed, int frames, int height, int width) {
  std::mt19937_64 rng(seed);
  SceneSpec s;
  s.height = height;
  s.width = width;
  s.frames = frames;
  s.seed = seed;
  s.sprite_id = sprite_id;
  const SpriteIdentity id = sprite_identity(sprite_id);
  s.sprite_scale = uniform(rng, 0.8, 1.1);
  s.tilt = uniform(rng, -20.0, 20.0) * std::numbers::pi / 180.0;
  s.grabber_radius = uniform(rng, 5.5, 8.0);
  s.grabber_color = Eigen::Vector3f(0.85f, 0.65f, 0.5f) +
                    Eigen::Vector3f(static_cast<float>(uniform(rng, -0.1, 0.1)),
                                    static_cast<float>(uniform(rng, -0.1, 0.1)),
                                    static_cast<float>(uniform(rng, -0.1, 0.1)));
  const double reach = s.sprite_scale * std::max(id.half_height, id.half_width) * uniform(rng, 0.6, 0.9);
  const double dir = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  s.object_offset = Eigen::Vector2d(reach * std::sin(dir), reach * std::cos(dir));
  s.gradient = uniform(rng, 0.0, 1.0) < 0.5;
  for (int k = 0; k < 3; ++k) {
    s.background0[k] = static_cast<float>(uniform(rng, 0.15, 0.85));
    s.background1[k] = static_cast<float>(uniform(rng, 0.15, 0.85));
  }
  s.gradient_angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);

  const double r = s.object_radius() + 1.0;
  const double lo_r = r - 0.5, hi_r = height - 0.5 - r;
  const double lo_c = r - 0.5, hi_c = width - 0.5 - r;
  const int points = uniform(rng, 0.0, 1.0) < 0.5 ? 3 : 4;
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<Eigen::Vector2d> obj;
    obj.emplace_back(uniform(rng, lo_r, hi_r), uniform(rng, lo_c, hi_c));
    for (int k = 1; k < points; ++k) {
      const double step = uniform(rng, 6.0, 12.0);
      const double th = uniform(rng, 0.0, 2.0 * std::numbers::pi);
      obj.emplace_back(std::clamp(obj.back().x() + step * std::sin(th), lo_r, hi_r),
                       std::clamp(obj.back().y() + step * std::cos(th), lo_c, hi_c));
    }
    s.waypoints.clear();
    for (const auto& p : obj) s.waypoints.push_back(p - s.object_offset);
    try {
      s.validate();
      return s;
    } catch (const SpecError&) {
    }
  }
  s.waypoints = {Eigen::Vector2d(0.5 * (height - 1), 0.5 * (width - 1)) - s.object_offset};
  s.validate();
  return s;
}

ClipData render_clip(const SceneSpec& spec) {
  spec.validate();
  const SpriteSampler sprite(spec);
  const int H = spec.height, W = spec.width, F = spec.frames;
  constexpr int ss = kSupersample;
  constexpr float inv = 1.0f / (ss * ss);
  ClipData clip;
  clip.spec = spec;
  clip.video = VideoTensor(Shape4{F, H, W, 3});
  clip.mask = MaskVideo(F, H, W);
  for (int f = 0; f < F; ++f) {
    const Eigen::Vector2d g = spec.grabber_center(f);
    const Eigen::Vector2d o = spec.object_center(f);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        Eigen::Vector3f acc = Eigen::Vector3f::Zero();
        int covered = 0;
        for (int sy = 0; sy < ss; ++sy) {
          for (int sx = 0; sx < ss; ++sx) {
            const double row = y + (sy + 0.5) / ss - 0.5;
            const double col = x + (sx + 0.5) / ss - 0.5;
            Eigen::Vector3f c;
            if (sprite.sample(row - o.x(), col - o.y(), c)) {
              ++covered;
            } else {
              const double dist = std::hypot(row - g.x(), col - g.y());
              if (dist <= spec.grabber_radius) {
                const double q = dist / spec.grabber_radius;
                c = spec.grabber_color * static_cast<float>(1.0 - 0.25 * q * q);
              } else {
                c = background_at(spec, row, col);
              }
            }
            acc += c;
          }
        }
        for (int ch = 0; ch < 3; ++ch) clip.video(f, y, x, ch) = image_io::quantize8(acc[ch] * inv);
        clip.mask.frames[f](y, x) = image_io::quantize8(covered * inv);
      }
    }
  }
  clip.reference = render_reference(spec);
  return clip;
}

ReferenceImage render_reference(const SceneSpec& spec) {
  const SpriteSampler sprite(spec);
  const int size = static_cast<int>(std::ceil(2.0 * spec.object_radius())) + 4;
  const double center = 0.5 * (size - 1);
  constexpr int ss = kSupersample;
  constexpr float inv = 1.0f / (ss * ss);
  VideoTensor canvas(Shape4{1, size, size, 3});
  int top = size, bottom = -1, left = size, right = -1;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      Eigen::Vector3f acc = Eigen::Vector3f::Zero();
      int covered = 0;
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          Eigen::Vector3f c;
          if (sprite.sample(y + (sy + 0.5) / ss - 0.5 - center, x + (sx + 0.5) / ss - 0.5 - center, c)) {
            ++covered;
          } else {
            c = Eigen::Vector3f::Constant(kGray);
          }
          acc += c;
        }
      }
      for (int ch = 0; ch < 3; ++ch) canvas(0, y, x, ch) = image_io::quantize8(acc[ch] * inv);
      if (covered > 0) {
        top = std::min(top, y);
        bottom = std::max(bottom, y);
        left = std::min(left, x);
        right = std::max(right, x);
      }
    }
  }
  if (bottom < 0) throw SpecError("sprite covers no pixels");
  VideoTensor crop(Shape4{1, bottom - top + 1, right - left + 1, 3});
  for (int y = top; y <= bottom; ++y) {
    for (int x = left; x <= right; ++x) {
      for (int ch = 0; ch < 3; ++ch) crop(0, y - top, x - left, ch) = canvas(0, y, x, ch);
    }
  }
  return ReferenceImage(std::move(crop));
}

namespace synthdata {

std::uint64_t clip_seed(std::uint64_t seed, int index) {
  return splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(index));
}

void split_sprite_pool(std::uint64_t seed, double split_ratio, std::vector<int>& train, std::vector<int>& test) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw SpecError("split ratio must lie in (0, 1)");
  std::vector<int> ids(kSpritePool);
  for (int i = 0; i < kSpritePool; ++i) ids[i] = i;
  std::mt19937_64 rng(splitmix64(seed ^ 0x5B71D5ULL));
  std::shuffle(ids.begin(), ids.end(), rng);
  const int n_test = std::clamp(static_cast<int>(std::lround((1.0 - split_ratio) * kSpritePool)), 1, kSpritePool - 1);
  test.assign(ids.begin(), ids.begin() + n_test);
  train.assign(ids.begin() + n_test, ids.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
}

void write_clip(const fs::path& dir, const ClipData& clip) {
  fs::create_directories(dir);
  image_io::write_video_dir(dir / "frames", clip.video);
  image_io::write_mask_dir(dir / "masks", clip.mask);
  image_io::write_png(dir / "reference.png", clip.reference.pixels);
  write_json(dir / "meta.json", spec_json(clip.spec));
}

ClipData read_clip(const fs::path& dir) {
  ClipData clip;
  try {
    clip.spec = spec_from_json(read_json(dir / "meta.json"));
  } catch (const Json::exception& e) {
    throw DataError("malformed meta.json in '" + dir.string() + "': " + e.what());
  }
  clip.video = image_io::read_video_dir(dir / "frames");
  clip.mask = image_io::read_mask_dir(dir / "masks");
  clip.reference = ReferenceImage(image_io::read_png(dir / "reference.png", 3));
  if (clip.mask.size() != clip.video.frames() || clip.mask.height() != clip.video.height() ||
      clip.mask.width() != clip.video.width()) {
    throw DataError("frames and masks disagree in '" + dir.string() + "'");
  }
  return clip;
}

Manifest make_dataset(const fs::path& root, const DatasetOptions& options) {
  if (options.count < 2) throw SpecError("dataset needs at least 2 clips for a train/test split");
  if (options.frames < 2) throw SpecError("clips need at least 2 frames");
  Manifest m;
  m.seed = options.seed;
  m.count = options.count;
  m.split_ratio = options.split_ratio;
  m.frames = options.frames;
  split_sprite_pool(options.seed, options.split_ratio, m.train_sprites, m.test_sprites);
  const int n_train = std::clamp(static_cast<int>(std::lround(options.count * options.split_ratio)), 1,
                                 options.count - 1);
  for (int k = 0; k < options.count; ++k) {
    Record r;
    const bool train = k < n_train;
    const int local = train ? k : k - n_train;
    const std::vector<int>& pool = train ? m.train_sprites : m.test_sprites;
    r.split = train ? "train" : "test";
    r.name = clip_name(local);
    r.sprite_id = pool[static_cast<std::size_t>(local) % pool.size()];
    m.records.push_back(r);
  }

  fs::create_directories(root);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int k = next++; k < options.count; k = next++) {
      try {
        const Record& r = m.records[k];
        const SceneSpec spec = random_scene(r.sprite_id, clip_seed(options.seed, k), options.frames);
        write_clip(root / r.split / r.name, render_clip(spec));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, options.workers);
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  Json records = Json::array();
  for (const Record& r : m.records) {
    const std::string base = r.split + "/" + r.name;
    records.push_back({{"split", r.split},
                       {"name", r.name},
                       {"sprite_id", r.sprite_id},
                       {"video_dir", base + "/frames"},
                       {"mask_dir", base + "/masks"},
                       {"reference_png", base + "/reference.png"},
                       {"meta", base + "/meta.json"}});
  }
  write_json(root / "manifest.json", Json{{"seed", m.seed},
                                          {"count", m.count},
                                          {"split_ratio", m.split_ratio},
                                          {"frames", m.frames},
                                          {"train_sprites", m.train_sprites},
                                          {"test_sprites", m.test_sprites},
                                          {"records", records}});
  return m;
}

Manifest read_manifest(const fs::path& root) {
  if (!fs::exists(root / "manifest.json")) throw DataError("no manifest.json under '" + root.string() + "'");
  const Json j = read_json(root / "manifest.json");
  Manifest m;
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.count = j.at("count").get<int>();
    m.split_ratio = j.at("split_ratio").get<double>();
    m.frames = j.at("frames").get<int>();
    m.train_sprites = j.at("train_sprites").get<std::vector<int>>();
    m.test_sprites = j.at("test_sprites").get<std::vector<int>>();
    for (const auto& r : j.at("records")) {
      m.records.push_back(Record{r.at("split").get<std::string>(), r.at("name").get<std::string>(),
                                 r.at("sprite_id").get<int>()});
    }
  } catch (const Json::exception& e) {
    throw DataError("malformed manifest in '" + root.string() + "': " + e.what());
  }
  return m;
}

std::vector<fs::path> split_dirs(const fs::path& root, const std::string& split) {
  const Manifest m = read_manifest(root);
  std::vector<fs::path> dirs;
  for (const Record& r : m.records) {
    if (r.split == split) dirs.push_back(root / r.split / r.name);
  }
  if (dirs.empty()) throw DataError("split '" + split + "' is empty in '" + root.string() + "'");
  return dirs;
}

std::vector<ClipData> load_split(const fs::path& root, const std::string& split) {
  std::vector<ClipData> clips;
  for (const fs::path& dir : split_dirs(root, split)) clips.push_back(read_clip(dir));
  return clips;
}

}  // namespace synthdata
}  // namespace inptpu

#pragma once

// Procedural sprite hand-object-interaction clips: a disc-shaped "grabber"
// carries an object sprite along a smooth trajectory over a flat or gradient
// background.  Masks are the exact sprite coverage; the reference is the
// sprite alone on neutral gray, tight-cropped.
//
// Every clip is a deterministic function of its SceneSpec and frames are
// stored quantized to 8 bits, so a PNG round trip is lossless.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "inptpu/tensor.hpp"

namespace inptpu {

enum class SpriteKind { bottle, can, box, ellipse, star, capsule, wedge, ring };

inline constexpr int kSpriteKinds = 8;
/// Size of the sprite-identity pool: kind x proportion x palette variants.
inline constexpr int kSpritePool = 64;

const char* sprite_kind_name(SpriteKind kind);

/// Identity of an object: shape kind, proportions and colors.  Derived from a
/// sprite id alone so that train/test pools are well defined.
struct SpriteIdentity {
  int id = 0;
  SpriteKind kind = SpriteKind::box;
  double half_height = 10.0;  // pixels, along the sprite's own vertical axis
  double half_width = 6.0;
  Eigen::Vector3f tint{0.8f, 0.2f, 0.2f};
  Eigen::Vector3f band{0.9f, 0.9f, 0.9f};
};

SpriteIdentity sprite_identity(int sprite_id);

struct SceneSpec {
  int height = 64;
  int width = 64;
  int frames = 16;
  std::uint64_t seed = 0;

  /// Grabber center waypoints (row, col); a Catmull-Rom curve through them.
  std::vector<Eigen::Vector2d> waypoints{{32.0, 32.0}};
  /// Positions only advance every `hold_frames` frames (1 = continuous motion).
  int hold_frames = 1;
  double grabber_radius = 7.0;
  Eigen::Vector3f grabber_color{0.85f, 0.65f, 0.5f};

  int sprite_id = 0;
  double sprite_scale = 1.0;
  double tilt = 0.0;                        // radians
  Eigen::Vector2d object_offset{0.0, 0.0};  // object center relative to grabber

  bool gradient = false;
  Eigen::Vector3f background0{0.3f, 0.4f, 0.5f};
  Eigen::Vector3f background1{0.6f, 0.6f, 0.5f};
  double gradient_angle = 0.0;

  /// Throws SpecError for degenerate geometry or trajectories that leave the
  /// canvas.
  void validate() const;
  /// Grabber center at frame f.
  [[nodiscard]] Eigen::Vector2d grabber_center(int frame) const;
  [[nodiscard]] Eigen::Vector2d object_center(int frame) const;
  /// Radius of the circle enclosing the (scaled, tilted) object sprite.
  [[nodiscard]] double object_radius() const;
};

struct ClipData {
  SceneSpec spec;
  VideoTensor video;
  MaskVideo mask;
  ReferenceImage reference;
};

/// Randomized scene for a sprite; always passes validate().
SceneSpec random_scene(int sprite_id, std::uint64_t seed, int frames = 16, int height = 64, int width = 64);

ClipData render_clip(const SceneSpec& spec);

/// Sprite on neutral gray at the clip's scale and tilt, cropped to the
/// sprite's coverage.
ReferenceImage render_reference(const SceneSpec& spec);

namespace synthdata {

struct Record {
  std::string split;  // "train" or "test"
  std::string name;   // clip_%04d
  int sprite_id = 0;
};

struct Manifest {
  std::uint64_t seed = 0;
  int count = 0;
  double split_ratio = 0.8;
  int frames = 16;
  std::vector<int> train_sprites;
  std::vector<int> test_sprites;
  std::vector<Record> records;
};

struct DatasetOptions {
  int count = 200;
  double split_ratio = 0.8;
  std::uint64_t seed = 7;
  int frames = 16;
  int workers = 1;
};

/// Disjoint sprite pools for a seed; the test pool holds
/// round((1 - split_ratio) * kSpritePool) ids, at least one.
void split_sprite_pool(std::uint64_t seed, double split_ratio, std::vector<int>& train, std::vector<int>& test);

/// Per-clip seed derived from the dataset seed.
std::uint64_t clip_seed(std::uint64_t seed, int index);

/// Writes `root/{train,test}/clip_%04d/...` and `root/manifest.json`.
Manifest make_dataset(const std::filesystem::path& root, const DatasetOptions& options);

void write_clip(const std::filesystem::path& dir, const ClipData& clip);
ClipData read_clip(const std::filesystem::path& dir);

Manifest read_manifest(const std::filesystem::path& root);

/// Clip directories of a split, in manifest order.
std::vector<std::filesystem::path> split_dirs(const std::filesystem::path& root, const std::string& split);

std::vector<ClipData> load_split(const std::filesystem::path& root, const std::string& split);

}  // namespace synthdata
}  // namespace inptpu

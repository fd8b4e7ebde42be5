#include "doctest.h"

#include "inptpu/inp_tpu.hpp"
#include "inptpu/latent_codec.hpp"
#include "inptpu/masking.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

using namespace inptpu;

namespace {

TokenSequence filled(int n, int d, float value) {
  TokenSequence s;
  s.tokens = RowMatrixf::Constant(n, d, value);
  s.grid = TokenGrid{1, 1, n};
  s.patch = PatchSpec{1, 1, 1};
  s.latent_channels = d;
  return s;
}

TokenSequence random_tokens(int n, int d, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  TokenSequence s = filled(n, d, 0.0f);
  for (Eigen::Index i = 0; i < s.tokens.size(); ++i) s.tokens.data()[i] = static_cast<float>(u(rng));
  return s;
}

TokenMask weights(int n, float value) {
  TokenMask m;
  m.weights = Eigen::VectorXf::Constant(n, value);
  m.grid = TokenGrid{1, 1, n};
  return m;
}

bool bit_equal(const RowMatrixf& a, const RowMatrixf& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0;
}

VideoTensor random_video(Shape4 s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VideoTensor v(s);
  for (Eigen::Index i = 0; i < v.values.size(); ++i) v.values[i] = static_cast<float>(u(rng));
  return v;
}

// Straight-line condition builder: reference placement, space-to-depth,
// (1,2,2) patches, mask pooling and the per-token blend, all written out here.
RowMatrixf oracle_condition(const VideoTensor& video, const ReferenceImage& ref, const MaskVideo& mask) {
  const int F = video.frames(), H = video.height(), W = video.width(), C = video.channels();
  const int gh = H / 8, gw = W / 8, d = 4 * 16 * C;
  RowMatrixf out(F * gh * gw, d);
  for (int f = 0; f < F; ++f) {
    const Mask2D& m = mask.frames[f];
    double tot = 0, sr = 0, sc = 0;
    int r0 = H, r1 = -1, c0 = W, c1 = -1;
    for (int r = 0; r < H; ++r) {
      for (int c = 0; c < W; ++c) {
        tot += m(r, c);
        sr += m(r, c) * r;
        sc += m(r, c) * c;
        if (m(r, c) >= 1.0f) {
          r0 = std::min(r0, r), r1 = std::max(r1, r), c0 = std::min(c0, c), c1 = std::max(c1, c);
        }
      }
    }
    const double cy = sr / tot, cx = sc / tot;
    const double s = 0.95 * std::min(double(r1 - r0 + 1) / ref.height(), double(c1 - c0 + 1) / ref.width());
    auto placed = [&](int y, int x, int ch) -> double {
      const double u = (y - cy) / s + ref.height() / 2.0, v = (x - cx) / s + ref.width() / 2.0;
      if (u < 0 || u >= ref.height() || v < 0 || v >= ref.width()) return 0.5;
      const double rr = std::clamp(u - 0.5, 0.0, ref.height() - 1.0), cc = std::clamp(v - 0.5, 0.0, ref.width() - 1.0);
      const int a = int(std::floor(rr)), b = int(std::floor(cc));
      const int a1 = std::min(a + 1, ref.height() - 1), b1 = std::min(b + 1, ref.width() - 1);
      const double fr = rr - a, fc = cc - b;
      return (1 - fr) * ((1 - fc) * ref.pixels(0, a, b, ch) + fc * ref.pixels(0, a, b1, ch)) +
             fr * ((1 - fc) * ref.pixels(0, a1, b, ch) + fc * ref.pixels(0, a1, b1, ch));
    };
    // Mask weights: bilinear to the latent grid, then 2x2 mean.
    auto small = [&](int i, int j) {
      const double rr = std::clamp((i + 0.5) * 4 - 0.5, 0.0, H - 1.0), cc = std::clamp((j + 0.5) * 4 - 0.5, 0.0, W - 1.0);
      const int a = int(rr), b = int(cc);
      const double fr = rr - a, fc = cc - b;
      return (1 - fr) * ((1 - fc) * m(a, b) + fc * m(a, b + 1)) + fr * ((1 - fc) * m(a + 1, b) + fc * m(a + 1, b + 1));
    };
    for (int py = 0; py < gh; ++py) {
      for (int px = 0; px < gw; ++px) {
        const int tok = (f * gh + py) * gw + px;
        const double w = (small(2 * py, 2 * px) + small(2 * py, 2 * px + 1) + small(2 * py + 1, 2 * px) +
                          small(2 * py + 1, 2 * px + 1)) / 4.0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx)
            for (int sy = 0; sy < 4; ++sy)
              for (int sx = 0; sx < 4; ++sx)
                for (int ch = 0; ch < C; ++ch) {
                  const int y = (2 * py + dy) * 4 + sy, x = (2 * px + dx) * 4 + sx;
                  const int k = (dy * 2 + dx) * 16 * C + (sy * 4 + sx) * C + ch;
                  out(tok, k) = static_cast<float>((1 - w) * video(f, y, x, ch) + w * placed(y, x, ch));
                }
      }
    }
  }
  return out;
}

Mask2D soft_square(int h, int w, int r0, int c0, int side) {
  Mask2D m = Mask2D::Zero(h, w);
  m.block(r0, c0, side, side) = 1.0f;
  m.block(r0 - 1, c0 - 1, side + 2, 1) = 0.4f;
  m.block(r0 - 1, c0 + side, side + 2, 1) = 0.7f;
  return m;
}

}  // namespace

TEST_CASE("blend endpoints and midpoint") {
  std::mt19937_64 rng(1);
  const TokenSequence a = random_tokens(6, 5, rng, -2, 2), b = random_tokens(6, 5, rng, -2, 2);
  CHECK(bit_equal(inp_tpu::blend_tokens(a, b, weights(6, 0.0f)).tokens, a.tokens));
  CHECK(bit_equal(inp_tpu::blend_tokens(a, b, weights(6, 1.0f)).tokens, b.tokens));
  const TokenSequence mid = inp_tpu::blend_tokens(filled(3, 4, 2.0f), filled(3, 4, 4.0f), weights(3, 0.5f));
  CHECK((mid.tokens.array() == 3.0f).all());
}

TEST_CASE("blend is linear in its token inputs") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const TokenSequence a = random_tokens(8, 6, rng, -1, 1), b = random_tokens(8, 6, rng, -1, 1);
    TokenMask m = weights(8, 0.0f);
    for (int i = 0; i < 8; ++i) m.weights[i] = static_cast<float>(u(rng));
    const float k = static_cast<float>(4.0 * u(rng) - 2.0);
    TokenSequence ka = a, kb = b;
    ka.tokens *= k;
    kb.tokens *= k;
    const RowMatrixf lhs = inp_tpu::blend_tokens(ka, kb, m).tokens;
    const RowMatrixf rhs = k * inp_tpu::blend_tokens(a, b, m).tokens;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-6f);
  }
}

TEST_CASE("blend stays inside the input range and passes unmasked tokens") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double lo = -5.0 * u(rng), hi = lo + 0.001 + 5.0 * u(rng);
    const TokenSequence a = random_tokens(10, 7, rng, lo, hi), b = random_tokens(10, 7, rng, lo, hi);
    TokenMask m = weights(10, 0.0f);
    for (int i = 0; i < 10; ++i) m.weights[i] = u(rng) < 0.3 ? 0.0f : static_cast<float>(u(rng));
    const TokenSequence out = inp_tpu::blend_tokens(a, b, m);
    CHECK(out.tokens.minCoeff() >= std::min(a.tokens.minCoeff(), b.tokens.minCoeff()));
    CHECK(out.tokens.maxCoeff() <= std::max(a.tokens.maxCoeff(), b.tokens.maxCoeff()));
    for (int i = 0; i < 10; ++i) {
      if (m.weights[i] == 0.0f) CHECK(bit_equal(out.tokens.row(i), a.tokens.row(i)));
    }
  }
}

TEST_CASE("blend rejects mismatched inputs") {
  CHECK_THROWS_AS(inp_tpu::blend_tokens(filled(3, 4, 0), filled(4, 4, 0), weights(3, 0)), ShapeMismatchError);
  CHECK_THROWS_AS(inp_tpu::blend_tokens(filled(3, 4, 0), filled(3, 5, 0), weights(3, 0)), ShapeMismatchError);
  CHECK_THROWS_AS(inp_tpu::blend_tokens(filled(3, 4, 0), filled(3, 4, 0), weights(2, 0)), ShapeMismatchError);
}

TEST_CASE("zero mask conditions on the masked video alone") {
  std::mt19937_64 rng(4);
  const VideoTensor v = random_video(Shape4{2, 16, 16, 3}, rng);
  const ReferenceImage ref(random_video(Shape4{1, 8, 8, 3}, rng));
  Mask2D m = Mask2D::Zero(16, 16);
  m.block(4, 4, 6, 6) = 1.0f;
  const ConditionBundle live = inp_tpu::build_condition(v, ref, MaskVideo(std::vector<Mask2D>{m, m}), Stage::video);
  // Placement needs foreground, so the all-zero case goes through the stream form.
  const ConditionBundle b = inp_tpu::condition_from_streams(v, random_video(v.shape, rng), MaskVideo(2, 16, 16), Stage::video);
  CHECK(bit_equal(b.x_cond.tokens, tokenizer::patchify(latent_codec::encode(v)).tokens));
  CHECK((b.x_mask.weights.array() == 0.0f).all());
  CHECK(live.x_cond.size() == 8);
}

TEST_CASE("full mask over the placed reference yields the reference stream") {
  std::mt19937_64 rng(5);
  const ReferenceImage ref(random_video(Shape4{1, 8, 8, 3}, rng));
  const MaskVideo m(1, 16, 16, 1.0f);
  const VideoTensor placed = masking::align_reference_video(ref, m);
  const ConditionBundle b = inp_tpu::build_condition(random_video(placed.shape, rng), ref, m, Stage::image);
  CHECK(bit_equal(b.x_cond.tokens, tokenizer::patchify(latent_codec::encode(placed)).tokens));
}

TEST_CASE("build_condition matches the straight-line oracle") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const VideoTensor v = random_video(Shape4{3, 32, 48, 3}, rng);
    const ReferenceImage ref(random_video(Shape4{1, 10 + trial, 14 - trial, 3}, rng));
    std::vector<Mask2D> frames;
    for (int f = 0; f < 3; ++f) frames.push_back(soft_square(32, 48, 6 + 2 * f + trial, 10 + 3 * f, 12 + trial));
    const MaskVideo mask(frames);
    const ConditionBundle b = inp_tpu::build_condition(v, ref, mask, Stage::video);
    const RowMatrixf oracle = oracle_condition(v, ref, mask);
    REQUIRE(b.x_cond.tokens.rows() == oracle.rows());
    REQUIRE(b.x_cond.tokens.cols() == oracle.cols());
    CHECK((b.x_cond.tokens - oracle).cwiseAbs().maxCoeff() <= 1e-5f);
  }
}

TEST_CASE("disabled fusion keeps the mask channel and the masked video") {
  std::mt19937_64 rng(7);
  const VideoTensor v = random_video(Shape4{1, 16, 16, 3}, rng);
  const ReferenceImage ref(random_video(Shape4{1, 8, 8, 3}, rng));
  const MaskVideo m(std::vector<Mask2D>{soft_square(16, 16, 3, 3, 8)});
  inp_tpu::ConditionOptions off;
  off.disable_reference_fusion = true;
  const ConditionBundle on = inp_tpu::build_condition(v, ref, m, Stage::image);
  const ConditionBundle no = inp_tpu::build_condition(v, ref, m, Stage::image, off);
  CHECK(bit_equal(no.x_cond.tokens, tokenizer::patchify(latent_codec::encode(v)).tokens));
  CHECK(no.x_mask.weights == on.x_mask.weights);
  CHECK(!bit_equal(no.x_cond.tokens, on.x_cond.tokens));
}

TEST_CASE("condition rejects inconsistent inputs") {
  const ReferenceImage ref(VideoTensor(Shape4{1, 8, 8, 3}, 0.3f));
  const MaskVideo m2(2, 16, 16, 1.0f);
  CHECK_THROWS_AS(inp_tpu::build_condition(VideoTensor(Shape4{2, 16, 16, 3}), ref, m2, Stage::image), DimensionError);
  CHECK_THROWS_AS(inp_tpu::build_condition(VideoTensor(Shape4{3, 16, 16, 3}), ref, m2, Stage::video),
                  ShapeMismatchError);
}

TEST_CASE("assemble_input layout") {
  std::mt19937_64 rng(8);
  ConditionBundle b;
  b.stage = Stage::image;
  b.x_cond = random_tokens(2, 4, rng, 0, 1);
  b.x_mask = weights(2, 0.25f);
  b.x_mask.grid = b.x_cond.grid;
  const DenoiserInput<float> in = inp_tpu::assemble_input<float>(RowMatrixf::Zero(2, 4), b);
  CHECK(in.features.cols() == 9);
  CHECK((in.features.leftCols(4).array() == 0.0f).all());
  CHECK(bit_equal(in.features.middleCols(4, 4), b.x_cond.tokens));
  CHECK((in.features.col(8).array() == 0.25f).all());
  CHECK((in.clean.array() == 0.0f).all());

  const RowMatrixf noise = RowMatrixf::Random(2, 4);
  ConditionBundle perturbed = b;
  perturbed.x_cond.tokens.array() += 1.0f;
  CHECK(bit_equal(inp_tpu::assemble_input<float>(noise, perturbed).features.leftCols(4), noise));
  CHECK_THROWS_AS(inp_tpu::assemble_input<float>(RowMatrixf::Zero(3, 4), b), ShapeMismatchError);
  CHECK_THROWS_AS(inp_tpu::assemble_input<float>(RowMatrixf::Zero(2, 5), b), ShapeMismatchError);
}

TEST_CASE("video input carries a clean indicator and the keyframe") {
  std::mt19937_64 rng(9);
  const VideoTensor v = random_video(Shape4{3, 16, 16, 3}, rng);
  ConditionBundle b = inp_tpu::condition_from_streams(v, v, MaskVideo(3, 16, 16, 0.5f), Stage::video);
  const int d = b.x_cond.dim(), n = b.x_cond.size(), k = inp_tpu::keyframe_token_count(b);
  CHECK(k == 4);
  CHECK(inp_tpu::input_width(d, Stage::video) == 2 * d + 2);
  const RowMatrix<double> noise = RowMatrix<double>::Random(n, d);
  DenoiserInput<double> in = inp_tpu::assemble_input<double>(noise, b);
  CHECK(in.features.cols() == 2 * d + 2);
  CHECK((in.features.col(2 * d + 1).array() == 0.0).all());

  TokenSequence key = tokenizer::patchify(latent_codec::encode(random_video(Shape4{1, 16, 16, 3}, rng)));
  b.keyframe_tokens = key;
  in = inp_tpu::assemble_input<double>(noise, b);
  CHECK((in.features.topLeftCorner(k, d) - key.tokens.cast<double>()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((in.features.bottomLeftCorner(n - k, d) - noise.bottomRows(n - k)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((in.features.col(2 * d + 1).head(k).array() == 1.0).all());
  CHECK((in.features.col(2 * d + 1).tail(n - k).array() == 0.0).all());
  CHECK(in.clean.head(k).sum() == doctest::Approx(k));

  b.keyframe_tokens->tokens = RowMatrixf::Zero(k + 1, d);
  CHECK_THROWS_AS(inp_tpu::assemble_input<double>(noise, b), ShapeMismatchError);
}

TEST_CASE("the token process adds no parameters") { CHECK(inp_tpu::kTrainableParameters == 0); }

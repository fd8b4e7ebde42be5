#include "doctest.h"

#include "inptpu/latent_codec.hpp"
#include "inptpu/tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

using namespace inptpu;

namespace {

VideoTensor random_video(Shape4 s, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  VideoTensor v(s);
  for (Eigen::Index i = 0; i < v.values.size(); ++i) v.values[i] = static_cast<float>(u(rng));
  return v;
}

bool bit_equal(const Eigen::ArrayXf& a, const Eigen::ArrayXf& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0;
}

// Straight-line space-to-depth written from the documented channel formula.
LatentTensor oracle_encode(const VideoTensor& v, int s) {
  const int C = v.channels();
  LatentTensor z(Shape4{v.frames(), v.height() / s, v.width() / s, C * s * s}, s, 1);
  for (int f = 0; f < v.frames(); ++f)
    for (int y = 0; y < v.height(); ++y)
      for (int x = 0; x < v.width(); ++x)
        for (int c = 0; c < C; ++c) z(f, y / s, x / s, ((y % s) * s + (x % s)) * C + c) = v(f, y, x, c);
  return z;
}

// Bilinear (half-pixel centers, clamped) then patch averaging, written out
// independently of the library resampler.
std::vector<double> oracle_token_weights(const Mask2D& m, int lh, int lw, int ph, int pw) {
  const double sy = static_cast<double>(m.rows()) / lh, sx = static_cast<double>(m.cols()) / lw;
  std::vector<std::vector<double>> small(lh, std::vector<double>(lw));
  for (int i = 0; i < lh; ++i) {
    for (int j = 0; j < lw; ++j) {
      double r = std::clamp((i + 0.5) * sy - 0.5, 0.0, static_cast<double>(m.rows() - 1));
      double c = std::clamp((j + 0.5) * sx - 0.5, 0.0, static_cast<double>(m.cols() - 1));
      const int r0 = static_cast<int>(std::floor(r)), c0 = static_cast<int>(std::floor(c));
      const int r1 = std::min(r0 + 1, static_cast<int>(m.rows() - 1)), c1 = std::min(c0 + 1, static_cast<int>(m.cols() - 1));
      const double fr = r - r0, fc = c - c0;
      small[i][j] = (1 - fr) * ((1 - fc) * m(r0, c0) + fc * m(r0, c1)) + fr * ((1 - fc) * m(r1, c0) + fc * m(r1, c1));
    }
  }
  std::vector<double> out;
  for (int py = 0; py < lh / ph; ++py) {
    for (int px = 0; px < lw / pw; ++px) {
      double acc = 0;
      for (int dy = 0; dy < ph; ++dy)
        for (int dx = 0; dx < pw; ++dx) acc += small[py * ph + dy][px * pw + dx];
      out.push_back(acc / (ph * pw));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("constant video encodes to a constant latent") {
  const LatentTensor z = latent_codec::encode(VideoTensor(Shape4{1, 8, 8, 3}, 0.5f));
  CHECK(z.shape == Shape4{1, 2, 2, 48});
  CHECK((z.values == 0.5f).all());
}

TEST_CASE("raster 4x4 block lands in documented channel order") {
  VideoTensor v(Shape4{1, 4, 4, 1});
  for (int i = 0; i < 16; ++i) v.values[i] = static_cast<float>(i);
  const LatentTensor z = latent_codec::encode(v);
  REQUIRE(z.shape == Shape4{1, 1, 1, 16});
  for (int k = 0; k < 16; ++k) CHECK(z.values[k] == static_cast<float>(k));
  CHECK(bit_equal(latent_codec::decode(z, 1).values, v.values));
}

TEST_CASE("encode matches the brute-force index map") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const VideoTensor v = random_video(Shape4{2, 8, 12, 3}, rng);
    CHECK(bit_equal(latent_codec::encode(v).values, oracle_encode(v, 4).values));
  }
}

TEST_CASE("decode inverts encode bit for bit, without clamping") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const VideoTensor v = random_video(Shape4{1 + trial % 3, 8, 16, 3}, rng, -3.0, 3.0);
    const LatentTensor z = latent_codec::encode(v);
    CHECK(z.shape == latent_codec::latent_shape(v.shape));
    CHECK(bit_equal(latent_codec::decode(z).values, v.values));
  }
  const LatentTensor zero(Shape4{1, 2, 2, 48}, 4, 1);
  CHECK((latent_codec::decode(zero).values == 0.0f).all());
}

TEST_CASE("temporal factor round trip") {
  std::mt19937_64 rng(3);
  const VideoTensor v = random_video(Shape4{4, 8, 8, 3}, rng);
  const LatentTensor z = latent_codec::encode(v, 4, 2);
  CHECK(z.shape == Shape4{2, 2, 2, 96});
  CHECK(bit_equal(latent_codec::decode(z).values, v.values));
}

TEST_CASE("codec is linear") {
  std::mt19937_64 rng(4);
  const VideoTensor a = random_video(Shape4{1, 8, 8, 3}, rng), b = random_video(Shape4{1, 8, 8, 3}, rng);
  VideoTensor mix(a.shape);
  mix.values = 0.25f * a.values + 2.0f * b.values;
  const Eigen::ArrayXf expect = 0.25f * latent_codec::encode(a).values + 2.0f * latent_codec::encode(b).values;
  CHECK(bit_equal(latent_codec::encode(mix).values, expect));
}

TEST_CASE("codec rejects indivisible shapes") {
  CHECK_THROWS_AS(latent_codec::encode(VideoTensor(Shape4{1, 6, 8, 3})), DimensionError);
  CHECK_THROWS_AS(latent_codec::encode(VideoTensor(Shape4{3, 8, 8, 3}), 4, 2), DimensionError);
}

TEST_CASE("single patch token holds the block in documented order") {
  LatentTensor z(Shape4{1, 2, 2, 48}, 4, 1);
  for (Eigen::Index i = 0; i < z.values.size(); ++i) z.values[i] = static_cast<float>(i);
  const TokenSequence seq = tokenizer::patchify(z);
  REQUIRE(seq.size() == 1);
  REQUIRE(seq.dim() == 192);
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx)
      for (int c = 0; c < 48; ++c) CHECK(seq.tokens(0, (dy * 2 + dx) * 48 + c) == z(0, dy, dx, c));
  CHECK(bit_equal(tokenizer::unpatchify(seq).values, z.values));
}

TEST_CASE("token count and order follow the grid") {
  LatentTensor z(Shape4{4, 16, 16, 48}, 4, 1);
  for (int f = 0; f < 4; ++f)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) z(f, y, x, 0) = static_cast<float>((f * 8 + y / 2) * 8 + x / 2);
  const TokenSequence seq = tokenizer::patchify(z);
  CHECK(seq.size() == 256);
  for (int i = 0; i < seq.size(); ++i) CHECK(seq.tokens(i, 0) == static_cast<float>(i));
  const auto coords = tokenizer::token_coords(seq.grid);
  CHECK(coords(9, 0) == 0);
  CHECK(coords(9, 1) == 1);
  CHECK(coords(9, 2) == 1);
  CHECK(coords(255, 0) == 3);
}

TEST_CASE("unpatchify inverts patchify on random latents") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    LatentTensor z(Shape4{1 + trial % 4, 4, 6, 48}, 4, 1);
    for (Eigen::Index i = 0; i < z.values.size(); ++i) z.values[i] = static_cast<float>(n(rng));
    const LatentTensor back = tokenizer::unpatchify(tokenizer::patchify(z));
    CHECK(back.shape == z.shape);
    CHECK(bit_equal(back.values, z.values));
  }
  TokenSequence zero = tokenizer::patchify(LatentTensor(Shape4{1, 4, 4, 48}, 4, 1));
  CHECK((tokenizer::unpatchify(zero).values == 0.0f).all());
}

TEST_CASE("identity projections compose to the identity") {
  std::mt19937_64 rng(6);
  LatentTensor z(Shape4{1, 2, 4, 48}, 4, 1);
  z.values = random_video(Shape4{1, 2, 4, 48}, rng).values;
  const LinearMap id{RowMatrixf::Identity(192, 192), Eigen::RowVectorXf::Zero(192)};
  const TokenSequence seq = tokenizer::patchify(z, {}, id);
  CHECK(bit_equal(tokenizer::unpatchify(seq, id).values, z.values));
}

TEST_CASE("patchify rejects indivisible latents") {
  CHECK_THROWS_AS(tokenizer::patchify(LatentTensor(Shape4{1, 3, 4, 48}, 4, 1)), DimensionError);
}

TEST_CASE("constant masks give exact constant weights") {
  const Shape4 ls{2, 8, 8, 48};
  const TokenMask ones = tokenizer::mask_to_token_weights(MaskVideo(2, 32, 32, 1.0f), ls);
  const TokenMask zeros = tokenizer::mask_to_token_weights(MaskVideo(2, 32, 32, 0.0f), ls);
  CHECK(ones.size() == 32);
  CHECK((ones.weights.array() == 1.0f).all());
  CHECK((zeros.weights.array() == 0.0f).all());
}

TEST_CASE("half mask matches the bilinear plus pooling oracle") {
  Mask2D m = Mask2D::Zero(8, 8);
  m.leftCols(4) = 1.0f;
  const TokenMask w = tokenizer::mask_to_token_weights(MaskVideo(std::vector<Mask2D>{m}), Shape4{1, 2, 2, 48});
  REQUIRE(w.size() == 1);
  CHECK(w.weights[0] == doctest::Approx(oracle_token_weights(m, 2, 2, 2, 2)[0]).epsilon(1e-6));
  CHECK(w.weights[0] == doctest::Approx(0.5));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Mask2D r(24, 40);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = static_cast<float>(u(rng));
    const TokenMask tw = tokenizer::mask_to_token_weights(MaskVideo(std::vector<Mask2D>{r}), Shape4{1, 6, 10, 48});
    const std::vector<double> expect = oracle_token_weights(r, 6, 10, 2, 2);
    REQUIRE(tw.size() == static_cast<int>(expect.size()));
    for (int i = 0; i < tw.size(); ++i) CHECK(tw.weights[i] == doctest::Approx(expect[i]).epsilon(1e-5));
  }
}

TEST_CASE("mask weights follow patchify's token order") {
  // Mark the pixel block of one token in both the video and the mask.
  for (int target : {0, 5, 13, 22}) {
    const int gw = 4, f = target / 8, py = (target % 8) / gw, px = target % gw;
    VideoTensor v(Shape4{3, 16, 32, 3});
    MaskVideo m(3, 16, 32);
    for (int y = py * 8; y < py * 8 + 8; ++y) {
      for (int x = px * 8; x < px * 8 + 8; ++x) {
        v(f, y, x, 1) = 1.0f;
        m.frames[f](y, x) = 1.0f;
      }
    }
    const LatentTensor z = latent_codec::encode(v);
    const TokenSequence seq = tokenizer::patchify(z);
    const TokenMask w = tokenizer::mask_to_token_weights(m, z.shape);
    Eigen::Index tok_max, w_max;
    seq.tokens.rowwise().sum().maxCoeff(&tok_max);
    w.weights.maxCoeff(&w_max);
    CHECK(tok_max == target);
    CHECK(w_max == target);
  }
}

TEST_CASE("mask weights stay in range and are monotone") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Mask2D a(16, 16), b(16, 16);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = static_cast<float>(u(rng));
      b.data()[i] = std::max(a.data()[i], static_cast<float>(u(rng)));
    }
    const Shape4 ls{1, 4, 4, 48};
    const TokenMask wa = tokenizer::mask_to_token_weights(MaskVideo(std::vector<Mask2D>{a}), ls);
    const TokenMask wb = tokenizer::mask_to_token_weights(MaskVideo(std::vector<Mask2D>{b}), ls);
    CHECK((wa.weights.array() >= 0.0f).all());
    CHECK((wb.weights.array() <= 1.0f).all());
    CHECK((wb.weights.array() >= wa.weights.array()).all());
  }
}

TEST_CASE("mask frame count must match the latent") {
  CHECK_THROWS_AS(tokenizer::mask_to_token_weights(MaskVideo(2, 8, 8), Shape4{3, 2, 2, 48}), DimensionError);
}

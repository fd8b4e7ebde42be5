#include "doctest.h"

#include "inptpu/flow.hpp"
#include "inptpu/latent_codec.hpp"

#include <algorithm>
#include <cstring>
#include <random>

using namespace inptpu;

namespace {

DiTConfig tiny_config() {
  DiTConfig cfg;
  cfg.depth = 2;
  cfg.dim = 24;
  cfg.heads = 2;
  return cfg;
}

ConditionBundle video_bundle(std::uint64_t seed, bool keyframe) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VideoTensor v(Shape4{2, 16, 16, 3});
  for (Eigen::Index i = 0; i < v.values.size(); ++i) v.values[i] = static_cast<float>(u(rng));
  Mask2D m = Mask2D::Zero(16, 16);
  m.block(4, 4, 8, 8) = 1.0f;
  ConditionBundle b = inp_tpu::condition_from_streams(v, v, MaskVideo(std::vector<Mask2D>{m, m}), Stage::video);
  if (keyframe) b.keyframe_tokens = tokenizer::patchify(latent_codec::encode(v.frame(0)));
  return b;
}

}  // namespace

TEST_CASE("schedule times run from one to zero") {
  const std::vector<double> t = NoiseSchedule{4}.times();
  CHECK(t == std::vector<double>{1.0, 0.75, 0.5, 0.25, 0.0});
  CHECK_THROWS_AS(static_cast<void>(NoiseSchedule{0}.times()), DimensionError);
}

TEST_CASE("a zero velocity head's loss is the mean squared velocity target") {
  const ConditionBundle bundle = video_bundle(1, true);
  const int n = bundle.x_cond.size(), d = bundle.x_cond.dim(), k = inp_tpu::keyframe_token_count(bundle);
  DiTConfig cfg = tiny_config();
  cfg.prediction = Prediction::velocity;
  const Model<double> model = init_model<double>(cfg, Stage::video, 2);  // zero output head
  const RowMatrix<double> x0 = RowMatrix<double>::Random(n, d);
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    std::mt19937_64 rng(seed);
    const double loss = flow::fm_loss(model, x0, bundle, rng);
    // Same draws: t first, then eps row-major; keyframe tokens are excluded.
    std::mt19937_64 replay(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    (void)uniform(replay);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        const double e = normal(replay) - x0(i, j);
        if (i >= k) acc += e * e;
      }
    }
    CHECK(loss == doctest::Approx(acc / ((n - k) * d)).epsilon(1e-12));
    CHECK(loss >= 0.0);
  }
}

TEST_CASE("a zero clean head's loss is the floored clean-token energy") {
  // x0_hat = 0 gives (x_t - 0) / t_c - (eps - x0) t / t_c = x0 / t_c.
  const ConditionBundle bundle = video_bundle(1, true);
  const int n = bundle.x_cond.size(), d = bundle.x_cond.dim(), k = inp_tpu::keyframe_token_count(bundle);
  DiTConfig cfg = tiny_config();
  cfg.prediction = Prediction::clean;
  const Model<double> model = init_model<double>(cfg, Stage::video, 2);
  const RowMatrix<double> x0 = RowMatrix<double>::Random(n, d);
  const double energy = x0.bottomRows(n - k).squaredNorm() / ((n - k) * d);
  for (std::uint64_t seed : {3u, 4u, 5u, 6u}) {
    std::mt19937_64 rng(seed);
    const double loss = flow::fm_loss(model, x0, bundle, rng);
    std::mt19937_64 replay(seed);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(replay);
    const double tc = std::max(t, flow::kMinLossTime);
    CHECK(loss == doctest::Approx(energy / (tc * tc)).epsilon(1e-10));
  }
}

TEST_CASE("a zero residual head's loss is the floored condition error") {
  // x0_hat = x_cond, so the scaled difference is (x0 - x_cond) / t_c.
  const ConditionBundle bundle = video_bundle(1, true);
  const int n = bundle.x_cond.size(), d = bundle.x_cond.dim(), k = inp_tpu::keyframe_token_count(bundle);
  DiTConfig cfg = tiny_config();
  cfg.prediction = Prediction::residual;
  const Model<double> model = init_model<double>(cfg, Stage::video, 2);
  const RowMatrix<double> x0 = RowMatrix<double>::Random(n, d);
  const RowMatrix<double> gap = x0 - bundle.x_cond.tokens.cast<double>();
  const double energy = gap.bottomRows(n - k).squaredNorm() / ((n - k) * d);
  for (std::uint64_t seed : {3u, 4u, 5u, 6u}) {
    std::mt19937_64 rng(seed);
    const double loss = flow::fm_loss(model, x0, bundle, rng);
    std::mt19937_64 replay(seed);
    const double t = std::uniform_real_distribution<double>(0.0, 1.0)(replay);
    const double tc = std::max(t, flow::kMinLossTime);
    CHECK(loss == doctest::Approx(energy / (tc * tc)).epsilon(1e-10));
  }
}

TEST_CASE("a clean head that emits x0 has zero loss and the exact velocity") {
  const ConditionBundle bundle = video_bundle(2, false);
  const int n = bundle.x_cond.size(), d = bundle.x_cond.dim();
  DiTConfig cfg = tiny_config();
  cfg.prediction = Prediction::clean;
  Model<double> model = init_model<double>(cfg, Stage::video, 2);
  for (auto& [name, slot] : model.params.slots) slot.setZero();
  const RowMatrix<double> row = RowMatrix<double>::Random(1, d);
  model.params["final.out.b"] = row;  // every token's head output is `row`
  const RowMatrix<double> x0 = row.replicate(n, 1);
  std::mt19937_64 rng(8);
  const FlowDraw<double> draw = flow::draw<double>(x0, bundle, rng);
  CHECK(flow::draw_loss(model, draw) < 1e-28);
  const RowMatrix<double> v = flow::predict_velocity(model, draw.input, draw.t);
  CHECK((v - draw.target).cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(flow::predict_velocity(model, draw.input, 0.0), DimensionError);
}

TEST_CASE("oracle velocity recovers the clean tokens for any step count") {
  std::mt19937_64 rng(6);
  const RowMatrixf x0 = RowMatrixf::Random(12, 8);
  const RowMatrixf eps = flow::initial_noise(12, 8, 7);
  const flow::VelocityFn oracle = [&](const RowMatrixf&, double) -> RowMatrixf { return eps - x0; };
  for (int k : {1, 20}) {
    const RowMatrixf out = flow::integrate(eps, NoiseSchedule{k}, oracle);
    CHECK((out - x0).cwiseAbs().maxCoeff() < 1e-5f);
  }
  // One step is one Euler update from t = 1.
  const flow::VelocityFn linear = [](const RowMatrixf& x, double t) -> RowMatrixf { return x * static_cast<float>(t); };
  const RowMatrixf one = flow::integrate(eps, NoiseSchedule{1}, linear);
  CHECK((one - (eps - eps)).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("pin holds chosen rows during integration") {
  const RowMatrixf start = flow::initial_noise(6, 4, 1);
  const flow::VelocityFn v = [](const RowMatrixf& x, double) -> RowMatrixf { return x; };
  const RowMatrixf out = flow::integrate(start, NoiseSchedule{5}, v, [](RowMatrixf& x) { x.row(0).setConstant(7.0f); });
  CHECK((out.row(0).array() == 7.0f).all());
}

TEST_CASE("halving the step size shrinks the sampler change") {
  Model<float> model = init_model<float>(tiny_config(), Stage::video, 3);
  randomize_parameters(model, 4, 0.3);
  const ConditionBundle bundle = video_bundle(5, true);
  double prev = std::numeric_limits<double>::infinity();
  RowMatrixf last = flow::sample(model, bundle, NoiseSchedule{4}, 9);
  for (int k : {8, 16, 32, 64}) {
    const RowMatrixf next = flow::sample(model, bundle, NoiseSchedule{k}, 9);
    const double diff = (next - last).norm();
    INFO("K=" << k << " diff=" << diff);
    CHECK(diff < prev);
    prev = diff;
    last = next;
  }
}

TEST_CASE("sampling is deterministic and keeps the keyframe clean") {
  Model<float> model = init_model<float>(tiny_config(), Stage::video, 3);
  randomize_parameters(model, 4, 0.3);
  const ConditionBundle bundle = video_bundle(5, true);
  const RowMatrixf a = flow::sample(model, bundle, NoiseSchedule{6}, 11);
  const RowMatrixf b = flow::sample(model, bundle, NoiseSchedule{6}, 11);
  CHECK(std::memcmp(a.data(), b.data(), sizeof(float) * a.size()) == 0);
  const RowMatrixf c = flow::sample(model, bundle, NoiseSchedule{6}, 12);
  CHECK((a - c).norm() > 0.0f);
  const int k = inp_tpu::keyframe_token_count(bundle);
  CHECK((a.topRows(k) - bundle.keyframe_tokens->tokens).cwiseAbs().maxCoeff() == 0.0f);
  const Model<float> image = init_model<float>(tiny_config(), Stage::image, 3);
  CHECK_THROWS_AS(flow::sample(image, bundle, NoiseSchedule{2}, 1), ShapeMismatchError);
}

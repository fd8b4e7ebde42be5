#include "inptpu/flow.hpp"

#include <algorithm>
#include <string>

namespace inptpu {

std::vector<double> NoiseSchedule::times() const {
  if (steps < 1) throw DimensionError("NoiseSchedule: steps must be >= 1");
  std::vector<double> t(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) t[k] = 1.0 - static_cast<double>(k) / steps;
  t.back() = 0.0;
  return t;
}

namespace flow {

template <typename Scalar>
FlowDraw<Scalar> draw(const RowMatrix<Scalar>& x0, const ConditionBundle& bundle, std::mt19937_64& rng) {
  if (x0.rows() != bundle.x_cond.size() || x0.cols() != bundle.x_cond.dim()) {
    throw ShapeMismatchError("fm_loss: clean tokens do not match the condition bundle");
  }
  FlowDraw<Scalar> s;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  s.t = static_cast<Scalar>(uniform(rng));
  s.noise.resize(x0.rows(), x0.cols());
  for (Eigen::Index i = 0; i < s.noise.size(); ++i) s.noise.data()[i] = static_cast<Scalar>(normal(rng));
  const RowMatrix<Scalar> x_t = (Scalar(1) - s.t) * x0 + s.t * s.noise;
  s.target = s.noise - x0;
  s.input = inp_tpu::assemble_input<Scalar>(x_t, bundle);
  s.loss_weight = Eigen::VectorXf::Ones(x0.rows()) - s.input.clean;
  return s;
}

template <typename Scalar>
Scalar weighted_mse(const RowMatrix<Scalar>& pred, const RowMatrix<Scalar>& target, const Eigen::VectorXf& weight) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols() || weight.size() != pred.rows()) {
    throw ShapeMismatchError("weighted_mse: shape mismatch");
  }
  const double included = static_cast<double>(weight.sum());
  if (!(included > 0.0)) return Scalar(0);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> per_row = (pred - target).rowwise().squaredNorm();
  return per_row.dot(weight.template cast<Scalar>()) / static_cast<Scalar>(included * pred.cols());
}

namespace {

template <typename Scalar>
RowMatrix<Scalar> noisy_tokens(const DenoiserInput<Scalar>& input, int d) {
  return input.features.leftCols(d);
}

/// x0_hat for a clean or residual head.
template <typename Scalar>
RowMatrix<Scalar> clean_estimate(const Model<Scalar>& model, const DenoiserInput<Scalar>& input,
                                 const RowMatrix<Scalar>& head) {
  if (model.config.prediction == Prediction::clean) return head;
  return input.features.middleCols(head.cols(), head.cols()) + head;
}

/// Prediction and target as they enter the squared error.  Clean and residual
/// heads compare (x_t - x0_hat) / t_c with (x_t - x0) / t_c, t_c = max(t, floor).
template <typename Scalar>
struct LossTerms {
  RowMatrix<Scalar> pred, target;
  Scalar head_scale = 1;  // d pred / d head output
};

template <typename Scalar>
LossTerms<Scalar> loss_terms(const Model<Scalar>& model, const FlowDraw<Scalar>& s, const RowMatrix<Scalar>& head) {
  LossTerms<Scalar> out;
  if (model.config.prediction == Prediction::velocity) {
    out.pred = head;
    out.target = s.target;
    return out;
  }
  const Scalar tc = std::max(s.t, static_cast<Scalar>(kMinLossTime));
  out.pred = (noisy_tokens(s.input, static_cast<int>(head.cols())) - clean_estimate(model, s.input, head)) / tc;
  out.target = s.target * (s.t / tc);
  out.head_scale = Scalar(-1) / tc;
  return out;
}

}  // namespace

template <typename Scalar>
RowMatrix<Scalar> predict_velocity(const Model<Scalar>& model, const DenoiserInput<Scalar>& input, Scalar t) {
  RowMatrix<Scalar> head = dit::forward(model, input, t);
  if (model.config.prediction == Prediction::velocity) return head;
  if (!(t > Scalar(0))) throw DimensionError("predict_velocity: clean prediction needs t > 0");
  return (noisy_tokens(input, static_cast<int>(head.cols())) - clean_estimate(model, input, head)) / t;
}

template <typename Scalar>
Scalar draw_loss(const Model<Scalar>& model, const FlowDraw<Scalar>& s) {
  const LossTerms<Scalar> terms = loss_terms(model, s, dit::forward(model, s.input, s.t));
  return weighted_mse<Scalar>(terms.pred, terms.target, s.loss_weight);
}

template <typename Scalar>
Scalar fm_loss(const Model<Scalar>& model, const RowMatrix<Scalar>& x0, const ConditionBundle& bundle,
               std::mt19937_64& rng) {
  return draw_loss(model, draw<Scalar>(x0, bundle, rng));
}

template <typename Scalar>
Scalar loss_and_grad(const Model<Scalar>& model, const FlowDraw<Scalar>& s, ParamStore<Scalar>& grads) {
  ForwardCache<Scalar> cache;
  const RowMatrix<Scalar> head = dit::forward(model, s.input, s.t, &cache);
  const LossTerms<Scalar> terms = loss_terms(model, s, head);
  const Scalar loss = weighted_mse<Scalar>(terms.pred, terms.target, s.loss_weight);
  const double included = static_cast<double>(s.loss_weight.sum());
  if (!(included > 0.0)) return loss;
  const Scalar norm = terms.head_scale * Scalar(2) / static_cast<Scalar>(included * head.cols());
  RowMatrix<Scalar> d_out = (terms.pred - terms.target) * norm;
  d_out.array().colwise() *= s.loss_weight.template cast<Scalar>().array();
  dit::backward(model, cache, d_out, grads);
  if (!grads.all_finite()) throw NonFiniteError("loss_and_grad: non-finite gradient");
  return loss;
}

template <typename Scalar>
ParamStore<Scalar> grad(const Model<Scalar>& model, const RowMatrix<Scalar>& x0, const ConditionBundle& bundle,
                        std::mt19937_64& rng, Scalar* loss) {
  ParamStore<Scalar> g = dit::zeros_like(model.params);
  const FlowDraw<Scalar> s = draw<Scalar>(x0, bundle, rng);
  const Scalar value = loss_and_grad(model, s, g);
  if (loss) *loss = value;
  return g;
}

#define INPTPU_INSTANTIATE_FLOW(S)                                                                           \
  template FlowDraw<S> draw<S>(const RowMatrix<S>&, const ConditionBundle&, std::mt19937_64&);               \
  template S weighted_mse<S>(const RowMatrix<S>&, const RowMatrix<S>&, const Eigen::VectorXf&);              \
  template RowMatrix<S> predict_velocity<S>(const Model<S>&, const DenoiserInput<S>&, S);                  \
  template S draw_loss<S>(const Model<S>&, const FlowDraw<S>&);                                              \
  template S fm_loss<S>(const Model<S>&, const RowMatrix<S>&, const ConditionBundle&, std::mt19937_64&);     \
  template S loss_and_grad<S>(const Model<S>&, const FlowDraw<S>&, ParamStore<S>&);                          \
  template ParamStore<S> grad<S>(const Model<S>&, const RowMatrix<S>&, const ConditionBundle&,               \
                                 std::mt19937_64&, S*);

INPTPU_INSTANTIATE_FLOW(float)
INPTPU_INSTANTIATE_FLOW(double)

#undef INPTPU_INSTANTIATE_FLOW

RowMatrixf integrate(RowMatrixf x, const NoiseSchedule& schedule, const VelocityFn& velocity,
                     const std::function<void(RowMatrixf&)>& pin) {
  const std::vector<double> times = schedule.times();
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    if (pin) pin(x);
    const RowMatrixf v = velocity(x, times[k]);
    if (v.rows() != x.rows() || v.cols() != x.cols()) throw ShapeMismatchError("integrate: velocity shape mismatch");
    x -= static_cast<float>(times[k] - times[k + 1]) * v;
    if (!x.allFinite()) throw NonFiniteError("integrate: non-finite state at step " + std::to_string(k));
  }
  if (pin) pin(x);
  return x;
}

RowMatrixf initial_noise(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RowMatrixf x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = static_cast<float>(normal(rng));
  return x;
}

RowMatrixf sample(const ModelBundle& model, const ConditionBundle& bundle, const NoiseSchedule& schedule,
                  std::uint64_t seed) {
  if (bundle.stage != model.stage) throw ShapeMismatchError("sample: bundle stage does not match model stage");
  const int n = bundle.x_cond.size();
  const int d = bundle.x_cond.dim();
  std::function<void(RowMatrixf&)> pin;
  if (bundle.keyframe_tokens) {
    const int k = inp_tpu::keyframe_token_count(bundle);
    pin = [&bundle, k](RowMatrixf& x) { x.topRows(k) = bundle.keyframe_tokens->tokens; };
  }
  auto velocity = [&](const RowMatrixf& x, double t) {
    const DenoiserInput<float> input = inp_tpu::assemble_input<float>(x, bundle);
    return predict_velocity(model, input, static_cast<float>(t));
  };
  return integrate(initial_noise(n, d, seed), schedule, velocity, pin);
}

}  // namespace flow
}  // namespace inptpu

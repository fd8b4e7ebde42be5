#pragma once

// Rectified-flow objective and Euler sampler.
//
// With clean tokens x0 and noise eps, x_t = (1 - t) x0 + t eps and the
// velocity target is v = eps - x0.  Sampling integrates dx/dt = v from t = 1
// (pure noise) down to t = 0.
//
// Clean and residual heads yield v_hat = (x_t - x0_hat) / t.  Its loss stays
// the velocity MSE with t floored at kMinLossTime in that denominator, so the
// weight on x0 errors is capped at 1 / kMinLossTime^2.

#include <functional>
#include <random>
#include <vector>

#include "inptpu/dit.hpp"
#include "inptpu/inp_tpu.hpp"

namespace inptpu {

struct NoiseSchedule {
  int steps = 20;
  /// steps + 1 strictly decreasing times from 1 to 0.
  [[nodiscard]] std::vector<double> times() const;
};

/// One draw of the flow-matching objective.  Tokens flagged clean (the
/// keyframe) carry x0 in x_t and are excluded from the loss.
template <typename Scalar>
struct FlowDraw {
  Scalar t = 0;
  RowMatrix<Scalar> noise;
  RowMatrix<Scalar> target;
  DenoiserInput<Scalar> input;
  Eigen::VectorXf loss_weight;  // per token, 0 or 1
};

namespace flow {

inline constexpr double kMinLossTime = 0.05;

/// Draw order: t ~ U(0,1) first, then eps ~ N(0,1) in row-major token order.
template <typename Scalar>
FlowDraw<Scalar> draw(const RowMatrix<Scalar>& x0, const ConditionBundle& bundle, std::mt19937_64& rng);

/// Weighted mean squared error over included tokens and all channels.
template <typename Scalar>
Scalar weighted_mse(const RowMatrix<Scalar>& pred, const RowMatrix<Scalar>& target, const Eigen::VectorXf& weight);

/// Model velocity at time t > 0; the noisy tokens are read from the input.
template <typename Scalar>
RowMatrix<Scalar> predict_velocity(const Model<Scalar>& model, const DenoiserInput<Scalar>& input, Scalar t);

/// Loss of a prepared draw.
template <typename Scalar>
Scalar draw_loss(const Model<Scalar>& model, const FlowDraw<Scalar>& sample);

template <typename Scalar>
Scalar fm_loss(const Model<Scalar>& model, const RowMatrix<Scalar>& x0, const ConditionBundle& bundle,
               std::mt19937_64& rng);

/// Loss of a prepared draw and its exact parameter gradients (accumulated
/// into `grads`, which must have the model's slot shapes).
template <typename Scalar>
Scalar loss_and_grad(const Model<Scalar>& model, const FlowDraw<Scalar>& sample, ParamStore<Scalar>& grads);

/// grad of fm_loss under the same RNG draws.
template <typename Scalar>
ParamStore<Scalar> grad(const Model<Scalar>& model, const RowMatrix<Scalar>& x0, const ConditionBundle& bundle,
                        std::mt19937_64& rng, Scalar* loss = nullptr);

using VelocityFn = std::function<RowMatrixf(const RowMatrixf& x, double t)>;

/// Euler integration x <- x - (t_k - t_{k+1}) v(x, t_k) from t = 1 to 0.
/// `pin`, when set, is applied to x before every velocity evaluation and to
/// the final estimate (used to hold keyframe tokens clean).
RowMatrixf integrate(RowMatrixf x, const NoiseSchedule& schedule, const VelocityFn& velocity,
                     const std::function<void(RowMatrixf&)>& pin = {});

/// Standard normal tokens from a seed.
RowMatrixf initial_noise(int rows, int cols, std::uint64_t seed);

/// Clean-token estimate for a condition bundle.
RowMatrixf sample(const ModelBundle& model, const ConditionBundle& bundle, const NoiseSchedule& schedule,
                  std::uint64_t seed);

}  // namespace flow
}  // namespace inptpu

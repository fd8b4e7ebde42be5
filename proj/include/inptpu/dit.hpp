#pragma once

// Miniature diffusion transformer used for both the keyframe (image) and the
// video denoiser.
//
// Architecture: linear input embedding of the per-token features, additive 3D
// sinusoidal positions, `depth` pre-norm transformer blocks with adaptive
// layer-norm modulation (shift / scale / gate, zero-initialized) driven by a
// sinusoidal time embedding plus a learned null text vector, and a modulated
// linear output head.  The head emits either the velocity itself or a clean
// token estimate from which the flow module derives the velocity.
//
// Everything is templated on the scalar so training runs in float and the
// gradient check in double.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "inptpu/inp_tpu.hpp"
#include "inptpu/tensor.hpp"
#include "inptpu/tokenizer.hpp"

namespace inptpu {

/// What the output head emits.  `clean` predicts x0 and the velocity becomes
/// (x_t - x0_hat) / t, which avoids the 1/t noise amplification a raw-pixel
/// velocity head suffers near t = 0.  `residual` predicts x0 - x_cond, so a
/// zero head reproduces the condition tokens.
enum class Prediction { velocity, clean, residual };

struct DiTConfig {
  int depth = 6;
  int dim = 256;
  int heads = 4;
  int mlp_ratio = 4;
  PatchSpec patch{1, 2, 2};
  TokenGrid max_grid{16, 8, 16};
  int token_dim = 192;  // raw latent patch width (patch volume x latent channels)
  Prediction prediction = Prediction::velocity;

  [[nodiscard]] int head_dim() const { return dim / heads; }
  void validate() const;
  bool operator==(const DiTConfig&) const = default;
};

/// Named parameter slots; iteration order is the name-sorted order used for
/// serialization.
template <typename Scalar>
struct ParamStore {
  std::map<std::string, RowMatrix<Scalar>> slots;

  RowMatrix<Scalar>& operator[](const std::string& name);
  const RowMatrix<Scalar>& at(const std::string& name) const;
  [[nodiscard]] std::size_t parameter_count() const;
  void set_zero();
  [[nodiscard]] bool all_finite() const;

  template <typename Other>
  [[nodiscard]] ParamStore<Other> cast() const {
    ParamStore<Other> out;
    for (const auto& [name, m] : slots) out.slots.emplace(name, m.template cast<Other>());
    return out;
  }
};

template <typename Scalar>
struct Model {
  DiTConfig config;
  Stage stage = Stage::image;
  ParamStore<Scalar> params;

  [[nodiscard]] int input_dim() const { return inp_tpu::input_width(config.token_dim, stage); }

  template <typename Other>
  [[nodiscard]] Model<Other> cast() const {
    return Model<Other>{config, stage, params.template cast<Other>()};
  }
};

using ModelBundle = Model<float>;

/// Slot names and shapes derived from the configuration alone.
std::map<std::string, std::pair<int, int>> parameter_shapes(const DiTConfig& config, Stage stage);

/// adaLN-Zero initialization: modulation and output head start at zero.
template <typename Scalar>
Model<Scalar> init_model(const DiTConfig& config, Stage stage, std::uint64_t seed);

/// Every slot drawn at random (no zero init); used by gradient checks.
template <typename Scalar>
void randomize_parameters(Model<Scalar>& model, std::uint64_t seed, double scale = 0.2);

template <typename Scalar>
struct BlockCache {
  RowMatrix<Scalar> x, n1, m1, qkv, attn, a, x1, n2, m2, pre_act, act, f;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rstd1, rstd2;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mod;
  std::vector<RowMatrix<Scalar>> probs;  // one N x N matrix per head
};

template <typename Scalar>
struct ForwardCache {
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> temb, t_hidden, t_act, cond, cond_act;
  RowMatrix<Scalar> input;
  std::vector<BlockCache<Scalar>> blocks;
  RowMatrix<Scalar> x_final, n_final, m_final;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rstd_final;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mod_final;
};

namespace dit {

/// Sinusoidal embedding of t in [0,1] (scaled by 1000), width `dim`.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, Eigen::Dynamic> timestep_embedding(Scalar t, int dim);

/// Additive 3D sinusoidal positions; channels are split between frame, row
/// and column as (2k, 2k, dim - 4k) with k = dim / 6.
template <typename Scalar>
RowMatrix<Scalar> position_embedding(const Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>& coords, int dim);

/// Head output, N x token_dim (see Prediction).  Fills `cache` when given.
template <typename Scalar>
RowMatrix<Scalar> forward(const Model<Scalar>& model, const DenoiserInput<Scalar>& input, Scalar t,
                          ForwardCache<Scalar>* cache = nullptr);

/// Accumulates parameter gradients of <d_out, forward(...)> into `grads`.
template <typename Scalar>
void backward(const Model<Scalar>& model, const ForwardCache<Scalar>& cache, const RowMatrix<Scalar>& d_out,
              ParamStore<Scalar>& grads);

/// Zero-filled store with the model's slot shapes.
template <typename Scalar>
ParamStore<Scalar> zeros_like(const ParamStore<Scalar>& params);

}  // namespace dit

extern template struct ParamStore<float>;
extern template struct ParamStore<double>;

}  // namespace inptpu

#include "inptpu/dit.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace inptpu {

void DiTConfig::validate() const {
  if (depth < 1 || dim < 1 || heads < 1 || mlp_ratio < 1 || token_dim < 1) {
    throw DimensionError("DiTConfig: all sizes must be positive");
  }
  if (dim % heads != 0) throw DimensionError("DiTConfig: dim must be divisible by heads");
  if (dim % 2 != 0) throw DimensionError("DiTConfig: dim must be even");
  if (max_grid.f < 1 || max_grid.h < 1 || max_grid.w < 1) throw DimensionError("DiTConfig: max_grid must be positive");
}

template <typename Scalar>
RowMatrix<Scalar>& ParamStore<Scalar>::operator[](const std::string& name) {
  return slots[name];
}

template <typename Scalar>
const RowMatrix<Scalar>& ParamStore<Scalar>::at(const std::string& name) const {
  auto it = slots.find(name);
  if (it == slots.end()) throw DataError("missing parameter slot '" + name + "'");
  return it->second;
}

template <typename Scalar>
std::size_t ParamStore<Scalar>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : slots) n += static_cast<std::size_t>(m.size());
  return n;
}

template <typename Scalar>
void ParamStore<Scalar>::set_zero() {
  for (auto& [name, m] : slots) m.setZero();
}

template <typename Scalar>
bool ParamStore<Scalar>::all_finite() const {
  for (const auto& [name, m] : slots) {
    if (!m.allFinite()) return false;
  }
  return true;
}

template struct ParamStore<float>;
template struct ParamStore<double>;

std::map<std::string, std::pair<int, int>> parameter_shapes(const DiTConfig& c, Stage stage) {
  c.validate();
  const int d = c.dim;
  const int hidden = c.mlp_ratio * d;
  std::map<std::string, std::pair<int, int>> s;
  s["embed.in.w"] = {inp_tpu::input_width(c.token_dim, stage), d};
  s["embed.in.b"] = {1, d};
  s["time.mlp0.w"] = {d, d};
  s["time.mlp0.b"] = {1, d};
  s["time.mlp2.w"] = {d, d};
  s["time.mlp2.b"] = {1, d};
  s["time.null_text"] = {1, d};
  for (int i = 0; i < c.depth; ++i) {
    const std::string p = "blocks." + std::to_string(i) + ".";
    s[p + "ada.w"] = {d, 6 * d};
    s[p + "ada.b"] = {1, 6 * d};
    s[p + "attn.qkv.w"] = {d, 3 * d};
    s[p + "attn.qkv.b"] = {1, 3 * d};
    s[p + "attn.out.w"] = {d, d};
    s[p + "attn.out.b"] = {1, d};
    s[p + "mlp.fc1.w"] = {d, hidden};
    s[p + "mlp.fc1.b"] = {1, hidden};
    s[p + "mlp.fc2.w"] = {hidden, d};
    s[p + "mlp.fc2.b"] = {1, d};
  }
  s["final.ada.w"] = {d, 2 * d};
  s["final.ada.b"] = {1, 2 * d};
  s["final.out.w"] = {d, c.token_dim};
  s["final.out.b"] = {1, c.token_dim};
  return s;
}

namespace {

bool is_bias(const std::string& name) { return name.size() >= 2 && name.compare(name.size() - 2, 2, ".b") == 0; }
bool starts_with(const std::string& s, const std::string& p) { return s.compare(0, p.size(), p) == 0; }
bool contains(const std::string& s, const std::string& p) { return s.find(p) != std::string::npos; }

}  // namespace

template <typename Scalar>
Model<Scalar> init_model(const DiTConfig& config, Stage stage, std::uint64_t seed) {
  Model<Scalar> model{config, stage, {}};
  std::mt19937_64 rng(seed);
  for (const auto& [name, shape] : parameter_shapes(config, stage)) {
    RowMatrix<Scalar> m = RowMatrix<Scalar>::Zero(shape.first, shape.second);
    const bool zero_init = is_bias(name) || contains(name, "ada.") || starts_with(name, "final.out");
    if (!zero_init) {
      if (starts_with(name, "time.")) {
        std::normal_distribution<double> normal(0.0, 0.02);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(normal(rng));
      } else {
        const double limit = std::sqrt(6.0 / (shape.first + shape.second));
        std::uniform_real_distribution<double> uniform(-limit, limit);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(uniform(rng));
      }
    }
    model.params.slots.emplace(name, std::move(m));
  }
  return model;
}

template <typename Scalar>
void randomize_parameters(Model<Scalar>& model, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  for (auto& [name, m] : model.params.slots) {
    const double limit = scale * std::sqrt(6.0 / (m.rows() + m.cols()));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(uniform(rng));
  }
}

template Model<float> init_model<float>(const DiTConfig&, Stage, std::uint64_t);
template Model<double> init_model<double>(const DiTConfig&, Stage, std::uint64_t);
template void randomize_parameters<float>(Model<float>&, std::uint64_t, double);
template void randomize_parameters<double>(Model<double>&, std::uint64_t, double);

namespace dit {

namespace {

template <typename Scalar>
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
template <typename Scalar>
using ColVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

constexpr double kLayerNormEps = 1e-6;
constexpr double kGeluC = 0.044715;

template <typename Scalar>
Scalar silu(Scalar x) {
  return x / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Scalar silu_grad(Scalar x) {
  const Scalar s = Scalar(1) / (Scalar(1) + std::exp(-x));
  return s * (Scalar(1) + x * (Scalar(1) - s));
}

// Tanh approximation of GELU, evaluated on whole arrays so the tanh is
// vectorized.
template <typename Scalar>
RowMatrix<Scalar> gelu(const RowMatrix<Scalar>& x) {
  const Scalar k = static_cast<Scalar>(std::sqrt(2.0 / std::numbers::pi));
  const auto xa = x.array();
  return (Scalar(0.5) * xa * (Scalar(1) + (k * (xa + Scalar(kGeluC) * xa.cube())).tanh())).matrix();
}

template <typename Scalar>
RowMatrix<Scalar> gelu_grad(const RowMatrix<Scalar>& x) {
  const Scalar k = static_cast<Scalar>(std::sqrt(2.0 / std::numbers::pi));
  const auto xa = x.array();
  const Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> th =
      (k * (xa + Scalar(kGeluC) * xa.cube())).tanh();
  return (Scalar(0.5) * (Scalar(1) + th) +
          Scalar(0.5) * xa * (Scalar(1) - th.square()) * k * (Scalar(1) + Scalar(3 * kGeluC) * xa.square()))
      .matrix();
}

// In-place softmax over each row.
template <typename Scalar>
void softmax_rows(RowMatrix<Scalar>& s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    auto r = s.row(i).array();
    r = (r - r.maxCoeff()).exp();
    r /= r.sum();
  }
}

// Row-wise layer norm without affine parameters.
template <typename Scalar>
RowMatrix<Scalar> layer_norm(const RowMatrix<Scalar>& x, ColVec<Scalar>& rstd) {
  const Eigen::Index d = x.cols();
  const ColVec<Scalar> mean = x.rowwise().mean();
  RowMatrix<Scalar> centered = x.colwise() - mean;
  const ColVec<Scalar> var = centered.array().square().rowwise().sum() / static_cast<Scalar>(d);
  rstd = (var.array() + static_cast<Scalar>(kLayerNormEps)).rsqrt();
  return centered.array().colwise() * rstd.array();
}

template <typename Scalar>
RowMatrix<Scalar> layer_norm_backward(const RowMatrix<Scalar>& dn, const RowMatrix<Scalar>& n,
                                      const ColVec<Scalar>& rstd) {
  const ColVec<Scalar> mean_dn = dn.rowwise().mean();
  const ColVec<Scalar> mean_dn_n = dn.cwiseProduct(n).rowwise().mean();
  RowMatrix<Scalar> dx = dn.colwise() - mean_dn;
  dx -= (n.array().colwise() * mean_dn_n.array()).matrix();
  return dx.array().colwise() * rstd.array();
}

template <typename Scalar>
RowMatrix<Scalar> modulate(const RowMatrix<Scalar>& n, const RowVec<Scalar>& shift, const RowVec<Scalar>& scale) {
  RowMatrix<Scalar> m = n.array().rowwise() * (scale.array() + Scalar(1));
  m.rowwise() += shift;
  return m;
}

template <typename Scalar>
RowMatrix<Scalar> linear(const RowMatrix<Scalar>& x, const RowMatrix<Scalar>& w, const RowMatrix<Scalar>& b) {
  RowMatrix<Scalar> y(x.rows(), w.cols());
  y.noalias() = x * w;
  y.rowwise() += b.row(0);
  return y;
}

template <typename Scalar>
void sinusoid_into(RowMatrix<Scalar>& out, int col0, int width, const Eigen::VectorXi& pos) {
  const int half = width / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::pow(10000.0, -2.0 * i / static_cast<double>(width));
    for (Eigen::Index r = 0; r < pos.size(); ++r) {
      const double arg = pos[r] * freq;
      out(r, col0 + 2 * i) = static_cast<Scalar>(std::sin(arg));
      out(r, col0 + 2 * i + 1) = static_cast<Scalar>(std::cos(arg));
    }
  }
}

}  // namespace

template <typename Scalar>
RowVec<Scalar> timestep_embedding(Scalar t, int dim) {
  RowVec<Scalar> e(dim);
  const int half = dim / 2;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / static_cast<double>(half));
    const double arg = 1000.0 * static_cast<double>(t) * freq;
    e[i] = static_cast<Scalar>(std::cos(arg));
    e[half + i] = static_cast<Scalar>(std::sin(arg));
  }
  return e;
}

template <typename Scalar>
RowMatrix<Scalar> position_embedding(const Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>& coords, int dim) {
  const int k = dim / 6;
  const int wf = 2 * k, wh = 2 * k, ww = dim - 4 * k;
  RowMatrix<Scalar> out = RowMatrix<Scalar>::Zero(coords.rows(), dim);
  sinusoid_into(out, 0, wf, coords.col(0));
  sinusoid_into(out, wf, wh, coords.col(1));
  sinusoid_into(out, wf + wh, ww, coords.col(2));
  return out;
}

template <typename Scalar>
ParamStore<Scalar> zeros_like(const ParamStore<Scalar>& params) {
  ParamStore<Scalar> z;
  for (const auto& [name, m] : params.slots) z.slots.emplace(name, RowMatrix<Scalar>::Zero(m.rows(), m.cols()));
  return z;
}

template <typename Scalar>
RowMatrix<Scalar> forward(const Model<Scalar>& model, const DenoiserInput<Scalar>& input, Scalar t,
                          ForwardCache<Scalar>* cache) {
  const DiTConfig& cfg = model.config;
  const ParamStore<Scalar>& P = model.params;
  const int d = cfg.dim;
  const int heads = cfg.heads;
  const int dh = cfg.head_dim();
  const Eigen::Index n = input.features.rows();
  if (input.features.cols() != model.input_dim()) {
    throw ShapeMismatchError("dit::forward: input width " + std::to_string(input.features.cols()) +
                             " but model expects " + std::to_string(model.input_dim()));
  }
  if (input.coords.rows() != n) throw ShapeMismatchError("dit::forward: coordinate count mismatch");
  if (n > 0) {
    const auto maxc = input.coords.colwise().maxCoeff();
    if (input.coords.minCoeff() < 0 || maxc(0) >= cfg.max_grid.f || maxc(1) >= cfg.max_grid.h ||
        maxc(2) >= cfg.max_grid.w) {
      throw ShapeMismatchError("dit::forward: token grid exceeds max_grid");
    }
  }
  if (!std::isfinite(static_cast<double>(t))) throw NonFiniteError("dit::forward: non-finite time");

  // Conditioning vector shared by all tokens.
  const RowVec<Scalar> temb = timestep_embedding<Scalar>(t, d);
  const RowVec<Scalar> t_hidden = temb * P.at("time.mlp0.w") + P.at("time.mlp0.b").row(0);
  const RowVec<Scalar> t_act = t_hidden.unaryExpr([](Scalar v) { return silu(v); });
  const RowVec<Scalar> cond = t_act * P.at("time.mlp2.w") + P.at("time.mlp2.b").row(0) + P.at("time.null_text").row(0);
  const RowVec<Scalar> cond_act = cond.unaryExpr([](Scalar v) { return silu(v); });

  RowMatrix<Scalar> x = linear(input.features, P.at("embed.in.w"), P.at("embed.in.b"));
  x += position_embedding<Scalar>(input.coords, d);

  if (cache) {
    cache->temb = temb;
    cache->t_hidden = t_hidden;
    cache->t_act = t_act;
    cache->cond = cond;
    cache->cond_act = cond_act;
    cache->input = input.features;
    cache->blocks.assign(static_cast<std::size_t>(cfg.depth), {});
  }

  const Scalar attn_scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  for (int b = 0; b < cfg.depth; ++b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    const RowVec<Scalar> mod = cond_act * P.at(p + "ada.w") + P.at(p + "ada.b").row(0);
    const RowVec<Scalar> shift1 = mod.segment(0, d), scale1 = mod.segment(d, d), gate1 = mod.segment(2 * d, d);
    const RowVec<Scalar> shift2 = mod.segment(3 * d, d), scale2 = mod.segment(4 * d, d), gate2 = mod.segment(5 * d, d);

    ColVec<Scalar> rstd1, rstd2;
    RowMatrix<Scalar> n1 = layer_norm(x, rstd1);
    RowMatrix<Scalar> m1 = modulate(n1, shift1, scale1);
    RowMatrix<Scalar> qkv = linear(m1, P.at(p + "attn.qkv.w"), P.at(p + "attn.qkv.b"));
    RowMatrix<Scalar> attn(n, d);
    std::vector<RowMatrix<Scalar>> probs;
    if (cache) probs.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
      RowMatrix<Scalar> s(n, n);
      s.noalias() = qkv.middleCols(h * dh, dh) * qkv.middleCols(d + h * dh, dh).transpose();
      s *= attn_scale;
      softmax_rows(s);
      attn.middleCols(h * dh, dh).noalias() = s * qkv.middleCols(2 * d + h * dh, dh);
      if (cache) probs.push_back(std::move(s));
    }
    RowMatrix<Scalar> a = linear(attn, P.at(p + "attn.out.w"), P.at(p + "attn.out.b"));
    RowMatrix<Scalar> x1 = x + (a.array().rowwise() * gate1.array()).matrix();

    RowMatrix<Scalar> n2 = layer_norm(x1, rstd2);
    RowMatrix<Scalar> m2 = modulate(n2, shift2, scale2);
    RowMatrix<Scalar> pre_act = linear(m2, P.at(p + "mlp.fc1.w"), P.at(p + "mlp.fc1.b"));
    RowMatrix<Scalar> act = gelu(pre_act);
    RowMatrix<Scalar> f = linear(act, P.at(p + "mlp.fc2.w"), P.at(p + "mlp.fc2.b"));
    RowMatrix<Scalar> x2 = x1 + (f.array().rowwise() * gate2.array()).matrix();

    if (cache) {
      BlockCache<Scalar>& bc = cache->blocks[b];
      bc.x = std::move(x);
      bc.n1 = std::move(n1);
      bc.m1 = std::move(m1);
      bc.qkv = std::move(qkv);
      bc.attn = std::move(attn);
      bc.a = std::move(a);
      bc.x1 = std::move(x1);
      bc.n2 = std::move(n2);
      bc.m2 = std::move(m2);
      bc.pre_act = std::move(pre_act);
      bc.act = std::move(act);
      bc.f = std::move(f);
      bc.rstd1 = std::move(rstd1);
      bc.rstd2 = std::move(rstd2);
      bc.mod = mod;
      bc.probs = std::move(probs);
    }
    x = std::move(x2);
  }

  const RowVec<Scalar> mod_final = cond_act * P.at("final.ada.w") + P.at("final.ada.b").row(0);
  ColVec<Scalar> rstd_final;
  RowMatrix<Scalar> n_final = layer_norm(x, rstd_final);
  RowMatrix<Scalar> m_final = modulate(n_final, RowVec<Scalar>(mod_final.segment(0, d)),
                                       RowVec<Scalar>(mod_final.segment(d, d)));
  RowMatrix<Scalar> out = linear(m_final, P.at("final.out.w"), P.at("final.out.b"));
  if (!out.allFinite()) throw NonFiniteError("dit::forward: non-finite activations");
  if (cache) {
    cache->x_final = std::move(x);
    cache->n_final = std::move(n_final);
    cache->m_final = std::move(m_final);
    cache->rstd_final = std::move(rstd_final);
    cache->mod_final = mod_final;
  }
  return out;
}

template <typename Scalar>
void backward(const Model<Scalar>& model, const ForwardCache<Scalar>& cache, const RowMatrix<Scalar>& d_out,
              ParamStore<Scalar>& G) {
  const DiTConfig& cfg = model.config;
  const ParamStore<Scalar>& P = model.params;
  const int d = cfg.dim;
  const int heads = cfg.heads;
  const int dh = cfg.head_dim();
  const Eigen::Index n = d_out.rows();
  const Scalar attn_scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));

  RowVec<Scalar> d_cond_act = RowVec<Scalar>::Zero(d);

  // Output head.
  G["final.out.w"].noalias() += cache.m_final.transpose() * d_out;
  G["final.out.b"].row(0) += d_out.colwise().sum();
  RowMatrix<Scalar> dm = d_out * P.at("final.out.w").transpose();
  {
    RowVec<Scalar> dmod(2 * d);
    dmod.segment(0, d) = dm.colwise().sum();
    dmod.segment(d, d) = dm.cwiseProduct(cache.n_final).colwise().sum();
    G["final.ada.w"].noalias() += cache.cond_act.transpose() * dmod;
    G["final.ada.b"].row(0) += dmod;
    d_cond_act.noalias() += dmod * P.at("final.ada.w").transpose();
  }
  const RowVec<Scalar> scale_f = cache.mod_final.segment(d, d);
  RowMatrix<Scalar> dn = dm.array().rowwise() * (scale_f.array() + Scalar(1));
  RowMatrix<Scalar> dx = layer_norm_backward(dn, cache.n_final, cache.rstd_final);

  for (int b = cfg.depth - 1; b >= 0; --b) {
    const std::string p = "blocks." + std::to_string(b) + ".";
    const BlockCache<Scalar>& bc = cache.blocks[b];
    const RowVec<Scalar> scale1 = bc.mod.segment(d, d), gate1 = bc.mod.segment(2 * d, d);
    const RowVec<Scalar> scale2 = bc.mod.segment(4 * d, d), gate2 = bc.mod.segment(5 * d, d);
    RowVec<Scalar> dmod(6 * d);

    // MLP branch: x2 = x1 + gate2 * f.
    dmod.segment(5 * d, d) = dx.cwiseProduct(bc.f).colwise().sum();
    RowMatrix<Scalar> df = dx.array().rowwise() * gate2.array();
    G[p + "mlp.fc2.w"].noalias() += bc.act.transpose() * df;
    G[p + "mlp.fc2.b"].row(0) += df.colwise().sum();
    RowMatrix<Scalar> dpre = df * P.at(p + "mlp.fc2.w").transpose();
    dpre = dpre.cwiseProduct(gelu_grad(bc.pre_act));
    G[p + "mlp.fc1.w"].noalias() += bc.m2.transpose() * dpre;
    G[p + "mlp.fc1.b"].row(0) += dpre.colwise().sum();
    RowMatrix<Scalar> dm2 = dpre * P.at(p + "mlp.fc1.w").transpose();
    dmod.segment(3 * d, d) = dm2.colwise().sum();
    dmod.segment(4 * d, d) = dm2.cwiseProduct(bc.n2).colwise().sum();
    RowMatrix<Scalar> dn2 = dm2.array().rowwise() * (scale2.array() + Scalar(1));
    RowMatrix<Scalar> dx1 = dx + layer_norm_backward(dn2, bc.n2, bc.rstd2);

    // Attention branch: x1 = x + gate1 * a.
    dmod.segment(2 * d, d) = dx1.cwiseProduct(bc.a).colwise().sum();
    RowMatrix<Scalar> da = dx1.array().rowwise() * gate1.array();
    G[p + "attn.out.w"].noalias() += bc.attn.transpose() * da;
    G[p + "attn.out.b"].row(0) += da.colwise().sum();
    RowMatrix<Scalar> dattn = da * P.at(p + "attn.out.w").transpose();
    RowMatrix<Scalar> dqkv(n, 3 * d);
    for (int h = 0; h < heads; ++h) {
      const RowMatrix<Scalar>& prob = bc.probs[h];
      const auto q = bc.qkv.middleCols(h * dh, dh);
      const auto k = bc.qkv.middleCols(d + h * dh, dh);
      const auto v = bc.qkv.middleCols(2 * d + h * dh, dh);
      const auto dO = dattn.middleCols(h * dh, dh);
      dqkv.middleCols(2 * d + h * dh, dh).noalias() = prob.transpose() * dO;
      RowMatrix<Scalar> dp(n, n);
      dp.noalias() = dO * v.transpose();
      // Softmax backward, row by row: ds = p * (dp - <dp, p>).
      for (Eigen::Index i = 0; i < n; ++i) {
        auto dr = dp.row(i).array();
        const auto pr = prob.row(i).array();
        const Scalar inner = (dr * pr).sum();
        dr = (dr - inner) * pr * attn_scale;
      }
      const RowMatrix<Scalar>& ds = dp;
      dqkv.middleCols(h * dh, dh).noalias() = ds * k;
      dqkv.middleCols(d + h * dh, dh).noalias() = ds.transpose() * q;
    }
    G[p + "attn.qkv.w"].noalias() += bc.m1.transpose() * dqkv;
    G[p + "attn.qkv.b"].row(0) += dqkv.colwise().sum();
    RowMatrix<Scalar> dm1 = dqkv * P.at(p + "attn.qkv.w").transpose();
    dmod.segment(0, d) = dm1.colwise().sum();
    dmod.segment(d, d) = dm1.cwiseProduct(bc.n1).colwise().sum();
    RowMatrix<Scalar> dn1 = dm1.array().rowwise() * (scale1.array() + Scalar(1));
    dx = dx1 + layer_norm_backward(dn1, bc.n1, bc.rstd1);

    G[p + "ada.w"].noalias() += cache.cond_act.transpose() * dmod;
    G[p + "ada.b"].row(0) += dmod;
    d_cond_act.noalias() += dmod * P.at(p + "ada.w").transpose();
  }

  // Input embedding (positions carry no parameters).
  G["embed.in.w"].noalias() += cache.input.transpose() * dx;
  G["embed.in.b"].row(0) += dx.colwise().sum();

  // Time path: cond_act = silu(cond), cond = silu(t_hidden) W2 + b2 + null.
  const RowVec<Scalar> d_cond = d_cond_act.cwiseProduct(cache.cond.unaryExpr([](Scalar v) { return silu_grad(v); }));
  G["time.null_text"].row(0) += d_cond;
  G["time.mlp2.w"].noalias() += cache.t_act.transpose() * d_cond;
  G["time.mlp2.b"].row(0) += d_cond;
  RowVec<Scalar> d_hidden = d_cond * P.at("time.mlp2.w").transpose();
  d_hidden = d_hidden.cwiseProduct(cache.t_hidden.unaryExpr([](Scalar v) { return silu_grad(v); }));
  G["time.mlp0.w"].noalias() += cache.temb.transpose() * d_hidden;
  G["time.mlp0.b"].row(0) += d_hidden;
}

#define INPTPU_INSTANTIATE_DIT(S)                                                                              \
  template RowVec<S> timestep_embedding<S>(S, int);                                                            \
  template RowMatrix<S> position_embedding<S>(const Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>&,   \
                                              int);                                                            \
  template ParamStore<S> zeros_like<S>(const ParamStore<S>&);                                                  \
  template RowMatrix<S> forward<S>(const Model<S>&, const DenoiserInput<S>&, S, ForwardCache<S>*);             \
  template void backward<S>(const Model<S>&, const ForwardCache<S>&, const RowMatrix<S>&, ParamStore<S>&);

INPTPU_INSTANTIATE_DIT(float)
INPTPU_INSTANTIATE_DIT(double)

#undef INPTPU_INSTANTIATE_DIT

}  // namespace dit
}  // namespace inptpu

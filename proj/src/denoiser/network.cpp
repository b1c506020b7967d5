#include "denoiser/network.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace speakgen::denoiser {
namespace {

constexpr double kNormEps = 1e-5;
const double kGeluScale = std::sqrt(2.0 / std::numbers::pi);

Linear make_linear(int in, int out, bool bias, Rng& rng) {
  const double bound = std::sqrt(6.0 / (in + out));
  Linear l;
  l.weight.resize(in, out);
  for (int r = 0; r < in; ++r)
    for (int c = 0; c < out; ++c) l.weight(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
  if (bias) l.bias = Eigen::MatrixXd::Zero(1, out);
  return l;
}

LayerNorm make_norm(int n) { return {Eigen::MatrixXd::Ones(1, n), Eigen::MatrixXd::Zero(1, n)}; }

Eigen::MatrixXd apply(const Linear& l, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = x * l.weight;
  if (l.bias.size() > 0) y.rowwise() += l.bias.row(0);
  return y;
}

// dY -> dX, accumulating weight and bias gradients.
Eigen::MatrixXd apply_backward(const Linear& l, const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy, Linear& g) {
  g.weight.noalias() += x.transpose() * dy;
  if (l.bias.size() > 0) g.bias += dy.colwise().sum();
  return dy * l.weight.transpose();
}

Eigen::MatrixXd norm_forward(const LayerNorm& n, const Eigen::MatrixXd& x, Eigen::MatrixXd& hat,
                             Eigen::VectorXd& inv_std) {
  const Eigen::Index cols = x.cols();
  const Eigen::VectorXd mean = x.rowwise().mean();
  hat = x.colwise() - mean;
  inv_std = ((hat.array().square().rowwise().sum() / static_cast<double>(cols)) + kNormEps).rsqrt();
  hat = hat.array().colwise() * inv_std.array();
  Eigen::MatrixXd y = hat.array().rowwise() * n.gain.row(0).array();
  y.rowwise() += n.shift.row(0);
  return y;
}

Eigen::MatrixXd norm_backward(const LayerNorm& n, const Eigen::MatrixXd& hat, const Eigen::VectorXd& inv_std,
                              const Eigen::MatrixXd& dy, LayerNorm& g) {
  g.gain += (dy.array() * hat.array()).colwise().sum().matrix();
  g.shift += dy.colwise().sum();
  const Eigen::ArrayXXd dhat = dy.array().rowwise() * n.gain.row(0).array();
  const Eigen::ArrayXd mean_dhat = dhat.rowwise().mean();
  const Eigen::ArrayXd mean_dhat_hat = (dhat * hat.array()).rowwise().mean();
  Eigen::ArrayXXd dx = dhat.colwise() - mean_dhat;
  dx -= hat.array().colwise() * mean_dhat_hat;
  return (dx.colwise() * inv_std.array()).matrix();
}

// Tanh-approximated GELU and its derivative.
Eigen::MatrixXd gelu(const Eigen::MatrixXd& x) {
  const Eigen::ArrayXXd a = x.array();
  return (0.5 * a * (1.0 + (kGeluScale * (a + 0.044715 * a.cube())).tanh())).matrix();
}

Eigen::MatrixXd gelu_backward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dy) {
  const Eigen::ArrayXXd a = x.array();
  const Eigen::ArrayXXd th = (kGeluScale * (a + 0.044715 * a.cube())).tanh();
  const Eigen::ArrayXXd d = 0.5 * (1.0 + th) + 0.5 * a * (1.0 - th.square()) * kGeluScale * (1.0 + 3.0 * 0.044715 * a.square());
  return (dy.array() * d).matrix();
}

Eigen::RowVectorXd silu(const Eigen::RowVectorXd& x) {
  return (x.array() / (1.0 + (-x.array()).exp())).matrix();
}

Eigen::RowVectorXd silu_backward(const Eigen::RowVectorXd& x, const Eigen::RowVectorXd& dy) {
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-x.array()).exp());
  return (dy.array() * s * (1.0 + x.array() * (1.0 - s))).matrix();
}

void add_positional_encoding(Eigen::MatrixXd& tokens) {
  for (Eigen::Index p = 0; p < tokens.rows(); ++p)
    tokens.row(p) += sinusoidal_embedding(static_cast<double>(p), static_cast<int>(tokens.cols()));
}

void softmax_rows(Eigen::MatrixXd& s) {
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    const double m = s.row(r).maxCoeff();
    s.row(r) = (s.row(r).array() - m).exp();
    s.row(r) /= s.row(r).sum();
  }
}

template <typename Self, typename Out>
void collect(Self& p, Out& out) {
  auto lin = [&](const std::string& name, auto& l) {
    out.emplace_back(name + ".weight", &l.weight);
    if (l.bias.size() > 0) out.emplace_back(name + ".bias", &l.bias);
  };
  auto norm = [&](const std::string& name, auto& n) {
    out.emplace_back(name + ".gain", &n.gain);
    out.emplace_back(name + ".shift", &n.shift);
  };
  lin("time_in", p.time_in);
  lin("time_out", p.time_out);
  lin("condition", p.condition);
  lin("motion_in", p.motion_in);
  lin("audio_in", p.audio_in);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    auto& b = p.blocks[i];
    const std::string prefix = "blocks." + std::to_string(i) + ".";
    norm(prefix + "norm1", b.norm1);
    lin(prefix + "query", b.query);
    lin(prefix + "key", b.key);
    lin(prefix + "value", b.value);
    lin(prefix + "out", b.out);
    norm(prefix + "norm2", b.norm2);
    lin(prefix + "ff_in", b.ff_in);
    lin(prefix + "ff_out", b.ff_out);
  }
  norm("final_norm", p.final_norm);
  lin("head", p.head);
}

}  // namespace

void DenoiserConfig::validate() const {
  require(feature_dim > 0 && audio_dim > 0 && text_dim > 0, "denoiser dimensions must be positive");
  require(hidden_dim > 0 && hidden_dim % 2 == 0, "hidden_dim must be a positive even number");
  require(layers > 0 && heads > 0 && ff_mult > 0, "layers, heads and ff_mult must be positive");
  require(hidden_dim % heads == 0, "hidden_dim must be divisible by the number of heads");
  require(max_len > 0 && diffusion_steps > 0, "max_len and diffusion_steps must be positive");
}

DenoiserParams DenoiserParams::initialize(const DenoiserConfig& config, Rng& rng) {
  config.validate();
  const int h = config.hidden_dim;
  DenoiserParams p;
  p.config = config;
  p.time_in = make_linear(h, h, true, rng);
  p.time_out = make_linear(h, h, true, rng);
  p.condition = make_linear(config.text_dim + h, h, true, rng);
  p.motion_in = make_linear(config.feature_dim, h, true, rng);
  p.audio_in = make_linear(config.audio_dim, h, false, rng);
  for (int i = 0; i < config.layers; ++i) {
    AttentionBlock b;
    b.norm1 = make_norm(h);
    b.query = make_linear(h, h, true, rng);
    b.key = make_linear(h, h, true, rng);
    b.value = make_linear(h, h, true, rng);
    b.out = make_linear(h, h, true, rng);
    b.norm2 = make_norm(h);
    b.ff_in = make_linear(h, h * config.ff_mult, true, rng);
    b.ff_out = make_linear(h * config.ff_mult, h, true, rng);
    p.blocks.push_back(std::move(b));
  }
  p.final_norm = make_norm(h);
  p.head = {Eigen::MatrixXd::Zero(h, config.feature_dim), Eigen::MatrixXd::Zero(1, config.feature_dim)};
  return p;
}

DenoiserParams DenoiserParams::zeros_like(const DenoiserParams& other) {
  DenoiserParams p = other;
  for (auto& [name, t] : p.tensors()) t->setZero();
  return p;
}

std::vector<std::pair<std::string, Eigen::MatrixXd*>> DenoiserParams::tensors() {
  std::vector<std::pair<std::string, Eigen::MatrixXd*>> out;
  collect(*this, out);
  return out;
}

std::vector<std::pair<std::string, const Eigen::MatrixXd*>> DenoiserParams::tensors() const {
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> out;
  collect(*this, out);
  return out;
}

std::size_t DenoiserParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors()) n += static_cast<std::size_t>(t->size());
  return n;
}

Eigen::RowVectorXd sinusoidal_embedding(double position, int dim) {
  const int half = dim / 2;
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(dim);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    out(i) = std::sin(position * freq);
    out(half + i) = std::cos(position * freq);
  }
  return out;
}

Eigen::RowVectorXd timestep_embedding(const DenoiserParams& params, int t) {
  const Eigen::RowVectorXd s = sinusoidal_embedding(t, params.config.hidden_dim);
  return apply(params.time_out, silu(apply(params.time_in, s)));
}

Network::Network(DenoiserParams params) : params_(std::move(params)) { params_.config.validate(); }

Eigen::MatrixXd Network::predict(const Eigen::MatrixXd& x_t, int t,
                                 const conditioning::ConditionBundle& condition) const {
  return forward(params_, x_t, t, condition, nullptr);
}

Eigen::MatrixXd forward(const DenoiserParams& params, const Eigen::MatrixXd& x_t, int t,
                        const conditioning::ConditionBundle& condition, ForwardCache* cache) {
  const DenoiserConfig& cfg = params.config;
  const Eigen::Index frames = x_t.rows();
  require(frames >= 1 && frames <= cfg.max_len, "sequence length " + std::to_string(frames) +
                                                    " outside [1, " + std::to_string(cfg.max_len) + "]");
  require(x_t.cols() == cfg.feature_dim, "x_t has " + std::to_string(x_t.cols()) + " features, expected " +
                                             std::to_string(cfg.feature_dim));
  require(t >= 0 && t <= cfg.diffusion_steps, "noising step out of range");
  condition.validate(static_cast<int>(frames), cfg.text_dim, cfg.audio_dim);

  const int h = cfg.hidden_dim;
  const int heads = cfg.heads;
  const int head_dim = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  // Leading token: [text, step embedding].
  const Eigen::RowVectorXd step_sinusoid = sinusoidal_embedding(t, h);
  const Eigen::RowVectorXd time_pre = apply(params.time_in, step_sinusoid);
  const Eigen::RowVectorXd time_act = silu(time_pre);
  const Eigen::RowVectorXd step = apply(params.time_out, time_act);
  Eigen::RowVectorXd condition_input(cfg.text_dim + h);
  condition_input << condition.text.transpose(), step;

  Eigen::MatrixXd tokens(frames + 1, h);
  tokens.row(0) = apply(params.condition, condition_input);
  const bool audio_present = !condition.audio.isZero(0.0);
  Eigen::MatrixXd frame_tokens = apply(params.motion_in, x_t);
  if (audio_present) frame_tokens.noalias() += condition.audio * params.audio_in.weight;
  tokens.bottomRows(frames) = frame_tokens;
  if (cfg.positional_encoding) add_positional_encoding(tokens);

  if (cache) {
    cache->step_sinusoid = step_sinusoid;
    cache->time_pre = time_pre;
    cache->time_act = time_act;
    cache->condition_input = condition_input;
    cache->x_t = x_t;
    cache->audio_present = audio_present;
    cache->audio = audio_present ? condition.audio : Eigen::MatrixXd();
    cache->blocks.assign(params.blocks.size(), BlockCache{});
  }

  Eigen::MatrixXd hidden = std::move(tokens);
  Eigen::MatrixXd hat;
  Eigen::VectorXd inv_std;
  for (std::size_t i = 0; i < params.blocks.size(); ++i) {
    const AttentionBlock& b = params.blocks[i];
    BlockCache* bc = cache ? &cache->blocks[i] : nullptr;
    if (bc) bc->input = hidden;

    const Eigen::MatrixXd u = norm_forward(b.norm1, hidden, hat, inv_std);
    if (bc) {
      bc->norm1_hat = hat;
      bc->norm1_inv_std = inv_std;
      bc->norm1_out = u;
    }
    const Eigen::MatrixXd q = apply(b.query, u);
    const Eigen::MatrixXd k = apply(b.key, u);
    const Eigen::MatrixXd v = apply(b.value, u);
    Eigen::MatrixXd attended(hidden.rows(), h);
    if (bc) bc->probs.resize(static_cast<std::size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
      Eigen::MatrixXd s = scale * (q.middleCols(hd * head_dim, head_dim) * k.middleCols(hd * head_dim, head_dim).transpose());
      softmax_rows(s);
      attended.middleCols(hd * head_dim, head_dim).noalias() = s * v.middleCols(hd * head_dim, head_dim);
      if (bc) bc->probs[static_cast<std::size_t>(hd)] = std::move(s);
    }
    hidden += apply(b.out, attended);
    if (bc) {
      bc->q = q;
      bc->k = k;
      bc->v = v;
      bc->attended = attended;
      bc->mid = hidden;
    }

    const Eigen::MatrixXd w = norm_forward(b.norm2, hidden, hat, inv_std);
    const Eigen::MatrixXd ff_pre = apply(b.ff_in, w);
    const Eigen::MatrixXd ff_act = gelu(ff_pre);
    hidden += apply(b.ff_out, ff_act);
    if (bc) {
      bc->norm2_hat = hat;
      bc->norm2_inv_std = inv_std;
      bc->norm2_out = w;
      bc->ff_pre = ff_pre;
      bc->ff_act = ff_act;
    }
  }

  const Eigen::MatrixXd z = norm_forward(params.final_norm, hidden, hat, inv_std);
  if (cache) {
    cache->final_input = hidden;
    cache->final_hat = hat;
    cache->final_inv_std = inv_std;
    cache->final_out = z;
  }
  return apply(params.head, z.bottomRows(frames));
}

void backward(const DenoiserParams& params, const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
              DenoiserParams& grads) {
  const DenoiserConfig& cfg = params.config;
  const int h = cfg.hidden_dim;
  const int heads = cfg.heads;
  const int head_dim = h / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const Eigen::Index frames = grad_output.rows();

  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(frames + 1, h);
  dz.bottomRows(frames) = apply_backward(params.head, cache.final_out.bottomRows(frames), grad_output, grads.head);
  Eigen::MatrixXd dhidden = norm_backward(params.final_norm, cache.final_hat, cache.final_inv_std, dz, grads.final_norm);

  for (std::size_t i = params.blocks.size(); i-- > 0;) {
    const AttentionBlock& b = params.blocks[i];
    AttentionBlock& g = grads.blocks[i];
    const BlockCache& bc = cache.blocks[i];

    // Feed-forward residual branch.
    Eigen::MatrixXd d = apply_backward(b.ff_out, bc.ff_act, dhidden, g.ff_out);
    d = gelu_backward(bc.ff_pre, d);
    d = apply_backward(b.ff_in, bc.norm2_out, d, g.ff_in);
    dhidden += norm_backward(b.norm2, bc.norm2_hat, bc.norm2_inv_std, d, g.norm2);

    // Attention residual branch.
    const Eigen::MatrixXd dattended = apply_backward(b.out, bc.attended, dhidden, g.out);
    Eigen::MatrixXd dq(bc.q.rows(), h), dk(bc.k.rows(), h), dv(bc.v.rows(), h);
    for (int hd = 0; hd < heads; ++hd) {
      const auto& p = bc.probs[static_cast<std::size_t>(hd)];
      const auto dout = dattended.middleCols(hd * head_dim, head_dim);
      const auto vh = bc.v.middleCols(hd * head_dim, head_dim);
      dv.middleCols(hd * head_dim, head_dim).noalias() = p.transpose() * dout;
      const Eigen::MatrixXd dp = dout * vh.transpose();
      const Eigen::VectorXd row_dot = (dp.array() * p.array()).rowwise().sum();
      const Eigen::MatrixXd ds = (p.array() * (dp.colwise() - row_dot).array()).matrix() * scale;
      dq.middleCols(hd * head_dim, head_dim).noalias() = ds * bc.k.middleCols(hd * head_dim, head_dim);
      dk.middleCols(hd * head_dim, head_dim).noalias() = ds.transpose() * bc.q.middleCols(hd * head_dim, head_dim);
    }
    Eigen::MatrixXd du = apply_backward(b.query, bc.norm1_out, dq, g.query);
    du += apply_backward(b.key, bc.norm1_out, dk, g.key);
    du += apply_backward(b.value, bc.norm1_out, dv, g.value);
    dhidden += norm_backward(b.norm1, bc.norm1_hat, bc.norm1_inv_std, du, g.norm1);
  }

  // Token projections; the positional encoding is constant.
  const Eigen::MatrixXd dframes = dhidden.bottomRows(frames);
  apply_backward(params.motion_in, cache.x_t, dframes, grads.motion_in);
  if (cache.audio_present) grads.audio_in.weight.noalias() += cache.audio.transpose() * dframes;

  const Eigen::RowVectorXd dcond = dhidden.row(0);
  const Eigen::RowVectorXd dinput = apply_backward(params.condition, cache.condition_input, dcond, grads.condition);
  const Eigen::RowVectorXd dstep = dinput.tail(h);
  const Eigen::RowVectorXd dact = apply_backward(params.time_out, cache.time_act, dstep, grads.time_out);
  apply_backward(params.time_in, cache.step_sinusoid, silu_backward(cache.time_pre, dact), grads.time_in);
}

}  // namespace speakgen::denoiser

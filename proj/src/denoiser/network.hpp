#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "common/rng.hpp"
#include "conditioning/bundle.hpp"
#include "diffusion/sampler.hpp"

namespace speakgen::denoiser {

struct DenoiserConfig {
  int feature_dim = 659;
  int audio_dim = 1133;
  int text_dim = 512;
  int hidden_dim = 256;
  int layers = 8;
  int heads = 4;
  int ff_mult = 4;
  int max_len = 1024;  // frames; the sequence also carries one condition token
  int diffusion_steps = 1000;
  bool positional_encoding = true;

  void validate() const;
};

// A 1 x n bias row is stored as a 1-row matrix so every tensor has one type.
struct Linear {
  Eigen::MatrixXd weight;  // in x out
  Eigen::MatrixXd bias;    // 1 x out (empty for bias-free projections)
};

struct LayerNorm {
  Eigen::MatrixXd gain;  // 1 x n
  Eigen::MatrixXd shift;
};

struct AttentionBlock {
  LayerNorm norm1;
  Linear query, key, value, out;
  LayerNorm norm2;
  Linear ff_in, ff_out;
};

// Every trainable tensor of the network. Gradients and optimizer moments use
// the same structure.
struct DenoiserParams {
  DenoiserConfig config;
  Linear time_in, time_out;  // step embedding MLP
  Linear condition;          // [text, step embedding] -> leading token
  Linear motion_in;          // noisy frame -> token (carries the frame bias)
  Linear audio_in;           // audio frame -> token, no bias
  std::vector<AttentionBlock> blocks;
  LayerNorm final_norm;
  Linear head;  // token -> feature frame

  // Glorot-uniform weights, unit gains, zero biases and a zero output head.
  static DenoiserParams initialize(const DenoiserConfig& config, Rng& rng);
  // Same shapes, all zeros.
  static DenoiserParams zeros_like(const DenoiserParams& other);

  std::vector<std::pair<std::string, Eigen::MatrixXd*>> tensors();
  std::vector<std::pair<std::string, const Eigen::MatrixXd*>> tensors() const;
  std::size_t parameter_count() const;
};

// Sinusoidal embedding: first half sin(t * w_i), second half cos(t * w_i),
// w_i = 10000^(-i / (dim/2)).
Eigen::RowVectorXd sinusoidal_embedding(double position, int dim);

// Learned step embedding: sinusoid -> linear -> SiLU -> linear.
Eigen::RowVectorXd timestep_embedding(const DenoiserParams& params, int t);

struct ForwardCache;

class Network final : public diffusion::Denoiser {
 public:
  explicit Network(DenoiserParams params);

  int feature_dim() const override { return params_.config.feature_dim; }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t,
                          const conditioning::ConditionBundle& condition) const override;

  const DenoiserParams& params() const { return params_; }
  DenoiserParams& mutable_params() { return params_; }

 private:
  DenoiserParams params_;
};

// Denoise(x_t, t, c). `cache` (optional) records what backward needs.
Eigen::MatrixXd forward(const DenoiserParams& params, const Eigen::MatrixXd& x_t, int t,
                        const conditioning::ConditionBundle& condition, ForwardCache* cache = nullptr);

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
void backward(const DenoiserParams& params, const ForwardCache& cache, const Eigen::MatrixXd& grad_output,
              DenoiserParams& grads);

struct BlockCache {
  Eigen::MatrixXd input, norm1_hat, norm1_out;
  Eigen::VectorXd norm1_inv_std;
  Eigen::MatrixXd q, k, v, attended;
  std::vector<Eigen::MatrixXd> probs;  // per head, tokens x tokens
  Eigen::MatrixXd mid, norm2_hat, norm2_out;
  Eigen::VectorXd norm2_inv_std;
  Eigen::MatrixXd ff_pre, ff_act;
};

struct ForwardCache {
  Eigen::RowVectorXd step_sinusoid, time_pre, time_act, condition_input;
  Eigen::MatrixXd x_t;
  Eigen::MatrixXd audio;
  bool audio_present = false;
  std::vector<BlockCache> blocks;
  Eigen::MatrixXd final_input, final_hat, final_out;
  Eigen::VectorXd final_inv_std;
};

}  // namespace speakgen::denoiser

#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "conditioning/bundle.hpp"
#include "denoiser/network.hpp"
#include "diffusion/loss.hpp"
#include "diffusion/schedule.hpp"

namespace speakgen::denoiser {

// One training example after noising inputs have been drawn.
struct TrainingSample {
  Eigen::MatrixXd x0;     // frames x feature_dim (normalized, padded)
  int t = 1;              // noising step in [1, T]
  Eigen::MatrixXd noise;  // same shape as x0
  conditioning::ConditionBundle condition;
  int valid_frames = -1;  // loss covers rows [0, valid_frames); -1 means all
};

struct GradientResult {
  double loss = 0.0;
  DenoiserParams grads;
};

// Loss of one sample: x0_hat = Denoise(q_sample(x0, t, noise), t, c) compared
// with x0 over the valid frames.
double sample_loss(const DenoiserParams& params, const TrainingSample& sample, const diffusion::NoiseSchedule& schedule,
                   const diffusion::LossConfig& loss);

// Mean loss over the batch and its exact gradient.
GradientResult compute_gradients(const DenoiserParams& params, const std::vector<TrainingSample>& batch,
                                 const diffusion::NoiseSchedule& schedule, const diffusion::LossConfig& loss);

struct OptimizerConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const DenoiserParams& like, OptimizerConfig config);
  void step(DenoiserParams& params, const DenoiserParams& grads);
  long long steps_taken() const { return step_; }

 private:
  OptimizerConfig config_;
  DenoiserParams first_, second_;
  long long step_ = 0;
};

// Supplies (x0, condition, valid_frames) draws for training.
struct TrainingDraw {
  Eigen::MatrixXd x0;
  conditioning::ConditionBundle condition;
  int valid_frames = -1;
};
using DrawFn = std::function<TrainingDraw(Rng&)>;

struct TrainConfig {
  int steps = 1000;
  int batch_size = 256;
  double mask_probability = 0.1;
  diffusion::LossConfig loss;
  OptimizerConfig optimizer;
};

struct TrainResult {
  DenoiserParams params;
  std::vector<double> loss_curve;  // one mean batch loss per step
};

// Called after every step with (step index, batch loss).
using ProgressFn = std::function<void(int, double)>;

// Per step: draw a batch, sample t ~ U[1, T] and Gaussian noise, mask text at
// mask_probability, then take an Adam step on the mean loss. Throws
// TrainingDiverged if the loss becomes non-finite.
TrainResult train(DenoiserParams params, const DrawFn& draw, const diffusion::NoiseSchedule& schedule,
                  const TrainConfig& config, Rng& rng, const ProgressFn& progress = {});

class TrainingDiverged : public ValidationError {
 public:
  TrainingDiverged(int step, double loss);
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace speakgen::denoiser

#pragma once

#include <functional>

#include <Eigen/Core>

#include "common/rng.hpp"
#include "conditioning/bundle.hpp"
#include "diffusion/schedule.hpp"

namespace speakgen::diffusion {

// Denoise(x_t, t, c) -> x0_hat, same shape as x_t.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual int feature_dim() const = 0;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t,
                                  const conditioning::ConditionBundle& condition) const = 0;
};

// Adapts a callable into a Denoiser; handy for oracles and probes.
class FunctionDenoiser final : public Denoiser {
 public:
  using Fn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&, int, const conditioning::ConditionBundle&)>;
  FunctionDenoiser(int feature_dim, Fn fn) : dim_(feature_dim), fn_(std::move(fn)) {}
  int feature_dim() const override { return dim_; }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x_t, int t,
                          const conditioning::ConditionBundle& condition) const override {
    return fn_(x_t, t, condition);
  }

 private:
  int dim_;
  Fn fn_;
};

// gamma * Denoise(x_t, t, [d, a]) + (1 - gamma) * Denoise(x_t, t, [0, a]).
// gamma = 0 and gamma = 1, and bundles without text, evaluate a single branch.
Eigen::MatrixXd cfg_denoise(const Denoiser& denoiser, const Eigen::MatrixXd& x_t, int t,
                            const conditioning::ConditionBundle& bundle, double gamma);

// Called after every reverse step with the new iterate x_{t-1}; may rewrite it.
using StepHook = std::function<void(int t_prev, Eigen::MatrixXd& iterate)>;

// Runs the reverse chain from `x_start` at step `t_start` down to 0.
Eigen::MatrixXd denoise_from(const Denoiser& denoiser, Eigen::MatrixXd x_start, int t_start,
                             const conditioning::ConditionBundle& bundle, double gamma,
                             const NoiseSchedule& schedule, Rng& rng, const StepHook& hook = {});

// Draws x_T ~ N(0, I) of shape frames x feature_dim and denoises to x_0.
Eigen::MatrixXd sample_loop(const Denoiser& denoiser, const conditioning::ConditionBundle& bundle, double gamma,
                            int frames, const NoiseSchedule& schedule, Rng& rng);

}  // namespace speakgen::diffusion

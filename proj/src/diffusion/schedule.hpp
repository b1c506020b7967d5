#pragma once

#include <vector>

#include <Eigen/Core>

namespace speakgen::diffusion {

// Per-step retention alpha[t] and cumulative alpha_bar[t] for t in [0, T].
// Index 0 is the clean sample: alpha[0] = alpha_bar[0] = 1.
class NoiseSchedule {
 public:
  // Builds from per-step alphas for t = 1..T (alphas.size() == T).
  static NoiseSchedule from_alphas(const std::vector<double>& alphas);

  int steps() const { return static_cast<int>(alpha_.size()) - 1; }
  double alpha(int t) const { return alpha_[static_cast<std::size_t>(t)]; }
  double alpha_bar(int t) const { return alpha_bar_[static_cast<std::size_t>(t)]; }
  double beta(int t) const { return 1.0 - alpha(t); }
  // Variance of q(x_{t-1} | x_t, x_0); zero at t = 1.
  double posterior_variance(int t) const;

 private:
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
};

inline constexpr double kCosineOffset = 0.008;
inline constexpr double kMinAlpha = 0.001;

// alpha_bar(t) = f(t) / f(0), f(t) = cos^2(((t/T + s) / (1 + s)) * pi/2), with each
// per-step alpha floored at kMinAlpha.
NoiseSchedule cosine_schedule(int steps, double offset = kCosineOffset);

// sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise.
Eigen::MatrixXd q_sample(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& noise,
                         const NoiseSchedule& schedule);

// One draw from q(x_{t-1} | x_t, x0_hat). `noise` is ignored at t = 1.
Eigen::MatrixXd posterior_step(const Eigen::MatrixXd& x0_hat, const Eigen::MatrixXd& x_t, int t,
                               const NoiseSchedule& schedule, const Eigen::MatrixXd& noise);

}  // namespace speakgen::diffusion

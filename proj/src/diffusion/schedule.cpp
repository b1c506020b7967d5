#include "diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace speakgen::diffusion {

NoiseSchedule NoiseSchedule::from_alphas(const std::vector<double>& alphas) {
  require(!alphas.empty(), "noise schedule needs at least one step");
  NoiseSchedule s;
  s.alpha_.reserve(alphas.size() + 1);
  s.alpha_bar_.reserve(alphas.size() + 1);
  s.alpha_.push_back(1.0);
  s.alpha_bar_.push_back(1.0);
  for (double a : alphas) {
    require(a > 0.0 && a <= 1.0, "per-step alpha must lie in (0, 1]");
    s.alpha_.push_back(a);
    s.alpha_bar_.push_back(s.alpha_bar_.back() * a);
  }
  return s;
}

double NoiseSchedule::posterior_variance(int t) const {
  const double denom = 1.0 - alpha_bar(t);
  if (t <= 1 || denom <= 0.0) return 0.0;
  return beta(t) * (1.0 - alpha_bar(t - 1)) / denom;
}

NoiseSchedule cosine_schedule(int steps, double offset) {
  require(steps >= 1, "cosine schedule needs at least one step");
  auto f = [&](int t) {
    const double c = std::cos(((static_cast<double>(t) / steps + offset) / (1.0 + offset)) * std::numbers::pi / 2.0);
    return c * c;
  };
  std::vector<double> alphas(static_cast<std::size_t>(steps));
  for (int t = 1; t <= steps; ++t)
    alphas[static_cast<std::size_t>(t - 1)] = std::clamp(f(t) / f(t - 1), kMinAlpha, 1.0);
  return NoiseSchedule::from_alphas(alphas);
}

Eigen::MatrixXd q_sample(const Eigen::MatrixXd& x0, int t, const Eigen::MatrixXd& noise,
                         const NoiseSchedule& schedule) {
  require(x0.rows() == noise.rows() && x0.cols() == noise.cols(), "q_sample: noise shape does not match x0");
  require(t >= 0 && t <= schedule.steps(), "q_sample: step out of range");
  const double ab = schedule.alpha_bar(t);
  if (ab == 1.0) return x0;
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * noise;
}

Eigen::MatrixXd posterior_step(const Eigen::MatrixXd& x0_hat, const Eigen::MatrixXd& x_t, int t,
                               const NoiseSchedule& schedule, const Eigen::MatrixXd& noise) {
  require(t >= 1 && t <= schedule.steps(), "posterior_step: step must lie in [1, T]");
  require(x0_hat.rows() == x_t.rows() && x0_hat.cols() == x_t.cols(), "posterior_step: shape mismatch");
  const double ab = schedule.alpha_bar(t);
  const double ab_prev = schedule.alpha_bar(t - 1);
  const double denom = 1.0 - ab;
  // With no noise at t the posterior collapses onto the clean estimate.
  if (denom <= 0.0) return x0_hat;
  const double coef_x0 = std::sqrt(ab_prev) * schedule.beta(t) / denom;
  const double coef_xt = std::sqrt(schedule.alpha(t)) * (1.0 - ab_prev) / denom;
  Eigen::MatrixXd mean = coef_x0 * x0_hat + coef_xt * x_t;
  const double var = schedule.posterior_variance(t);
  if (var <= 0.0) return mean;
  require(noise.rows() == x_t.rows() && noise.cols() == x_t.cols(), "posterior_step: noise shape mismatch");
  return mean + std::sqrt(var) * noise;
}

}  // namespace speakgen::diffusion

#include "diffusion/sampler.hpp"

#include "common/error.hpp"

namespace speakgen::diffusion {
namespace {

Eigen::MatrixXd checked_predict(const Denoiser& denoiser, const Eigen::MatrixXd& x_t, int t,
                                const conditioning::ConditionBundle& c) {
  Eigen::MatrixXd out = denoiser.predict(x_t, t, c);
  require(out.rows() == x_t.rows() && out.cols() == x_t.cols(),
          "denoiser returned " + std::to_string(out.rows()) + "x" + std::to_string(out.cols()) + ", expected " +
              std::to_string(x_t.rows()) + "x" + std::to_string(x_t.cols()));
  return out;
}

}  // namespace

Eigen::MatrixXd cfg_denoise(const Denoiser& denoiser, const Eigen::MatrixXd& x_t, int t,
                            const conditioning::ConditionBundle& bundle, double gamma) {
  if (!bundle.has_text || gamma == 0.0) return checked_predict(denoiser, x_t, t, bundle.without_text());
  if (gamma == 1.0) return checked_predict(denoiser, x_t, t, bundle);
  const Eigen::MatrixXd with_text = checked_predict(denoiser, x_t, t, bundle);
  const Eigen::MatrixXd audio_only = checked_predict(denoiser, x_t, t, bundle.without_text());
  return gamma * with_text + (1.0 - gamma) * audio_only;
}

Eigen::MatrixXd denoise_from(const Denoiser& denoiser, Eigen::MatrixXd x, int t_start,
                             const conditioning::ConditionBundle& bundle, double gamma,
                             const NoiseSchedule& schedule, Rng& rng, const StepHook& hook) {
  require(t_start >= 0 && t_start <= schedule.steps(), "start step out of range");
  for (int t = t_start; t >= 1; --t) {
    const Eigen::MatrixXd x0_hat = cfg_denoise(denoiser, x, t, bundle, gamma);
    const Eigen::MatrixXd noise = t > 1 ? rng.normal_matrix(x.rows(), x.cols()) : Eigen::MatrixXd();
    x = posterior_step(x0_hat, x, t, schedule, noise);
    if (hook) hook(t - 1, x);
  }
  return x;
}

Eigen::MatrixXd sample_loop(const Denoiser& denoiser, const conditioning::ConditionBundle& bundle, double gamma,
                            int frames, const NoiseSchedule& schedule, Rng& rng) {
  require(frames >= 1, "sample_loop: frame count must be positive");
  Eigen::MatrixXd x = rng.normal_matrix(frames, denoiser.feature_dim());
  return denoise_from(denoiser, std::move(x), schedule.steps(), bundle, gamma, schedule, rng);
}

}  // namespace speakgen::diffusion

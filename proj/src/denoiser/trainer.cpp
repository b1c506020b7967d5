#include "denoiser/trainer.hpp"

#include <cmath>
#include <sstream>

#include "common/error.hpp"

namespace speakgen::denoiser {
namespace {

struct PreparedSample {
  Eigen::MatrixXd x_t;
  Eigen::Index valid;
};

PreparedSample prepare(const TrainingSample& s, const diffusion::NoiseSchedule& schedule) {
  require(s.t >= 1 && s.t <= schedule.steps(), "training step t must lie in [1, T]");
  const Eigen::Index valid = s.valid_frames < 0 ? s.x0.rows() : s.valid_frames;
  require(valid >= 1 && valid <= s.x0.rows(), "valid frame count out of range");
  return {diffusion::q_sample(s.x0, s.t, s.noise, schedule), valid};
}

GradientResult accumulate_gradients(const DenoiserParams& params, const std::vector<TrainingSample>& batch,
                                    const diffusion::NoiseSchedule& schedule, const diffusion::LossConfig& loss);

}  // namespace

double sample_loss(const DenoiserParams& params, const TrainingSample& sample, const diffusion::NoiseSchedule& schedule,
                   const diffusion::LossConfig& loss) {
  const PreparedSample p = prepare(sample, schedule);
  const Eigen::MatrixXd out = forward(params, p.x_t, sample.t, sample.condition);
  return diffusion::training_loss(sample.x0.topRows(p.valid), out.topRows(p.valid), loss);
}

namespace {

GradientResult accumulate_gradients(const DenoiserParams& params, const std::vector<TrainingSample>& batch,
                                    const diffusion::NoiseSchedule& schedule, const diffusion::LossConfig& loss) {
  require(!batch.empty(), "training batch is empty");
  GradientResult result{0.0, DenoiserParams::zeros_like(params)};
  const double weight = 1.0 / static_cast<double>(batch.size());
  ForwardCache cache;
  for (const TrainingSample& sample : batch) {
    const PreparedSample p = prepare(sample, schedule);
    const Eigen::MatrixXd out = forward(params, p.x_t, sample.t, sample.condition, &cache);
    const double l = diffusion::training_loss(sample.x0.topRows(p.valid), out.topRows(p.valid), loss);
    Eigen::MatrixXd grad_out = Eigen::MatrixXd::Zero(out.rows(), out.cols());
    grad_out.topRows(p.valid) =
        weight * diffusion::training_loss_gradient(sample.x0.topRows(p.valid), out.topRows(p.valid), loss);
    backward(params, cache, grad_out, result.grads);
    result.loss += weight * l;
  }
  return result;
}

}  // namespace

GradientResult compute_gradients(const DenoiserParams& params, const std::vector<TrainingSample>& batch,
                                 const diffusion::NoiseSchedule& schedule, const diffusion::LossConfig& loss) {
  GradientResult result = accumulate_gradients(params, batch, schedule, loss);
  if (!std::isfinite(result.loss)) throw ValidationError("training loss is not finite");
  return result;
}

Adam::Adam(const DenoiserParams& like, OptimizerConfig config)
    : config_(config), first_(DenoiserParams::zeros_like(like)), second_(DenoiserParams::zeros_like(like)) {
  require(config.learning_rate >= 0.0, "learning rate must be non-negative");
  require(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0,
          "Adam betas must lie in [0, 1)");
}

void Adam::step(DenoiserParams& params, const DenoiserParams& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = first_.tensors();
  auto v = second_.tensors();
  require(p.size() == g.size(), "gradient structure does not match parameters");
  for (std::size_t i = 0; i < p.size(); ++i) {
    Eigen::MatrixXd& mi = *m[i].second;
    Eigen::MatrixXd& vi = *v[i].second;
    const Eigen::MatrixXd& gi = *g[i].second;
    mi = config_.beta1 * mi + (1.0 - config_.beta1) * gi;
    vi = config_.beta2 * vi + (1.0 - config_.beta2) * gi.cwiseAbs2();
    if (config_.learning_rate == 0.0) continue;
    p[i].second->array() -=
        config_.learning_rate * (mi.array() / c1) / ((vi.array() / c2).sqrt() + config_.epsilon);
  }
}

TrainingDiverged::TrainingDiverged(int step, double loss)
    : ValidationError([&] {
        std::ostringstream os;
        os << "training diverged at step " << step << " (loss " << loss << ")";
        return os.str();
      }()),
      step_(step) {}

TrainResult train(DenoiserParams params, const DrawFn& draw, const diffusion::NoiseSchedule& schedule,
                  const TrainConfig& config, Rng& rng, const ProgressFn& progress) {
  require(config.steps >= 0 && config.batch_size >= 1, "training needs steps >= 0 and batch_size >= 1");
  require(config.mask_probability >= 0.0 && config.mask_probability <= 1.0, "mask probability must lie in [0, 1]");
  require(params.config.diffusion_steps == schedule.steps(), "model and schedule disagree on the step count");
  Adam adam(params, config.optimizer);
  TrainResult result;
  result.loss_curve.reserve(static_cast<std::size_t>(config.steps));
  std::vector<TrainingSample> batch(static_cast<std::size_t>(config.batch_size));
  for (int step = 0; step < config.steps; ++step) {
    for (auto& sample : batch) {
      TrainingDraw d = draw(rng);
      sample.t = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(schedule.steps())));
      sample.noise = rng.normal_matrix(d.x0.rows(), d.x0.cols());
      sample.condition = conditioning::mask_conditions(d.condition, rng, config.mask_probability);
      sample.x0 = std::move(d.x0);
      sample.valid_frames = d.valid_frames;
    }
    GradientResult g = accumulate_gradients(params, batch, schedule, config.loss);
    const double loss = g.loss;
    if (!std::isfinite(loss)) throw TrainingDiverged(step, loss);
    adam.step(params, g.grads);
    result.loss_curve.push_back(loss);
    if (progress) progress(step, loss);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace speakgen::denoiser

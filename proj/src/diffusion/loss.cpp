#include "diffusion/loss.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace speakgen::diffusion {

LossKind parse_loss_kind(std::string_view name) {
  if (name == "huber") return LossKind::kHuber;
  if (name == "mse") return LossKind::kMse;
  throw ValidationError("unknown loss '" + std::string(name) + "' (expected huber or mse)");
}

const char* loss_kind_name(LossKind kind) { return kind == LossKind::kHuber ? "huber" : "mse"; }

double training_loss(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x0_hat, const LossConfig& config) {
  require(x0.rows() == x0_hat.rows() && x0.cols() == x0_hat.cols(), "training_loss: shape mismatch");
  if (x0.size() == 0) return 0.0;
  const Eigen::ArrayXXd e = (x0_hat - x0).array();
  if (config.kind == LossKind::kMse) return e.square().mean();
  const double d = config.huber_delta;
  const Eigen::ArrayXXd a = e.abs();
  return (a <= d).select(0.5 * e.square(), d * (a - 0.5 * d)).mean();
}

Eigen::MatrixXd training_loss_gradient(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x0_hat,
                                       const LossConfig& config) {
  require(x0.rows() == x0_hat.rows() && x0.cols() == x0_hat.cols(), "training_loss: shape mismatch");
  const double n = static_cast<double>(x0.size());
  const Eigen::ArrayXXd e = (x0_hat - x0).array();
  if (config.kind == LossKind::kMse) return (2.0 / n * e).matrix();
  const double d = config.huber_delta;
  return (e.abs() <= d).select(e, d * e.sign()).matrix() / n;
}

}  // namespace speakgen::diffusion

#pragma once

#include <string_view>

#include <Eigen/Core>

namespace speakgen::diffusion {

enum class LossKind { kHuber, kMse };

LossKind parse_loss_kind(std::string_view name);
const char* loss_kind_name(LossKind kind);

struct LossConfig {
  LossKind kind = LossKind::kHuber;
  double huber_delta = 1.0;
};

// Mean over entries of the elementwise loss between target and prediction.
double training_loss(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x0_hat, const LossConfig& config);

// d(training_loss)/d(x0_hat).
Eigen::MatrixXd training_loss_gradient(const Eigen::MatrixXd& x0, const Eigen::MatrixXd& x0_hat,
                                       const LossConfig& config);

}  // namespace speakgen::diffusion

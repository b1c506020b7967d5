#include "metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "common/error.hpp"
#include "motion/kinematics.hpp"

namespace speakgen::metrics {
namespace {

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Eigen::MatrixXd gaussian_window(int size, double sigma) {
  Eigen::VectorXd g(size);
  const double c = (size - 1) / 2.0;
  for (int i = 0; i < size; ++i) g(i) = std::exp(-((i - c) * (i - c)) / (2.0 * sigma * sigma));
  g /= g.sum();
  return g * g.transpose();
}

}  // namespace

double mean_abs_derivative(const Eigen::MatrixXd& positions, double fps, int order) {
  require(order >= 1, "derivative order must be positive");
  require(fps > 0.0, "frame rate must be positive");
  const Eigen::Index frames = positions.rows();
  require(frames >= order + 1, "sequence has " + std::to_string(frames) + " frames, need at least " +
                                   std::to_string(order + 1) + " for order " + std::to_string(order));
  const Eigen::Index n = frames - order;
  Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(n, positions.cols());
  for (int k = 0; k <= order; ++k) {
    const double w = ((order - k) % 2 == 0 ? 1.0 : -1.0) * binomial(order, k);
    diff += w * positions.middleRows(k, n);
  }
  return diff.cwiseAbs().mean() * std::pow(fps, order);
}

KinematicStats kinematic_stats_from_positions(const std::vector<Eigen::MatrixXd>& positions, double fps, int order) {
  require(!positions.empty(), "no sequences to evaluate");
  std::vector<double> values;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    try {
      values.push_back(mean_abs_derivative(positions[i], fps, order));
    } catch (const ValidationError& e) {
      throw ValidationError("sequence " + std::to_string(i) + ": " + e.what());
    }
  }
  KinematicStats s;
  s.sequences = static_cast<int>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= s.sequences;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(var / s.sequences);
  return s;
}

KinematicStats kinematic_stats(const motion::Skeleton& skeleton, const std::vector<motion::MotionClip>& clips,
                               int order) {
  require(!clips.empty(), "no clips to evaluate");
  std::vector<Eigen::MatrixXd> positions;
  for (const auto& c : clips) {
    require(c.fps == clips.front().fps, "clips must share one frame rate");
    positions.push_back(motion::forward_kinematics(skeleton, c));
  }
  return kinematic_stats_from_positions(positions, clips.front().fps, order);
}

GaussianFit fit_gaussian(const Eigen::MatrixXd& samples) {
  require(samples.rows() >= 1 && samples.cols() >= 1, "cannot fit a Gaussian to an empty sample set");
  require(samples.allFinite(), "samples must be finite");
  GaussianFit fit;
  fit.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - fit.mean.transpose();
  const double denom = samples.rows() > 1 ? static_cast<double>(samples.rows() - 1) : 1.0;
  fit.covariance = centered.transpose() * centered / denom;
  return fit;
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  require(a.mean.size() == b.mean.size() && a.covariance.rows() == a.mean.size() &&
              b.covariance.rows() == b.mean.size(),
          "Gaussian fits have different dimensions");
  const Eigen::MatrixXd root_a = psd_sqrt(a.covariance);
  const Eigen::MatrixXd inner = root_a * b.covariance * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  const double cross = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  const double d = (a.mean - b.mean).squaredNorm() + a.covariance.trace() + b.covariance.trace() - 2.0 * cross;
  return std::max(d, 0.0);
}

double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SsimOptions& options) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "ssim: inputs have different shapes");
  require(a.size() > 0, "ssim: empty input");
  require(a.allFinite() && b.allFinite(), "ssim: inputs must be finite");
  require(options.window >= 1 && options.window % 2 == 1, "ssim: window size must be odd");
  int size = std::min<int>(options.window, static_cast<int>(std::min(a.rows(), a.cols())));
  if (size % 2 == 0) --size;
  const double range = std::max(a.maxCoeff(), b.maxCoeff()) - std::min(a.minCoeff(), b.minCoeff());
  if (range == 0.0) return 1.0;
  const double c1 = (options.k1 * range) * (options.k1 * range);
  const double c2 = (options.k2 * range) * (options.k2 * range);
  const Eigen::MatrixXd w = gaussian_window(size, options.sigma);

  double total = 0.0;
  int count = 0;
  for (Eigen::Index r = 0; r + size <= a.rows(); ++r) {
    for (Eigen::Index c = 0; c + size <= a.cols(); ++c) {
      const auto pa = a.block(r, c, size, size).array();
      const auto pb = b.block(r, c, size, size).array();
      const double ma = (w.array() * pa).sum();
      const double mb = (w.array() * pb).sum();
      const double va = (w.array() * (pa - ma).square()).sum();
      const double vb = (w.array() * (pb - mb).square()).sum();
      const double cov = (w.array() * (pa - ma) * (pb - mb)).sum();
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  }
  return total / count;
}

}  // namespace speakgen::metrics

#pragma once

#include <vector>

#include <Eigen/Core>

#include "motion/skeleton.hpp"

namespace speakgen::metrics {

// Mean and population standard deviation across sequences.
struct KinematicStats {
  double mean = 0.0;
  double std = 0.0;
  int sequences = 0;
};

// Mean absolute order-th time derivative of one position track (frames x 3J).
// Uses the forward binomial difference over order + 1 frames, scaled by
// fps^order, so a cubic sampled at any rate has an exact third derivative.
double mean_abs_derivative(const Eigen::MatrixXd& positions, double fps, int order);

// order 2: acceleration (m/s^2); order 3: jerk (m/s^3).
KinematicStats kinematic_stats_from_positions(const std::vector<Eigen::MatrixXd>& positions, double fps, int order);
KinematicStats kinematic_stats(const motion::Skeleton& skeleton, const std::vector<motion::MotionClip>& clips,
                               int order);

struct GaussianFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Rows are samples. Covariance uses the n - 1 normalizer (0 for one sample).
GaussianFit fit_gaussian(const Eigen::MatrixXd& samples);

double frechet_distance(const GaussianFit& a, const GaussianFit& b);

struct SsimOptions {
  int window = 11;  // odd; shrunk to fit inputs smaller than the window
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Single-channel image SSIM over valid window positions, with the dynamic
// range taken from both inputs.
double ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const SsimOptions& options = {});

}  // namespace speakgen::metrics

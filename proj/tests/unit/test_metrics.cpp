#include <cmath>

#include "doctest.h"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "metrics/metrics.hpp"
#include "motion/kinematics.hpp"
#include "support.hpp"

using namespace speakgen;
using namespace speakgen::metrics;

namespace {

Eigen::MatrixXd track(int frames, double fps, double (*x)(double)) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(frames, 3);
  for (int f = 0; f < frames; ++f) p(f, 0) = x(f / fps);
  return p;
}

GaussianFit univariate(double mean, double var) {
  GaussianFit g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.covariance = Eigen::MatrixXd::Constant(1, 1, var);
  return g;
}

// Scalar-window SSIM over the whole matrix, computed directly.
double global_ssim(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double range) {
  const double c1 = std::pow(0.01 * range, 2), c2 = std::pow(0.03 * range, 2);
  const double ma = a.mean(), mb = b.mean();
  const double va = (a.array() - ma).square().mean(), vb = (b.array() - mb).square().mean();
  const double cov = ((a.array() - ma) * (b.array() - mb)).mean();
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

}  // namespace

TEST_CASE("jerk and acceleration of analytic trajectories") {
  const double fps = 20;
  const auto cubic = track(40, fps, [](double t) { return t * t * t; });
  CHECK(mean_abs_derivative(cubic, fps, 3) * 3 == doctest::Approx(6.0).epsilon(0.01));
  KinematicStats s = kinematic_stats_from_positions({cubic}, fps, 3);
  // Only x moves, so the joint/axis mean is a third of the x jerk.
  CHECK(std::abs(s.mean * 3 - 6.0) < 0.06);
  CHECK(s.std == 0.0);

  const auto quad = track(40, fps, [](double t) { return 3 * t * t - t + 2; });
  CHECK(std::abs(mean_abs_derivative(quad, fps, 3)) < 1e-9);
  CHECK(mean_abs_derivative(quad, fps, 2) * 3 == doctest::Approx(6.0));

  const auto line = track(40, fps, [](double t) { return 1.5 * t; });
  CHECK(mean_abs_derivative(line, fps, 2) < 1e-9);
  CHECK(mean_abs_derivative(line, fps, 3) < 1e-9);

  const auto two = kinematic_stats_from_positions({line, quad}, fps, 2);
  CHECK(two.mean == doctest::Approx(1.0));
  CHECK(two.std == doctest::Approx(1.0));

  CHECK_THROWS_WITH_AS(kinematic_stats_from_positions({cubic, track(3, fps, [](double t) { return t; })}, fps, 3),
                       doctest::Contains("sequence 1"), ValidationError);
}

TEST_CASE("kinematic stats through forward kinematics") {
  const auto s = testing::biped();
  motion::MotionClip clip = motion::MotionClip::rest(30, s.joint_count(), 20);
  for (int f = 0; f < 30; ++f) clip.root_translation.row(f) << 0.1 * f, 0.9, 0;
  const auto stats = kinematic_stats(s, {clip, clip}, 3);
  CHECK(stats.mean < 1e-9);
  CHECK(stats.sequences == 2);
}

TEST_CASE("frechet distance closed forms") {
  CHECK(std::abs(frechet_distance(univariate(0, 1), univariate(1, 1)) - 1.0) < 1e-9);
  CHECK(std::abs(frechet_distance(univariate(0, 1), univariate(0, 4)) - 1.0) < 1e-9);
  Rng rng(1);
  const Eigen::MatrixXd a = rng.normal_matrix(200, 6);
  Eigen::MatrixXd b = rng.normal_matrix(150, 6);
  b.col(2) *= 3.0;
  const GaussianFit fa = fit_gaussian(a), fb = fit_gaussian(b);
  CHECK(frechet_distance(fa, fa) < 1e-6);
  CHECK(std::abs(frechet_distance(fa, fb) - frechet_distance(fb, fa)) < 1e-8);
  CHECK(frechet_distance(fa, fb) > 1.0);
  // Diagonal covariances reduce to a per-dimension sum.
  GaussianFit d1, d2;
  d1.mean = Eigen::Vector2d(0, 1);
  d1.covariance = Eigen::Vector2d(1, 4).asDiagonal();
  d2.mean = Eigen::Vector2d(1, 1);
  d2.covariance = Eigen::Vector2d(9, 4).asDiagonal();
  CHECK(frechet_distance(d1, d2) == doctest::Approx(1.0 + (1 + 9 - 2 * 3)));
  CHECK_THROWS_AS(frechet_distance(d1, univariate(0, 1)), ValidationError);
}

TEST_CASE("ssim") {
  Rng rng(2);
  const Eigen::MatrixXd a = rng.normal_matrix(30, 20);
  CHECK(std::abs(ssim(a, a) - 1.0) < 1e-9);
  // Locally zero-mean input: the structure term turns negative under negation.
  Eigen::MatrixXd checker(30, 20);
  for (int r = 0; r < 30; ++r)
    for (int c = 0; c < 20; ++c) checker(r, c) = ((r + c) % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.1 * rng.normal());
  CHECK(ssim(checker, -checker) < 0.0);
  const Eigen::MatrixXd bright = (a.array() * 0.5 + 3.0).matrix();
  double previous = 1.0;
  for (double c : {0.5, 1.0, 2.0, 4.0}) {
    const Eigen::MatrixXd shifted = bright.array() + c;
    const double v = ssim(bright, shifted);
    CHECK(v < previous);
    previous = v;
  }
  // Windows the size of the input reduce to the direct formula with uniform weights.
  const Eigen::MatrixXd small = rng.normal_matrix(5, 5);
  const Eigen::MatrixXd other = small * 0.5 + rng.normal_matrix(5, 5) * 0.3;
  SsimOptions flat;
  flat.window = 5;
  flat.sigma = 1e6;
  const double range = std::max(small.maxCoeff(), other.maxCoeff()) - std::min(small.minCoeff(), other.minCoeff());
  CHECK(ssim(small, other, flat) == doctest::Approx(global_ssim(small, other, range)).epsilon(1e-9));
  CHECK_THROWS_AS(ssim(a, rng.normal_matrix(30, 21)), ValidationError);
}

#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "common/rng.hpp"
#include "motion/features.hpp"
#include "motion/skeleton.hpp"

namespace speakgen::testing {

// Uniformly distributed rotation: normalized 4D Gaussian.
inline Eigen::Quaterniond random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  return q.normalized();
}

// Eight-joint biped used across motion tests.
inline motion::Skeleton biped() {
  using motion::Joint;
  std::vector<Joint> j;
  j.push_back({"pelvis", -1, {0, 0.9, 0}, std::nullopt});
  j.push_back({"spine", 0, {0, 0.3, 0}, std::nullopt});
  j.push_back({"head", 1, {0, 0.4, 0}, Eigen::Vector3d(0, 0.15, 0)});
  j.push_back({"l_ankle", 0, {0.12, -0.82, 0}, std::nullopt});
  j.push_back({"l_toe", 3, {0, -0.05, 0.14}, std::nullopt});
  j.push_back({"r_ankle", 0, {-0.12, -0.82, 0}, std::nullopt});
  j.push_back({"r_toe", 5, {0, -0.05, 0.14}, std::nullopt});
  j.push_back({"r_hand", 1, {-0.45, 0.25, 0}, std::nullopt});
  return motion::Skeleton(std::move(j));
}

inline motion::FeatureOptions biped_feature_options() {
  motion::FeatureOptions o;
  o.feet.names = {"l_ankle", "r_ankle", "l_toe", "r_toe"};
  return o;
}

// Smooth clip with a turning, translating root and oscillating joints.
inline motion::MotionClip wandering_clip(const motion::Skeleton& s, int frames, Rng& rng, double fps = 20.0) {
  motion::MotionClip clip = motion::MotionClip::rest(frames, s.joint_count(), fps);
  std::vector<Eigen::Vector3d> axes;
  std::vector<double> freq, amp, phase;
  for (int j = 0; j < s.joint_count(); ++j) {
    axes.push_back(Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized());
    freq.push_back(0.3 + rng.uniform());
    amp.push_back(0.1 + 0.4 * rng.uniform());
    phase.push_back(2.0 * std::numbers::pi * rng.uniform());
  }
  const double turn_rate = 0.6 * (rng.uniform() - 0.5);
  const double speed = 0.8 * rng.uniform();
  double yaw = 2.0 * std::numbers::pi * rng.uniform();
  Eigen::Vector3d p(rng.normal(), 0.9, rng.normal());
  for (int f = 0; f < frames; ++f) {
    const double time = f / fps;
    for (int j = 0; j < s.joint_count(); ++j) {
      const double angle = amp[static_cast<std::size_t>(j)] *
                           std::sin(2.0 * std::numbers::pi * freq[static_cast<std::size_t>(j)] * time +
                                    phase[static_cast<std::size_t>(j)]);
      clip.rotation(f, j) = Eigen::Quaterniond(Eigen::AngleAxisd(angle, axes[static_cast<std::size_t>(j)]));
    }
    clip.rotation(f, 0) =
        (Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY())) * clip.rotation(f, 0)).normalized();
    clip.root_translation.row(f) = p.transpose();
    p += Eigen::Vector3d(std::sin(yaw), 0.0, std::cos(yaw)) * (speed / fps);
    p.y() = 0.9 + 0.03 * std::sin(3.0 * time);
    yaw += turn_rate / fps;
  }
  return clip;
}

// Frequency (Hz) of the largest non-DC bin of a direct DFT of the
// mean-removed signal.
inline double dominant_frequency(const Eigen::VectorXd& signal, double fps) {
  const Eigen::Index n = signal.size();
  const Eigen::VectorXd x = signal.array() - signal.mean();
  double best = -1.0;
  Eigen::Index best_k = 1;
  for (Eigen::Index k = 1; k <= n / 2; ++k) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n);
      re += x(i) * std::cos(a);
      im -= x(i) * std::sin(a);
    }
    if (re * re + im * im > best) {
      best = re * re + im * im;
      best_k = k;
    }
  }
  return static_cast<double>(best_k) * fps / static_cast<double>(n);
}

}  // namespace speakgen::testing

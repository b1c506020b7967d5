#pragma once

#include <array>
#include <string>

#include <Eigen/Core>

#include "motion/skeleton.hpp"

namespace speakgen::motion {

// Column ranges of the per-frame kinematic feature vector for a skeleton of
// `joint_count` joints. Slices are contiguous, in this order, and cover
// [0, 12J - 1).
struct FeatureSlice {
  int begin = 0;
  int size = 0;
  int end() const { return begin + size; }
};

struct FeatureLayout {
  int joint_count = 0;
  FeatureSlice root_angular_velocity;  // 1: yaw change per frame
  FeatureSlice root_linear_velocity;   // 2: (lateral, forward) per frame, heading frame
  FeatureSlice root_height;            // 1
  FeatureSlice joint_positions;        // 3(J-1): root-relative, heading frame
  FeatureSlice joint_rotations;        // 6(J-1): local rotations, 6D form
  FeatureSlice joint_velocities;       // 3J: per frame, heading frame
  FeatureSlice foot_contacts;          // 4: left heel, right heel, left toe, right toe

  static FeatureLayout for_joints(int joint_count);
  int dim() const { return foot_contacts.end(); }
};

inline constexpr int feature_dim(int joint_count) { return 12 * joint_count - 1; }

struct FeatureSequence {
  Eigen::MatrixXd data;  // frames x dim
  FeatureLayout layout;
};

struct FootJoints {
  // Left heel, right heel, left toe, right toe.
  std::array<std::string, 4> names;
};

struct FeatureOptions {
  FootJoints feet;
  double contact_speed = 0.10;  // m/s
  double fps = 20.0;
};

// Requires a canonicalized clip at options.fps with at least 2 frames.
FeatureSequence encode_features(const Skeleton& skeleton, const MotionClip& clip, const FeatureOptions& options);

// Integrates the root trajectory from the origin with zero initial heading.
// The root's tilt is recovered from the root-relative positions of its
// children; the remaining joints take their rotations from the 6D slices.
MotionClip decode_features(const FeatureSequence& features, const Skeleton& skeleton, double fps = 20.0);

}  // namespace speakgen::motion

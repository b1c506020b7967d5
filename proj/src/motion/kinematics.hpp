#pragma once

#include <vector>

#include <Eigen/Core>

#include "motion/skeleton.hpp"

namespace speakgen::motion {

// Global joint positions, one row per frame; joint j occupies columns
// [3j, 3j + 3).
Eigen::MatrixXd forward_kinematics(const Skeleton& skeleton, const MotionClip& clip);

// Global rotations for one frame, indexed by joint.
std::vector<Eigen::Quaterniond> global_rotations(const Skeleton& skeleton, const MotionClip& clip, int frame);

inline Eigen::Vector3d joint_position(const Eigen::MatrixXd& positions, int frame, int joint) {
  return positions.row(frame).segment<3>(3 * joint).transpose();
}

struct CanonicalMotion {
  Skeleton skeleton;
  MotionClip clip;
};

inline constexpr double kDefaultTargetHeight = 1.70;

// Rescales the skeleton and root translations so the rest pose is
// `target_height` tall, turns the first frame to face +Z, moves the first-frame
// root to the ground-plane origin and lifts the clip so the lowest first-frame
// joint touches y = 0.
CanonicalMotion canonicalize(const Skeleton& skeleton, const MotionClip& clip,
                             double target_height = kDefaultTargetHeight);

// Linear/slerp resampling onto a `target_fps` grid starting at frame 0.
MotionClip resample(const MotionClip& clip, double target_fps);

}  // namespace speakgen::motion

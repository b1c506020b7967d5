#include "motion/kinematics.hpp"

#include <cmath>

#include "common/error.hpp"
#include "motion/rotation.hpp"

namespace speakgen::motion {

Eigen::MatrixXd forward_kinematics(const Skeleton& skeleton, const MotionClip& clip) {
  const int joints = skeleton.joint_count();
  require(clip.joint_count == joints, "motion clip joint count does not match the skeleton");
  Eigen::MatrixXd positions(clip.frames(), 3 * joints);
  std::vector<Eigen::Quaterniond> global(static_cast<std::size_t>(joints));
  for (int f = 0; f < clip.frames(); ++f) {
    for (int j = 0; j < joints; ++j) {
      const Joint& joint = skeleton.joint(j);
      const auto ju = static_cast<std::size_t>(j);
      if (joint.parent < 0) {
        global[ju] = clip.rotation(f, j);
        positions.row(f).segment<3>(0) = clip.root_translation.row(f);
      } else {
        const auto pu = static_cast<std::size_t>(joint.parent);
        global[ju] = global[pu] * clip.rotation(f, j);
        positions.row(f).segment<3>(3 * j) =
            positions.row(f).segment<3>(3 * joint.parent) + (global[pu] * joint.offset).transpose();
      }
    }
  }
  return positions;
}

std::vector<Eigen::Quaterniond> global_rotations(const Skeleton& skeleton, const MotionClip& clip, int frame) {
  std::vector<Eigen::Quaterniond> global(static_cast<std::size_t>(skeleton.joint_count()));
  for (int j = 0; j < skeleton.joint_count(); ++j) {
    const int parent = skeleton.joint(j).parent;
    global[static_cast<std::size_t>(j)] =
        parent < 0 ? clip.rotation(frame, j) : global[static_cast<std::size_t>(parent)] * clip.rotation(frame, j);
  }
  return global;
}

CanonicalMotion canonicalize(const Skeleton& skeleton, const MotionClip& clip, double target_height) {
  clip.validate();
  require(clip.joint_count == skeleton.joint_count(), "motion clip joint count does not match the skeleton");
  require(std::isfinite(target_height) && target_height > 0.0, "target height must be positive");
  const double height = skeleton.rest_height();
  require(height > 1e-12, "skeleton has zero rest-pose height");
  const double scale = target_height / height;

  CanonicalMotion out{skeleton.scaled(scale), clip};
  MotionClip& c = out.clip;
  c.root_translation *= scale;

  const Eigen::Quaterniond turn = yaw_quat(-heading_yaw(c.rotation(0, 0)));
  const Eigen::Vector3d start = c.root_translation.row(0).transpose();
  for (int f = 0; f < c.frames(); ++f) {
    Eigen::Vector3d p = c.root_translation.row(f).transpose();
    p.x() -= start.x();
    p.z() -= start.z();
    c.root_translation.row(f) = (turn * p).transpose();
    c.rotation(f, 0) = (turn * c.rotation(f, 0)).normalized();
  }

  const Eigen::MatrixXd first = forward_kinematics(out.skeleton, MotionClip{c.fps, c.joint_count,
                                                                            c.root_translation.topRows(1),
                                                                            {c.rotations.begin(),
                                                                             c.rotations.begin() + c.joint_count}});
  double floor = first(0, 1);
  for (int j = 1; j < c.joint_count; ++j) floor = std::min(floor, first(0, 3 * j + 1));
  c.root_translation.col(1).array() -= floor;
  return out;
}

MotionClip resample(const MotionClip& clip, double target_fps) {
  clip.validate();
  require(std::isfinite(target_fps) && target_fps > 0.0, "target fps must be positive");
  if (clip.fps == target_fps) return clip;
  const double duration = (clip.frames() - 1) / clip.fps;
  const int frames = static_cast<int>(std::floor(duration * target_fps + 1e-9)) + 1;
  MotionClip out = MotionClip::rest(frames, clip.joint_count, target_fps);
  for (int k = 0; k < frames; ++k) {
    const double src = k * clip.fps / target_fps;
    const int i0 = std::min(static_cast<int>(std::floor(src)), clip.frames() - 1);
    const int i1 = std::min(i0 + 1, clip.frames() - 1);
    const double w = src - i0;
    out.root_translation.row(k) = (1.0 - w) * clip.root_translation.row(i0) + w * clip.root_translation.row(i1);
    for (int j = 0; j < clip.joint_count; ++j)
      out.rotation(k, j) = clip.rotation(i0, j).slerp(w, clip.rotation(i1, j)).normalized();
  }
  return out;
}

}  // namespace speakgen::motion

#include "motion/features.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "common/error.hpp"
#include "motion/kinematics.hpp"
#include "motion/rotation.hpp"

namespace speakgen::motion {
namespace {

// Rotation taking the rest offsets `from` onto the observed vectors `to`
// (least squares, proper rotation).
Eigen::Matrix3d fit_rotation(const std::vector<Eigen::Vector3d>& from, const std::vector<Eigen::Vector3d>& to) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t k = 0; k < from.size(); ++k) cov += from[k] * to[k].transpose();
  if (cov.norm() < 1e-12) return Eigen::Matrix3d::Identity();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return svd.matrixV() * d * svd.matrixU().transpose();
}

}  // namespace

FeatureLayout FeatureLayout::for_joints(int joint_count) {
  require(joint_count >= 2, "feature layout needs at least 2 joints");
  FeatureLayout l;
  l.joint_count = joint_count;
  int at = 0;
  auto take = [&at](int n) {
    FeatureSlice s{at, n};
    at += n;
    return s;
  };
  l.root_angular_velocity = take(1);
  l.root_linear_velocity = take(2);
  l.root_height = take(1);
  l.joint_positions = take(3 * (joint_count - 1));
  l.joint_rotations = take(6 * (joint_count - 1));
  l.joint_velocities = take(3 * joint_count);
  l.foot_contacts = take(4);
  return l;
}

FeatureSequence encode_features(const Skeleton& skeleton, const MotionClip& clip, const FeatureOptions& options) {
  clip.validate();
  const int joints = skeleton.joint_count();
  require(clip.joint_count == joints, "motion clip joint count does not match the skeleton");
  require(clip.frames() >= 2, "feature encoding needs at least 2 frames");
  require(std::abs(clip.fps - options.fps) < 1e-9,
          "clip must be resampled to " + std::to_string(options.fps) + " fps before encoding");
  std::array<int, 4> feet{};
  for (std::size_t k = 0; k < 4; ++k) {
    feet[k] = skeleton.find(options.feet.names[k]);
    require(feet[k] >= 0, "skeleton lacks configured foot joint '" + options.feet.names[k] + "'");
  }

  const FeatureLayout layout = FeatureLayout::for_joints(joints);
  const Eigen::MatrixXd pos = forward_kinematics(skeleton, clip);
  const int frames = clip.frames();
  std::vector<double> yaw(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) yaw[static_cast<std::size_t>(f)] = heading_yaw(clip.rotation(f, 0));

  FeatureSequence out{Eigen::MatrixXd::Zero(frames, layout.dim()), layout};
  Eigen::MatrixXd& x = out.data;
  for (int f = 0; f < frames; ++f) {
    const auto fu = static_cast<std::size_t>(f);
    const Eigen::Quaterniond unturn = yaw_quat(-yaw[fu]);
    const Eigen::Vector3d root = joint_position(pos, f, 0);
    x(f, layout.root_height.begin) = root.y();
    for (int j = 1; j < joints; ++j) {
      x.row(f).segment<3>(layout.joint_positions.begin + 3 * (j - 1)) =
          (unturn * (joint_position(pos, f, j) - root)).transpose();
      x.row(f).segment<6>(layout.joint_rotations.begin + 6 * (j - 1)) =
          sixd_from_matrix(clip.rotation(f, j).toRotationMatrix()).transpose();
    }
    // Velocity-type entries use the forward difference; the final frame
    // repeats the previous one.
    if (f + 1 < frames) {
      x(f, layout.root_angular_velocity.begin) = wrap_angle(yaw[fu + 1] - yaw[fu]);
      const Eigen::Vector3d step = unturn * (joint_position(pos, f + 1, 0) - root);
      x(f, layout.root_linear_velocity.begin) = step.x();
      x(f, layout.root_linear_velocity.begin + 1) = step.z();
      for (int j = 0; j < joints; ++j)
        x.row(f).segment<3>(layout.joint_velocities.begin + 3 * j) =
            (unturn * (joint_position(pos, f + 1, j) - joint_position(pos, f, j))).transpose();
      for (int k = 0; k < 4; ++k) {
        const double speed =
            (joint_position(pos, f + 1, feet[static_cast<std::size_t>(k)]) -
             joint_position(pos, f, feet[static_cast<std::size_t>(k)]))
                .norm() *
            options.fps;
        x(f, layout.foot_contacts.begin + k) = speed < options.contact_speed ? 1.0 : 0.0;
      }
    } else {
      auto copy = [&](const FeatureSlice& s) { x.row(f).segment(s.begin, s.size) = x.row(f - 1).segment(s.begin, s.size); };
      copy(layout.root_angular_velocity);
      copy(layout.root_linear_velocity);
      copy(layout.joint_velocities);
      copy(layout.foot_contacts);
    }
  }
  return out;
}

MotionClip decode_features(const FeatureSequence& features, const Skeleton& skeleton, double fps) {
  const int joints = skeleton.joint_count();
  const FeatureLayout& layout = features.layout;
  require(layout.joint_count == joints, "feature layout joint count does not match the skeleton");
  require(features.data.cols() == layout.dim(), "feature matrix width does not match its layout");
  require(features.data.rows() >= 1, "feature sequence is empty");
  require(features.data.allFinite(), "feature matrix contains non-finite values");

  const Eigen::MatrixXd& x = features.data;
  const int frames = static_cast<int>(x.rows());
  MotionClip clip = MotionClip::rest(frames, joints, fps);

  const std::vector<int> root_children = skeleton.children(0);
  std::vector<Eigen::Vector3d> rest;
  for (int c : root_children) rest.push_back(skeleton.joint(c).offset);

  double yaw = 0.0;
  Eigen::Vector3d ground = Eigen::Vector3d::Zero();
  for (int f = 0; f < frames; ++f) {
    const Eigen::Quaterniond turn = yaw_quat(yaw);
    clip.root_translation.row(f) << ground.x(), x(f, layout.root_height.begin), ground.z();

    std::vector<Eigen::Vector3d> observed;
    for (int c : root_children)
      observed.push_back(x.row(f).segment<3>(layout.joint_positions.begin + 3 * (c - 1)).transpose());
    const Eigen::Quaterniond tilt(fit_rotation(rest, observed));
    clip.rotation(f, 0) = (turn * tilt).normalized();

    for (int j = 1; j < joints; ++j) {
      const Eigen::Matrix<double, 6, 1> sixd =
          x.row(f).segment<6>(layout.joint_rotations.begin + 6 * (j - 1)).transpose();
      clip.rotation(f, j) = Eigen::Quaterniond(matrix_from_sixd(sixd)).normalized();
    }

    const Eigen::Vector3d step(x(f, layout.root_linear_velocity.begin), 0.0,
                               x(f, layout.root_linear_velocity.begin + 1));
    ground += turn * step;
    yaw += x(f, layout.root_angular_velocity.begin);
  }
  return clip;
}

}  // namespace speakgen::motion

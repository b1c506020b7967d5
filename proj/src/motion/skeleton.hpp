#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace speakgen::motion {

struct Joint {
  std::string name;
  int parent = -1;  // -1 marks the root
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::optional<Eigen::Vector3d> end_site;
};

// Joint hierarchy in topological order (parents precede children).
class Skeleton {
 public:
  Skeleton() = default;
  explicit Skeleton(std::vector<Joint> joints);

  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(int i) const { return joints_[static_cast<std::size_t>(i)]; }
  int joint_count() const { return static_cast<int>(joints_.size()); }

  // -1 when absent.
  int find(const std::string& name) const;
  std::vector<int> children(int joint) const;

  // Vertical extent of the rest pose over joints and end sites.
  double rest_height() const;

  // Copy with every offset and end site multiplied by `factor`.
  Skeleton scaled(double factor) const;

  // Throws ValidationError unless the hierarchy invariants hold.
  void validate() const;

 private:
  std::vector<Joint> joints_;
};

// Root translation plus per-joint local rotations sampled at `fps`.
struct MotionClip {
  double fps = 20.0;
  int joint_count = 0;
  Eigen::MatrixXd root_translation;           // frames x 3
  std::vector<Eigen::Quaterniond> rotations;  // frames * joint_count, frame-major

  int frames() const { return static_cast<int>(root_translation.rows()); }

  Eigen::Quaterniond& rotation(int frame, int joint) {
    return rotations[static_cast<std::size_t>(frame * joint_count + joint)];
  }
  const Eigen::Quaterniond& rotation(int frame, int joint) const {
    return rotations[static_cast<std::size_t>(frame * joint_count + joint)];
  }

  // All-identity clip with the root at the origin.
  static MotionClip rest(int frames, int joint_count, double fps);

  void validate() const;
};

}  // namespace speakgen::motion

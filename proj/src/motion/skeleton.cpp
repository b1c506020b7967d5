#include "motion/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common/error.hpp"

namespace speakgen::motion {

Skeleton::Skeleton(std::vector<Joint> joints) : joints_(std::move(joints)) { validate(); }

int Skeleton::find(const std::string& name) const {
  for (int i = 0; i < joint_count(); ++i)
    if (joints_[static_cast<std::size_t>(i)].name == name) return i;
  return -1;
}

std::vector<int> Skeleton::children(int joint) const {
  std::vector<int> out;
  for (int i = 0; i < joint_count(); ++i)
    if (joints_[static_cast<std::size_t>(i)].parent == joint) out.push_back(i);
  return out;
}

double Skeleton::rest_height() const {
  std::vector<Eigen::Vector3d> global(joints_.size());
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  auto extend = [&](const Eigen::Vector3d& p) {
    lo = std::min(lo, p.y());
    hi = std::max(hi, p.y());
  };
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& j = joints_[i];
    global[i] = j.parent < 0 ? Eigen::Vector3d::Zero()
                             : Eigen::Vector3d(global[static_cast<std::size_t>(j.parent)] + j.offset);
    extend(global[i]);
    if (j.end_site) extend(global[i] + *j.end_site);
  }
  return hi - lo;
}

Skeleton Skeleton::scaled(double factor) const {
  std::vector<Joint> joints = joints_;
  for (auto& j : joints) {
    j.offset *= factor;
    if (j.end_site) *j.end_site *= factor;
  }
  return Skeleton(std::move(joints));
}

void Skeleton::validate() const {
  require(joints_.size() >= 2, "skeleton needs at least 2 joints");
  int roots = 0;
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    const auto& j = joints_[i];
    if (j.parent < 0) {
      ++roots;
      require(i == 0, "skeleton root must be joint 0");
    } else {
      require(j.parent < static_cast<int>(i),
              "joint '" + j.name + "' precedes its parent (topological order violated)");
    }
    require(j.offset.allFinite(), "joint '" + j.name + "' has a non-finite offset");
    require(!j.end_site || j.end_site->allFinite(), "joint '" + j.name + "' has a non-finite end site");
  }
  require(roots == 1, "skeleton must have exactly one root");
}

MotionClip MotionClip::rest(int frames, int joint_count, double fps) {
  MotionClip clip;
  clip.fps = fps;
  clip.joint_count = joint_count;
  clip.root_translation = Eigen::MatrixXd::Zero(frames, 3);
  clip.rotations.assign(static_cast<std::size_t>(frames * joint_count), Eigen::Quaterniond::Identity());
  return clip;
}

void MotionClip::validate() const {
  require(frames() >= 1, "motion clip needs at least one frame");
  require(root_translation.cols() == 3, "root translation must have 3 columns");
  require(std::isfinite(fps) && fps > 0.0, "motion clip fps must be positive");
  require(rotations.size() == static_cast<std::size_t>(frames() * joint_count),
          "rotation count does not match frames x joints");
  require(root_translation.allFinite(), "root translation is not finite");
  for (const auto& q : rotations) {
    require(q.coeffs().allFinite(), "joint rotation is not finite");
    require(std::abs(q.norm() - 1.0) <= 1e-6, "joint rotation is not a unit quaternion");
  }
}

}  // namespace speakgen::motion
